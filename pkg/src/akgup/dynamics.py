"""Pointer dynamics: evolving probe states and the AK uncertainty product."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

from .coefficients import CoefficientTable, derive_coefficients, normalization
from .oracle.grid import (
    GridSpec,
    GridState,
    GridTooSmallError,
    apply_factorized_unitary,
    boundary_amplitude,
    to_position,
)
from .params import ParameterError, SystemParams
from .propagator import action_matrix, ak_prefactor

__all__ = [
    "GaussianPacket",
    "InitialState",
    "UncertaintyReport",
    "DEFAULT_GRID",
    "DEFAULT_WIDTH",
    "evolve",
    "evolve_convolution",
    "variance",
    "ak_product",
    "beta_sweep",
    "sweep_csv",
    "sweep_slopes",
    "NormalizationError",
]

DEFAULT_WIDTH = 1 / np.sqrt(2)
# wide enough in both p and q for unit masses at T = 1/kappa
DEFAULT_GRID = GridSpec(128, 10.0)


class NormalizationError(ValueError):
    pass


@dataclass(frozen=True)
class GaussianPacket:
    """``phi(q) ~ exp(-(q - center)^2 / (4 width^2) + i momentum (q - center))``."""

    center: float = 0.0
    momentum: float = 0.0
    width: float = DEFAULT_WIDTH

    def __post_init__(self):
        if not self.width > 0:
            raise ParameterError(f"width must be positive, got {self.width}")


@dataclass(frozen=True)
class InitialState:
    """Product of three Gaussians, or a correlated two-mode Gaussian in (q1, q2) times phi3.

    For ``kind="entangled"`` the (q1, q2) probability density has position
    covariance ``[[s1^2, rho s1 s2], [rho s1 s2, s2^2]]``.
    """

    packets: tuple[GaussianPacket, GaussianPacket, GaussianPacket] = (GaussianPacket(),) * 3
    kind: str = "product"
    rho: float = 0.0

    def __post_init__(self):
        if self.kind not in ("product", "entangled"):
            raise ParameterError(f"unknown initial-state kind {self.kind!r}")
        if len(self.packets) != 3:
            raise ParameterError("three Gaussian packets are required")
        if not -1.0 < self.rho < 1.0:
            raise ParameterError(f"|rho| must be < 1, got {self.rho}")
        if self.kind == "product" and self.rho != 0:
            raise ParameterError("product states carry no correlation; use kind='entangled'")

    @classmethod
    def product(cls, *packets: GaussianPacket) -> "InitialState":
        return cls(tuple(packets) if packets else (GaussianPacket(),) * 3)

    @classmethod
    def entangled(cls, rho: float, *packets: GaussianPacket) -> "InitialState":
        return cls(tuple(packets) if packets else (GaussianPacket(),) * 3, "entangled", rho)

    def covariance(self) -> np.ndarray:
        s = np.array([p.width for p in self.packets])
        cov = np.diag(s**2)
        cov[0, 1] = cov[1, 0] = self.rho * s[0] * s[1]
        return cov

    @property
    def centers(self) -> np.ndarray:
        return np.array([p.center for p in self.packets])

    @property
    def momenta(self) -> np.ndarray:
        return np.array([p.momentum for p in self.packets])

    def position_wavefunction(self, q1, q2, q3):
        """Continuum ``psi(q)``, normalized to one."""
        cov = self.covariance()
        inv = np.linalg.inv(cov)
        d = [np.asarray(q1) - self.centers[0], np.asarray(q2) - self.centers[1], np.asarray(q3) - self.centers[2]]
        quad = sum(inv[i, j] * d[i] * d[j] for i in range(3) for j in range(3))
        phase = sum(k * x for k, x in zip(self.momenta, d))
        norm = (2 * np.pi) ** -0.75 * np.linalg.det(cov) ** -0.25
        return norm * np.exp(-0.25 * quad + 1j * phase)

    def on_grid(self, spec: GridSpec, leak_tol: float = 1e-10) -> GridState:
        """Sampled in momentum space and normalized on the grid.

        Product states are the ``rho = 0`` case of the same expression.
        """
        P = spec.mesh("p")
        cov = self.covariance()
        d = [P[i] - self.momenta[i] for i in range(3)]
        quad = sum(cov[i, j] * d[i] * d[j] for i in range(3) for j in range(3))
        phase = sum(d[i] * self.centers[i] for i in range(3))
        a = np.exp(-quad - 1j * phase)
        a = a / np.sqrt(np.sum(np.abs(a.ravel()) ** 2))
        for rep, arr in (("momentum", a), ("position", to_position(a))):
            leak = boundary_amplitude(arr)
            if leak > leak_tol:
                raise GridTooSmallError(
                    f"initial state not representable: {rep}-space boundary amplitude {leak:.2e}", spec.enlarged()
                )
        return GridState(spec, a)


@dataclass
class UncertaintyReport:
    var_x1: float
    var_x2: float
    product: float
    bound: float = 1.0
    beta_used: float = 0.0
    T_used: float = 1.0
    details: dict = field(default_factory=dict)

    @property
    def satisfies_bound(self) -> bool:
        return self.product >= self.bound - 1e-6

    def as_dict(self) -> dict:
        out = {
            "var_x1": self.var_x1,
            "var_x2": self.var_x2,
            "product": self.product,
            "bound": self.bound,
            "satisfies_bound": self.satisfies_bound,
            "beta_used": self.beta_used,
            "T_used": self.T_used,
        }
        out.update(self.details)
        return out

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=True)


def _check_beta_cap(params: SystemParams, spec: GridSpec, beta_cap: float | None):
    if beta_cap is not None and params.beta * spec.p_max**2 > beta_cap:
        raise ParameterError(
            f"beta p_max^2 = {params.beta * spec.p_max ** 2:.3g} exceeds the perturbative cap {beta_cap:g}"
        )


def evolve(
    initial: InitialState,
    params: SystemParams,
    spec: GridSpec = DEFAULT_GRID,
    method: str = "unitary",
    beta_cap: float | None = 1e-3,
    table: CoefficientTable | None = None,
) -> GridState:
    """Evolved state on the grid, by the factorized unitary or by kernel convolution."""
    _check_beta_cap(params, spec, beta_cap)
    if method == "unitary":
        return apply_factorized_unitary(initial.on_grid(spec), params)
    if method == "convolution":
        return evolve_convolution(initial, params, spec, table)
    raise ValueError(f"unknown evolution method {method!r}")


# -- kernel convolution path --------------------------------------------------------
def _nodes(packet: GaussianPacket, fmax: float, span: float = 10.0):
    """Uniform trapezoid nodes covering ``center +- span*width`` fine enough for ``fmax``."""
    s = packet.width
    # Fourier content of Gaussian x chirp sits within fmax + 8/s of the origin
    h = min(2 * np.pi / (fmax + abs(packet.momentum) + 16.0 / s), s / 2)
    n = int(np.ceil(span * s / h))
    x = packet.center + h * np.arange(-n, n + 1)
    return x, h


def _axis_integrals(M, a: int, c: int, Qa, Q3, nodes, weights, phi, powers):
    """``sum_q w phi(q) (Qa - q)^i exp(i S_a)`` for i in ``powers``, shape (len(Qa), len(Q3), len(q3))."""
    qa, q3 = nodes[a], nodes[2]
    Qa_col = Qa[:, None]
    E = np.exp(1j * (M[a, a] * Qa_col**2 + 2 * M[a, c] * Qa_col * qa[None, :] + M[c, c] * qa[None, :] ** 2))
    sb = M[c, 2] * Q3[:, None] + M[c, 5] * q3[None, :]  # (nQ3, nq3)
    sa = M[a, 2] * Q3[:, None] + M[a, 5] * q3[None, :]
    R = (weights[a] * phi)[:, None, None] * np.exp(2j * qa[:, None, None] * sb[None])
    R = R.reshape(len(qa), -1)
    outer = np.exp(2j * Qa[:, None, None] * sa[None])
    out = {}
    for i in powers:
        Ei = E * (Qa_col - qa[None, :]) ** i if i else E
        out[i] = (Ei @ R).reshape(len(Qa), *sb.shape) * outer
    return out


def evolve_convolution(
    initial: InitialState,
    params: SystemParams,
    spec: GridSpec = DEFAULT_GRID,
    table: CoefficientTable | None = None,
    chunk: int = 8,
) -> GridState:
    """``Psi(Q) = int d^3q K(Q, q) psi(q)`` with the closed-form kernel, sampled on the position grid.

    The action has no Q1/q1 - Q2/q2 cross terms, so for product states the
    q1 and q2 integrals reduce to matrix products for each (Q3, q3) pair.
    """
    if initial.kind != "product":
        raise NotImplementedError("the convolution path separates only product states")
    M = action_matrix(params)
    if np.abs(M[np.ix_([0, 3], [1, 4])]).max() > 1e-13 * np.abs(M).max():
        raise AssertionError("action couples the first and second coordinates")
    use_beta = params.beta > 0
    if use_beta:
        table = derive_coefficients(params) if table is None else table
        scale = params.beta / normalization(params)
    Q = spec.positions()
    Qmax = np.abs(Q).max()
    nodes, weights, phis = [], [], []
    for ax, pk in enumerate(initial.packets):
        c = ax + 3
        reach = abs(pk.center) + 10 * pk.width
        fmax = 2 * (abs(M[c, c]) * reach + sum(abs(M[c, j]) * Qmax for j in range(3)) + sum(abs(M[c, j]) * reach for j in (3, 4, 5) if j != c))
        x, h = _nodes(pk, fmax)
        nodes.append(x)
        weights.append(np.full_like(x, h))
        d = x - pk.center
        phis.append((2 * np.pi * pk.width**2) ** -0.25 * np.exp(-(d**2) / (4 * pk.width**2) + 1j * pk.momentum * d))

    powers = range(5) if use_beta else range(1)
    pref = ak_prefactor(params)
    q3 = nodes[2]
    out = np.empty((spec.n,) * 3, dtype=complex)
    for start in range(0, spec.n, chunk):
        Q3 = Q[start : start + chunk]
        I1 = _axis_integrals(M, 0, 3, Q, Q3, nodes, weights, phis[0], powers)
        I2 = _axis_integrals(M, 1, 4, Q, Q3, nodes, weights, phis[1], powers)
        Qc, qc = Q3[:, None], q3[None, :]
        s3 = M[2, 2] * Qc**2 + 2 * M[2, 5] * Qc * qc + M[5, 5] * qc**2
        w3 = weights[2] * phis[2] * np.exp(1j * s3)  # (nQ3, nq3)
        acc = np.zeros((len(Q3), spec.n, spec.n), dtype=complex)
        for i in powers:
            for j in powers:
                if i + j > 4:
                    continue
                W = np.zeros_like(w3) if (i or j) else np.ones_like(w3)
                if use_beta:
                    zm = Qc - qc
                    for k in range(5 - i - j):
                        coeffs = table.entries.get((i, j, k))
                        if coeffs is None or not np.any(coeffs):
                            continue
                        W = W + scale * np.polynomial.polynomial.polyval(Q3, coeffs)[:, None] * zm**k
                if not np.any(W):
                    continue
                A = np.transpose(I1[i], (1, 0, 2)) * (w3 * W)[:, None, :]  # (nQ3, nQ1, nq3)
                B = np.transpose(I2[j], (1, 2, 0))  # (nQ3, nq3, nQ2)
                acc += A @ B
        out[:, :, start : start + chunk] = np.transpose(acc, (1, 2, 0))
    psi = pref * out * spec.dq**1.5
    return GridState.from_position(spec, psi)


# -- observables ----------------------------------------------------------------------
def variance(state: GridState, axis: int, tol: float = 1e-10) -> float:
    """``<x_i^2> - <x_i>^2`` from position-space grid sums (axis 1, 2 or 3)."""
    if axis not in (1, 2, 3):
        raise ValueError("axis must be 1, 2 or 3")
    if abs(state.norm - 1.0) > tol:
        raise NormalizationError(f"state norm {state.norm!r} differs from 1")
    dens = np.abs(state.position_amplitudes()) ** 2
    others = tuple(i for i in range(3) if i != axis - 1)
    marginal = dens.sum(axis=others)
    x = state.spec.positions()
    mean = float(np.dot(marginal, x))
    return float(np.dot(marginal, (x - mean) ** 2))


def _require_measurement_time(params: SystemParams):
    if not params.kappa > 0:
        raise ParameterError("the joint measurement needs kappa > 0")
    if not np.isclose(params.T * params.kappa, 1.0, rtol=1e-12, atol=0):
        raise ParameterError(f"ak_product requires T = 1/kappa, got T = {params.T}, kappa = {params.kappa}")


def ak_product(
    initial: InitialState,
    params: SystemParams,
    spec: GridSpec = DEFAULT_GRID,
    cross_check: bool = False,
    beta_cap: float | None = 1e-3,
) -> UncertaintyReport:
    """Pointer variances at ``T = 1/kappa`` and the product ``dx1 dx2``."""
    _require_measurement_time(params)
    state = evolve(initial, params, spec, beta_cap=beta_cap)
    v1, v2 = variance(state, 1), variance(state, 2)
    details = {"norm_deviation": abs(state.norm - 1.0), "grid": spec.as_dict()}
    if cross_check:
        other = evolve(initial, params, spec, method="convolution", beta_cap=beta_cap)
        c1, c2 = variance(other.normalized(), 1), variance(other.normalized(), 2)
        cp = float(np.sqrt(c1 * c2))
        details.update(
            convolution_product=cp,
            convolution_norm=other.norm,
            product_relative_difference=float(abs(cp - np.sqrt(v1 * v2)) / np.sqrt(v1 * v2)),
        )
    return UncertaintyReport(v1, v2, float(np.sqrt(v1 * v2)), 1.0, params.beta, params.T, details)


def beta_sweep(
    initial: InitialState,
    params: SystemParams,
    betas=(0.0, 1e-6, 1e-5),
    spec: GridSpec = DEFAULT_GRID,
    beta_cap: float | None = 1e-3,
) -> list[UncertaintyReport]:
    return [ak_product(initial, params.replace(beta=b), spec, beta_cap=beta_cap) for b in betas]


def sweep_slopes(reports: list[UncertaintyReport]) -> list[float]:
    """Finite-difference ``d(product)/d beta`` of each nonzero beta against the first report."""
    base = reports[0]
    return [(r.product - base.product) / (r.beta_used - base.beta_used) for r in reports[1:]]


def sweep_csv(reports: list[UncertaintyReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["beta", "var_x1", "var_x2", "product"])
    for r in reports:
        w.writerow([repr(float(r.beta_used)), repr(r.var_x1), repr(r.var_x2), repr(r.product)])
    return buf.getvalue()
