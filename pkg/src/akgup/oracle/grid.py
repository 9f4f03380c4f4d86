"""Three-dimensional momentum-grid evolution.

Discrete convention
-------------------
Axis momenta are ``p_k = (k - n/2) dp`` with ``dp = 2 p_max / n``; positions
are ``q_j = (j - n/2) dq`` with ``dq = 2 pi / (n dp)``, so ``L = n dq``.
Amplitudes are stored normalized as ``psi(p_k) dp^{3/2}`` and the unitary
transform to position space is

    psi(q_j) dq^{1/2} = n^{-1/2} sum_k exp(+i q_j p_k) psi(p_k) dp^{1/2}

per axis, the discrete image of ``<q|p> = e^{iqp} / sqrt(2 pi)``.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np
from scipy import fft as sfft

from ..factorization import FactorSequence, factor_exponents, hamiltonian
from ..operators import OperatorPolynomial
from ..params import SystemParams

__all__ = [
    "GridSpec",
    "GridState",
    "GridTooSmallError",
    "to_position",
    "to_momentum",
    "boundary_amplitude",
    "apply_factorized_unitary",
    "trotter_reference",
    "trotter_extrapolated",
    "trotter_convergence",
    "TrotterReport",
    "compare_states",
    "save_state",
    "load_state",
]


class GridTooSmallError(RuntimeError):
    def __init__(self, message: str, suggestion: "GridSpec | None" = None):
        super().__init__(message if suggestion is None else f"{message}; try {suggestion}")
        self.suggestion = suggestion


@dataclass(frozen=True)
class GridSpec:
    n: int = 64
    p_max: float = 8.0

    def __post_init__(self):
        if self.n < 4 or self.n & (self.n - 1):
            raise ValueError(f"n must be a power of two >= 4, got {self.n}")
        if not self.p_max > 0:
            raise ValueError("p_max must be positive")

    axes = 3

    @property
    def dp(self) -> float:
        return 2.0 * self.p_max / self.n

    @property
    def length(self) -> float:
        return 2.0 * np.pi / self.dp

    @property
    def dq(self) -> float:
        return self.length / self.n

    def momenta(self) -> np.ndarray:
        return (np.arange(self.n) - self.n // 2) * self.dp

    def positions(self) -> np.ndarray:
        return (np.arange(self.n) - self.n // 2) * self.dq

    def mesh(self, which: str = "p"):
        """Broadcastable per-axis coordinate arrays of shapes (n,1,1), (1,n,1), (1,1,n)."""
        x = self.momenta() if which == "p" else self.positions()
        return x[:, None, None], x[None, :, None], x[None, None, :]

    def as_dict(self) -> dict:
        return {"n": self.n, "p_max": self.p_max, "axes": 3, "dp": self.dp, "L": self.length}

    def enlarged(self) -> "GridSpec":
        return GridSpec(self.n * 2, self.p_max * 2 ** 0.5)


@dataclass
class GridState:
    """Normalized discrete amplitudes in the (p1, p2, p3) representation."""

    spec: GridSpec
    amplitudes: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.amplitudes, dtype=complex)
        if a.shape != (self.spec.n,) * 3:
            raise ValueError(f"amplitudes shape {a.shape} does not match grid n={self.spec.n}")
        self.amplitudes = a

    @cached_property
    def norm(self) -> float:
        n = float(np.sqrt(np.sum(np.abs(self.amplitudes.ravel()) ** 2)))
        if not np.isfinite(n):
            raise FloatingPointError("state norm is not finite")
        return n

    def position_amplitudes(self) -> np.ndarray:
        return to_position(self.amplitudes)

    @classmethod
    def from_position(cls, spec: GridSpec, amplitudes: np.ndarray) -> "GridState":
        return cls(spec, to_momentum(np.asarray(amplitudes, dtype=complex)))

    def normalized(self) -> "GridState":
        return GridState(self.spec, self.amplitudes / self.norm)

    def copy(self) -> "GridState":
        return GridState(self.spec, self.amplitudes.copy())


def to_position(a: np.ndarray, axes=(0, 1, 2)) -> np.ndarray:
    a = np.fft.ifftshift(a, axes=axes)
    a = sfft.ifftn(a, axes=axes, norm="ortho", workers=-1)
    return np.fft.fftshift(a, axes=axes)


def to_momentum(a: np.ndarray, axes=(0, 1, 2)) -> np.ndarray:
    a = np.fft.ifftshift(a, axes=axes)
    a = sfft.fftn(a, axes=axes, norm="ortho", workers=-1)
    return np.fft.fftshift(a, axes=axes)


def boundary_amplitude(a: np.ndarray) -> float:
    """Largest |amplitude| on the outer planes, relative to the peak."""
    peak = np.abs(a).max()
    if peak == 0:
        return 0.0
    edges = [np.abs(a.take(i, axis=ax)).max() for ax in range(3) for i in (0, -1)]
    return float(max(edges) / peak)


def _check_leak(a: np.ndarray, spec: GridSpec, tol: float, where: str):
    leak = boundary_amplitude(a)
    if leak > tol:
        raise GridTooSmallError(f"boundary amplitude {leak:.2e} > {tol:.0e} {where}", spec.enlarged())


# -- numeric evaluation of operator exponents -------------------------------------
def _scalar(key, coeff, params: SystemParams) -> complex:
    m1, m2, m3 = params.masses
    vals = (params.beta, params.T, params.kappa, 1 / m1, 1 / m2, 1 / m3)
    c = complex(coeff)
    for v, e in zip(vals, key[:6]):
        if e:
            c *= v**e
    return c


def _split_by_q(x: OperatorPolynomial, params: SystemParams, spec: GridSpec) -> dict:
    """``{q-exponents: phase array over the p-mesh}`` for a normal-ordered exponent."""
    P = spec.mesh("p")
    out: dict[tuple, np.ndarray] = {}
    for key, coeff in x.terms.items():
        c = _scalar(key, coeff, params)
        if c == 0:
            continue
        val = c
        for ax, e in enumerate(key[9:12]):
            if e:
                val = val * P[ax] ** e
        qk = key[6:9]
        out[qk] = out.get(qk, 0) + val
    return out


def _momentum_phase(parts: dict, spec: GridSpec) -> np.ndarray:
    if set(parts) - {(0, 0, 0)}:
        raise ValueError("exponent is not diagonal in momentum")
    return np.broadcast_to(parts.get((0, 0, 0), 0j), (spec.n,) * 3)


def _apply_q3_factor(a: np.ndarray, parts: dict, spec: GridSpec) -> np.ndarray:
    """``exp(c0(p) + q3 c1(p1, p2))`` applied in the (p1, p2, q3) representation."""
    if set(parts) - {(0, 0, 0), (0, 0, 1)}:
        raise ValueError("only exponents at most linear in q3 are supported")
    c1 = np.asarray(parts.get((0, 0, 1), 0j))
    if c1.ndim and c1.shape[2] != 1:
        raise ValueError("q3 coefficient may not depend on p3")
    q3 = spec.positions()[None, None, :]
    mixed = to_position(a, axes=(2,))
    mixed *= np.exp(c1 * q3)
    out = to_momentum(mixed, axes=(2,))
    if (0, 0, 0) in parts:
        out *= np.exp(parts[(0, 0, 0)])
    return out


def apply_factor(a: np.ndarray, exponent: OperatorPolynomial, params: SystemParams, spec: GridSpec) -> np.ndarray:
    parts = _split_by_q(exponent, params, spec)
    if not parts:
        return a
    if set(parts) == {(0, 0, 0)}:
        return a * np.exp(_momentum_phase(parts, spec))
    return _apply_q3_factor(a, parts, spec)


def apply_factorized_unitary(
    state: GridState,
    params: SystemParams,
    sequence: FactorSequence | None = None,
    leak_tol: float = 1e-10,
    trace: list | None = None,
) -> GridState:
    """Apply the factorized evolution operator, rightmost factor first.

    ``trace`` (a list) receives ``(label, norm_before, norm_after)`` for every
    factor.  Raises GridTooSmallError when the state touches the grid edge
    in either representation.
    """
    seq = factor_exponents() if sequence is None else sequence
    spec = state.spec
    a = state.amplitudes
    _check_leak(a, spec, leak_tol, "in the initial state")
    for label, x in reversed(list(seq)):
        before = np.sqrt(np.sum(np.abs(a.ravel()) ** 2)) if trace is not None else None
        a = apply_factor(a, x, params, spec)
        if trace is not None:
            trace.append((label, float(before), float(np.sqrt(np.sum(np.abs(a.ravel()) ** 2)))))
        _check_leak(a, spec, leak_tol, f"after factor {label}")
    _check_leak(to_position(a), spec, leak_tol, "in position space after evolution")
    return GridState(spec, a)


# -- Trotter reference -------------------------------------------------------------
def _hamiltonian_parts(params: SystemParams, spec: GridSpec):
    parts = _split_by_q(hamiltonian(), params, spec)
    h_mom = np.real_if_close(np.asarray(parts.pop((0, 0, 0), 0.0)))
    coupling = {k: v for k, v in parts.items()}
    if set(coupling) - {(0, 0, 1)}:
        raise ValueError("Hamiltonian coupling is expected to be linear in q3")
    return h_mom, coupling


def trotter_reference(state: GridState, params: SystemParams, steps: int) -> GridState:
    """Second-order split ``[e^{-i H_p dt/2} e^{-i H_c dt} e^{-i H_p dt/2}]^steps``.

    ``H_p`` collects the momentum-diagonal terms of the Hamiltonian and
    ``H_c = q3 g(p1)`` the coupling; both are applied exactly.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    spec = state.spec
    dt = params.T / steps
    h_mom, coupling = _hamiltonian_parts(params, spec)
    # work in FFT-native index order so each step is a bare fft/ifft pair along axis 2
    shift = lambda x: np.fft.ifftshift(np.broadcast_to(x, (spec.n,) * 3), axes=(0, 1, 2))  # noqa: E731
    half = shift(np.exp(-0.5j * dt * h_mom))
    full = half * half
    kick = None
    if coupling:
        q3 = spec.positions()[None, None, :]
        kick = shift(np.exp(-1j * dt * coupling[(0, 0, 1)] * q3))
    a = np.fft.ifftshift(state.amplitudes, axes=(0, 1, 2)) * half
    for s in range(steps):
        if kick is not None:
            a = sfft.ifft(a, axis=2, norm="ortho", workers=-1)
            a *= kick
            a = sfft.fft(a, axis=2, norm="ortho", workers=-1)
        a *= half if s == steps - 1 else full
    return GridState(spec, np.fft.fftshift(a, axes=(0, 1, 2)))


def trotter_extrapolated(state: GridState, params: SystemParams, steps: int) -> GridState:
    """Richardson combination ``(4 U_{2N} - U_N) / 3`` removing the steps^-2 term."""
    a = trotter_reference(state, params, steps).amplitudes
    b = trotter_reference(state, params, 2 * steps).amplitudes
    return GridState(state.spec, (4.0 * b - a) / 3.0)


def _l2_rel(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.sqrt(np.sum(np.abs((a - b).ravel()) ** 2) / np.sum(np.abs(b.ravel()) ** 2)))


@dataclass
class TrotterReport:
    steps: list[int]
    errors: list[float]
    order: float
    monotone: bool
    details: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"steps": self.steps, "errors": self.errors, "order": self.order, "monotone": self.monotone}


def trotter_convergence(
    state: GridState, params: SystemParams, steps_list=(100, 200, 400, 800), reference: GridState | None = None
) -> TrotterReport:
    """Errors of the split evolution against ``reference`` (default: factorized unitary)."""
    ref = apply_factorized_unitary(state, params) if reference is None else reference
    errs = [_l2_rel(trotter_reference(state, params, s).amplitudes, ref.amplitudes) for s in steps_list]
    order = -float(np.polyfit(np.log(steps_list), np.log(errs), 1)[0])
    monotone = all(b < a for a, b in zip(errs, errs[1:]))
    if not monotone:
        warnings.warn(f"Trotter errors are not monotone in steps: {errs}")
    return TrotterReport(list(steps_list), errs, order, monotone)


# -- comparison and I/O ------------------------------------------------------------
def compare_states(a: GridState, b: GridState) -> dict:
    if a.spec != b.spec:
        raise ValueError("states live on different grids")
    diff = a.amplitudes - b.amplitudes
    return {
        "l2_relative": _l2_rel(a.amplitudes, b.amplitudes),
        "max_abs": float(np.abs(diff).max()),
        "norm_a": a.norm,
        "norm_b": b.norm,
        "grid": a.spec.as_dict(),
    }


def save_state(state: GridState, path) -> tuple[Path, Path]:
    """Write ``<path>.bin`` (C-order little-endian complex128) and ``<path>.json``."""
    path = Path(path)
    raw = path.with_suffix(".bin")
    side = path.with_suffix(".json")
    raw.write_bytes(np.ascontiguousarray(state.amplitudes, dtype="<c16").tobytes(order="C"))
    meta = dict(state.spec.as_dict(), dtype="complex128", byteorder="little", layout="row-major", representation="momentum")
    side.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return raw, side


def load_state(path) -> GridState:
    path = Path(path)
    meta = json.loads(path.with_suffix(".json").read_text())
    spec = GridSpec(int(meta["n"]), float(meta["p_max"]))
    data = np.frombuffer(path.with_suffix(".bin").read_bytes(), dtype="<c16")
    if data.size != spec.n**3:
        raise ValueError(f"binary holds {data.size} amplitudes, sidecar expects {spec.n ** 3}")
    return GridState(spec, data.reshape((spec.n,) * 3).astype(complex))
