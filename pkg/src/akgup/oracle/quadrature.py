"""Brute-force quadrature references for the Gaussian integrals and the kernel.

Nothing here calls the closed-form Gaussian formulas: regulated forms are
integrated on a whitened tensor Gauss-Hermite mesh, and the oscillatory kernel
integral is damped by ``exp(-eps |p|^2)``, integrated numerically for each
eps and Richardson-extrapolated to ``eps -> 0``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..coefficients import bracket_terms
from ..gaussian import GaussianQuadraticForm
from ..params import SystemParams
from ..polynomial import Poly
from ..propagator import PropagatorPoint

__all__ = [
    "QuadratureResult",
    "triple_quadrature",
    "triple_quadrature_many",
    "damped_line_moments",
    "richardson_zero",
    "quad_kernel",
    "DEFAULT_EPS",
    "REFINE_EPS",
]

DEFAULT_EPS = (1e-2, 1e-3, 1e-4)
# appended only when the default sequence misses the tolerance
REFINE_EPS = (1e-5, 1e-6, 1e-7)


@dataclass
class QuadratureResult:
    value: complex
    error: float
    flagged: bool = False
    details: dict = field(default_factory=dict)


def _whitened(form: GaussianQuadraticForm):
    """Write ``p = c + W v`` so the exponent becomes ``k0 - |v|^2 + i(g.v - v^T S v)``.

    ``c`` maximizes the modulus of the integrand; only the real part of the
    form enters the change of variables.
    """
    M = form.matrix()
    F = form.sources
    R, Si = M.real, M.imag
    lam, V = np.linalg.eigh(R)
    if lam.min() <= 0:
        raise ValueError("triple_quadrature needs a regulated form (Re M positive definite)")
    c = np.linalg.solve(R, F.real) / 2.0
    W = V / np.sqrt(lam)[None, :]
    S = W.T @ Si @ W
    g = W.T @ (F.imag - 2 * Si @ c)
    k0 = c @ R @ c + 1j * (F.imag @ c - c @ Si @ c)
    return c, W, S, g, k0, abs(np.linalg.det(W))


def _tensor_integral(form: GaussianQuadraticForm, exps_list, nodes: int) -> np.ndarray:
    """Tensor Gauss-Hermite sum in whitened coordinates (the weight absorbs e^{-|v|^2})."""
    c, W, S, g, k0, jac = _whitened(form)
    v, w = np.polynomial.hermite.hermgauss(nodes)
    v2, v3 = v[None, :, None], v[None, None, :]
    w23 = w[None, :, None] * w[None, None, :]
    totals = np.zeros(len(exps_list), dtype=complex)
    block = max(1, 2_000_000 // nodes**2)
    for a in range(0, nodes, block):
        v1 = v[a : a + block, None, None]
        vs = (v1, v2, v3)
        phase = sum(g[i] * vs[i] for i in range(3)) - sum(
            (1 if i == j else 2) * S[i, j] * vs[i] * vs[j] for i in range(3) for j in range(i, 3)
        )
        f = np.exp(1j * phase) * (w[a : a + block, None, None] * w23)
        # cached powers p_i^k for every k requested on that axis
        pw = [{0: None} for _ in range(3)]
        for i in range(3):
            top = max(e[i] for e in exps_list)
            if top:
                base = c[i] + W[i, 0] * v1 + W[i, 1] * v2 + W[i, 2] * v3
                cur = base
                for k in range(1, top + 1):
                    pw[i][k] = cur
                    cur = cur * base
        for n, exps in enumerate(exps_list):
            h = f
            for i, e in enumerate(exps):
                if e:
                    h = h * pw[i][e]
            totals[n] += np.sum(h)
    return totals * jac * np.exp(k0)


def _chirp_nodes(form: GaussianQuadraticForm) -> int:
    _, _, S, g, _, _ = _whitened(form)
    # Hermite nodes needed grow with the chirp rate and the linear frequency
    n = 32 + 16 * np.linalg.norm(S, 2) + 4 * np.linalg.norm(g)
    return 8 * int(np.ceil(n / 8))


def triple_quadrature_many(
    form: GaussianQuadraticForm, exps_list, rtol: float = 1e-12, max_nodes: int = 256
) -> list[QuadratureResult]:
    """``int p^exps exp(-p^T M p + F.p) d^3p`` for each exponent triple, regulated forms only.

    Tensor Gauss-Hermite in whitened coordinates; the node count starts from
    the chirp bandwidth and grows by half until two successive meshes agree
    on every requested moment.
    """
    exps_list = [tuple(e) for e in exps_list]
    nodes = min(_chirp_nodes(form), max_nodes)
    prev = _tensor_integral(form, exps_list, nodes)
    while True:
        nxt = 8 * int(np.ceil(nodes * 1.5 / 8))
        if nxt > max_nodes:
            return [QuadratureResult(complex(v), float("nan"), True, {"nodes": nodes}) for v in prev]
        cur = _tensor_integral(form, exps_list, nxt)
        errs = np.abs(cur - prev)
        nodes = nxt
        if np.all(errs <= rtol * np.abs(cur)):
            return [QuadratureResult(complex(v), float(e), False, {"nodes": nodes}) for v, e in zip(cur, errs)]
        prev = cur


def triple_quadrature(
    form: GaussianQuadraticForm, exps=(0, 0, 0), rtol: float = 1e-12, max_nodes: int = 256
) -> QuadratureResult:
    return triple_quadrature_many(form, [exps], rtol, max_nodes)[0]


def damped_line_moments(lam: float, g: float, eps: float, max_power: int = 4):
    """``int u^n exp(-(eps + i lam) u^2 + i g u) du`` for n = 0..max_power.

    The real line is deformed (inside the sector where the damped integrand
    decays) onto the steepest-descent line ``u = u* + e^{i phi} s`` through the
    saddle ``u* = i g / (2a)``, ``a = eps + i lam``, ``phi = -arg(a)/2``.  There
    the integrand is ``exp(-g^2/4a) exp(-|a| s^2) (u* + e^{i phi} s)^n``, a
    non-oscillating Gaussian whose trapezoid sum converges geometrically.  On
    the real axis the moments lose most digits to cancellation once eps is small.
    """
    if eps < 0:
        raise ValueError("damping must be non-negative")
    a = complex(eps, lam)
    if a == 0:
        raise ValueError("eps and lam cannot both vanish")
    rot = np.exp(-0.5j * np.angle(a))
    alpha = abs(a)
    saddle = 1j * g / (2 * a)
    h = 0.25 / np.sqrt(alpha)
    n = int(np.ceil(np.sqrt((40.0 + 2.0 * max_power) / alpha) / h))
    s = h * np.arange(-n, n + 1)
    u = saddle + rot * s
    f = np.exp(-alpha * s * s) * (rot * h * np.exp(-g * g / (4 * a)))
    out = np.empty(max_power + 1, dtype=complex)
    pw = np.ones_like(u)
    for j in range(max_power + 1):
        out[j] = np.sum(f * pw)
        pw = pw * u
    return out


def richardson_zero(eps, values):
    """Polynomial extrapolation of ``values(eps)`` to ``eps = 0`` (Neville).

    Returns ``(extrapolated, error_estimate)`` where the estimate compares the
    full extrapolation with the one that drops the largest ``eps``.
    """
    eps = np.asarray(eps, dtype=float)
    values = np.asarray(values, dtype=complex)

    def neville(xs, ys):
        p = list(ys)
        n = len(xs)
        for m in range(1, n):
            for i in range(n - m):
                p[i] = ((0 - xs[i + m]) * p[i] + (xs[i] - 0) * p[i + 1]) / (xs[i] - xs[i + m])
        return p[0]

    full = neville(eps, values)
    order = np.argsort(eps)
    reduced = neville(eps[order][:-1], values[order][:-1]) if len(eps) > 1 else full
    return complex(full), float(abs(full - reduced))


def _bracket_poly(params: SystemParams, Q3: float) -> Poly:
    out = Poly(3)
    for exps, c0, cq in bracket_terms(params):
        out = out + Poly(3, {exps: c0 + cq * Q3})
    return out


def _real_symmetric_part(params: SystemParams):
    m1, m2, m3 = params.masses
    k, T = params.kappa, params.T
    # exponent -i p^T R p; entries are the imaginary parts of A..D3 (signs as in the form matrix)
    A = T / (2 * m1) + k**2 * T**3 / (6 * m3)
    B = T / (2 * m2)
    C = T / (2 * m3)
    D1 = k**2 * T**2 / 4
    D2 = k * T**2 / (4 * m3)
    D3 = -k * T / 2
    return np.array([[A, -D1, -D2], [-D1, B, -D3], [-D2, -D3, C]])


def quad_kernel(
    params: SystemParams,
    point: PropagatorPoint,
    eps_list=DEFAULT_EPS,
    rtol: float = 1e-6,
    refine=REFINE_EPS,
) -> QuadratureResult:
    """Numerical value of the O(beta) kernel from its momentum-space triple integral.

    Rotating to the eigenbasis of the (real) phase matrix leaves the damping
    ``eps |p|^2`` unchanged and makes the Gaussian factor separable, so each
    monomial of the (rotated) beta bracket becomes a product of damped
    one-dimensional moments computed by quadrature.  Each eps value gives a
    convergent integral; the sequence is Richardson-extrapolated to 0.

    While the extrapolation error estimate exceeds ``rtol / 10`` the sequence
    is extended with the values in ``refine`` (one at a time); if the final
    estimate still exceeds ``rtol`` the result is returned with ``flagged=True``.
    """
    eps_seq = list(eps_list)
    if any(e <= 0 for e in eps_seq) or any(b >= a for a, b in zip(eps_seq, eps_seq[1:])):
        raise ValueError("eps_list must be strictly descending positive dampings")
    R = _real_symmetric_part(params)
    lam, O = np.linalg.eigh(R)
    z1, z2, z3 = point.z
    Q3 = point.Q[2]
    f = np.array([z1 - params.kappa * params.T * Q3, z2, z3])
    g = O.T @ f
    # p = O u
    sub = [Poly.linear(list(O[i])) for i in range(3)]
    bracket_u = _bracket_poly(params, Q3).compose(sub) if params.beta else Poly(3)

    base_vals, corr_vals = [], []

    def sample(eps):
        mom = [damped_line_moments(lam[i], g[i], eps) for i in range(3)]
        base = mom[0][0] * mom[1][0] * mom[2][0]
        corr = sum(c * mom[0][e[0]] * mom[1][e[1]] * mom[2][e[2]] for e, c in bracket_u.terms.items())
        base_vals.append(base / (2 * np.pi) ** 3)
        corr_vals.append(corr / (2 * np.pi) ** 3)

    def extrapolate():
        base, base_err = richardson_zero(eps_seq, base_vals)
        corr, corr_err = richardson_zero(eps_seq, corr_vals)
        return base, base_err, corr, corr_err

    for eps in eps_seq:
        sample(eps)
    base, base_err, corr, corr_err = extrapolate()
    extra = [e for e in refine if e not in eps_seq]
    # refine past rtol for margin; samples are cheap once the moments are exact
    while base_err + params.beta * corr_err > 0.1 * rtol * abs(base + params.beta * corr) and extra:
        eps_seq.append(extra.pop(0))
        sample(eps_seq[-1])
        base, base_err, corr, corr_err = extrapolate()

    value = base + params.beta * corr
    err = base_err + params.beta * corr_err
    return QuadratureResult(
        value,
        err,
        err > rtol * abs(value),
        details={
            "base": base,
            "beta_coefficient": corr,
            "base_error": base_err,
            "beta_coefficient_error": corr_err,
            "eps": eps_seq,
            "eigenvalues": lam.tolist(),
        },
    )
