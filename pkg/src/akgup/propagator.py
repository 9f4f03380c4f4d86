"""Closed-form kernels: ordinary AK, O(beta) GUP-corrected AK, and free GUP particles."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .coefficients import CoefficientTable, normalization
from .gaussian import GaussianQuadraticForm, gaussian_triple, moment_polynomials
from .params import ParameterError, SystemParams

__all__ = [
    "PropagatorPoint",
    "PropagatorValue",
    "SingularKernelError",
    "TableMismatchError",
    "ak_prefactor",
    "classical_action",
    "action_matrix",
    "k_ak",
    "k_ak_array",
    "k_gup",
    "k_gup_array",
    "k_free_gup",
    "convolve_gaussian",
    "t_to_zero_check",
    "TZeroReport",
]


class SingularKernelError(ArithmeticError):
    pass


class TableMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class PropagatorPoint:
    Q: tuple[float, float, float]
    q: tuple[float, float, float]

    @property
    def z(self) -> tuple[float, float, float]:
        return tuple(a - b for a, b in zip(self.Q, self.q))

    @property
    def z_plus(self) -> float:
        return self.Q[2] + self.q[2]

    @property
    def z_minus(self) -> float:
        return self.Q[2] - self.q[2]


@dataclass(frozen=True)
class PropagatorValue:
    base: complex
    correction: complex
    total: complex

    def as_dict(self) -> dict:
        return {
            "base": [self.base.real, self.base.imag],
            "correction": [self.correction.real, self.correction.imag],
            "total": [self.total.real, self.total.imag],
        }


def _check(params: SystemParams):
    if params.b == 0:
        raise SingularKernelError("b = m2 m3 kappa^2 - 1 vanishes; the AK kernel is singular")


def ak_prefactor(params: SystemParams) -> complex:
    """``sqrt(3 m1 m2 m3^2 / (2 pi^3 i b T^3 a(T)))`` on the branch that tends to +delta as T -> 0.

    The radicand's phase is fixed by sign(b), and a(T) > 0 means no caustic
    is ever crossed.  For b > 0 this is the principal root; for b < 0 the
    continuation from the damped integral gives minus the principal root.
    """
    _check(params)
    m1, m2, m3 = params.masses
    T, b, a = params.T, params.b, params.a()
    root = np.sqrt(3 * m1 * m2 * m3**2 / (2 * np.pi**3 * 1j * b * T**3 * a) + 0j)
    return complex(root if b > 0 else -root)


def classical_action(params: SystemParams, Q, q):
    m1, m2, m3 = params.masses
    k, T, b, a = params.kappa, params.T, params.b, params.a()
    z1 = Q[0] - q[0]
    z2 = Q[1] - q[1]
    zm = Q[2] - q[2]
    zp = Q[2] + q[2]
    num = (
        12 * m1 * m3 * b * z1**2
        - m2 * a * z2**2
        - m3 * a * zm**2
        + 3 * m1 * m3 * k**2 * T**2 * b * zp**2
        - 12 * m1 * m3 * k * T * b * z1 * zp
        + 2 * m2 * m3 * k * a * z2 * zm
    )
    return num / (2 * a * b * T)


def action_matrix(params: SystemParams) -> np.ndarray:
    """Symmetric 6x6 ``M`` with ``S_cl = x^T M x``, ``x = (Q1, Q2, Q3, q1, q2, q3)``."""
    _check(params)
    basis = np.eye(6)
    S = lambda x: classical_action(params, x[:3], x[3:])  # noqa: E731
    M = np.zeros((6, 6))
    for i in range(6):
        M[i, i] = S(basis[i])
    for i in range(6):
        for j in range(i + 1, 6):
            M[i, j] = M[j, i] = 0.5 * (S(basis[i] + basis[j]) - M[i, i] - M[j, j])
    return M


def k_ak_array(params: SystemParams, Q, q):
    if params.T <= 0:
        raise ParameterError("T must be positive")
    return ak_prefactor(params) * np.exp(1j * classical_action(params, Q, q))


def k_ak(params: SystemParams, point: PropagatorPoint) -> complex:
    return complex(k_ak_array(params, point.Q, point.q))


def _check_table(params: SystemParams, table: CoefficientTable):
    a, b = params.as_dict(), table.params.as_dict()
    a.pop("beta")
    b.pop("beta")
    if any(not np.isclose(a[k], b[k], rtol=1e-14, atol=0) for k in a):
        raise TableMismatchError(f"coefficient table was derived at {table.params}, kernel requested at {params}")


def _correction(params, table, z1, z2, z3, Q3, reexponentiate):
    x = params.beta / normalization(params) * table.series(z1, z2, z3, Q3)
    return np.exp(x) if reexponentiate else 1.0 + x


def k_gup_array(params: SystemParams, Q, q, table: CoefficientTable, reexponentiate: bool = False):
    """Vectorized ``(base, correction)`` over broadcastable coordinate arrays."""
    _check_table(params, table)
    base = k_ak_array(params, Q, q)
    if params.beta == 0:
        return base, np.ones_like(base)
    corr = _correction(params, table, Q[0] - q[0], Q[1] - q[1], Q[2] - q[2], Q[2], reexponentiate)
    return base, corr


def k_gup(
    params: SystemParams, point: PropagatorPoint, table: CoefficientTable, reexponentiate: bool = False
) -> PropagatorValue:
    """``K_AK [1 + beta/(5 T^3 b^3 a^4) sum f_ijk z1^i z2^j z3^k]``."""
    base, corr = k_gup_array(params, point.Q, point.q, table, reexponentiate)
    base, corr = complex(base), complex(corr)
    return PropagatorValue(base, corr, base * corr)


def free_prefactor(params: SystemParams) -> complex:
    """Product of three one-particle factors ``sqrt(m_j / (2 pi i T))``."""
    return complex(np.prod([np.sqrt(m / (2j * np.pi * params.T)) for m in params.masses]))


def k_free_gup(params: SystemParams, point: PropagatorPoint, form: str = "bracket") -> complex:
    """Free-particle GUP kernel (kappa = 0 semantics, kappa ignored).

    ``form="bracket"`` keeps the whole O(beta) term as a factor;
    ``form="exponentiated"`` moves the z^4 terms into the phase.  The two agree
    to O(beta^2).
    """
    T, beta = params.T, params.beta
    z = point.z
    m = params.masses
    pref = free_prefactor(params)
    if form == "bracket":
        phase = sum(mj * zj**2 for mj, zj in zip(m, z)) / (2 * T)
        corr = 1 + beta * sum(3j * mj / T - 6 * mj**2 * zj**2 / T**2 - 1j * mj**3 * zj**4 / T**3 for mj, zj in zip(m, z))
    elif form == "exponentiated":
        phase = sum(mj * zj**2 * (1 - 2 * beta * (mj * zj / T) ** 2) for mj, zj in zip(m, z)) / (2 * T)
        corr = 1 + beta * sum(3j * mj / T - 6 * mj**2 * zj**2 / T**2 for mj, zj in zip(m, z))
    else:
        raise ValueError(f"unknown form {form!r}")
    return complex(pref * np.exp(1j * phase) * corr)


# -- Gaussian smoothing ---------------------------------------------------------
def convolve_gaussian(
    params: SystemParams,
    Q,
    sigma: float,
    center=(0.0, 0.0, 0.0),
    table: CoefficientTable | None = None,
) -> complex:
    """``int d^3q K(Q, q) exp(-|q - center|^2 / (4 sigma^2))`` evaluated in closed form.

    With a table the O(beta) GUP kernel is used, otherwise K_AK.  The
    integral is taken over ``z = Q - q`` so the series moments stay of the
    size of the kernel's spread; expanding in ``q`` instead loses most digits
    to cancellation at small T.
    """
    M = action_matrix(params)
    Q = np.asarray(Q, dtype=float)
    c = np.asarray(center, dtype=float)
    # q = Q - z:  S = Q^T (sum of all blocks) Q - 2 Q^T (M_Qq + M_qq) z + z^T M_qq z
    Mqq = M[3:, 3:]
    lin = -2.0 * (M[:3, 3:] + M[3:, 3:]).T @ Q
    s0 = Q @ (M[:3, :3] + M[:3, 3:] + M[3:, :3] + M[3:, 3:]) @ Q
    d = Q - c
    quad = -1j * Mqq + np.eye(3) / (4 * sigma**2)
    src = 1j * lin + d / (2 * sigma**2)
    const = 1j * s0 - (d @ d) / (4 * sigma**2)
    form = GaussianQuadraticForm.from_matrix(quad, src)
    base = ak_prefactor(params) * np.exp(const) * gaussian_triple(form)
    if table is None or params.beta == 0:
        return complex(base)
    _check_table(params, table)
    moments = moment_polynomials(form)
    avg = sum(table.value(idx, Q[2]) * moments[idx](*form.sources) for idx in table.entries)
    return complex(base * (1 + params.beta / normalization(params) * avg))


@dataclass
class TZeroReport:
    T_values: list[float]
    deviations: list[float]
    observed_order: float
    tolerance: float | None = None
    details: dict = field(default_factory=dict)

    @property
    def converged(self) -> bool:
        monotone = all(b < a for a, b in zip(self.deviations, self.deviations[1:]))
        if self.tolerance is not None:
            return monotone and self.deviations[-1] <= self.tolerance
        return monotone

    def as_dict(self) -> dict:
        return {
            "T": self.T_values,
            "deviation": self.deviations,
            "observed_order": self.observed_order,
            "converged": self.converged,
        }


def t_to_zero_check(
    params: SystemParams,
    sigma: float,
    table_factory=None,
    factors=(1e-2, 1e-3, 1e-4),
    grid=np.linspace(-2.0, 2.0, 5),
    tolerance: float | None = None,
) -> TZeroReport:
    """Smoothed kernel ``int K(Q, q, T) g_sigma(q) dq`` against ``g_sigma(Q)`` as T -> 0+.

    ``table_factory(params) -> CoefficientTable`` switches on the O(beta)
    correction; it is re-derived at every T since the table depends on T.
    """
    m_min = min(params.masses)
    Ts, devs = [], []
    pts = [np.array([x, y, w]) * sigma for x in grid for y in grid for w in grid]
    for f in factors:
        T = f * sigma**2 * m_min
        prm = params.replace(T=T)
        table = table_factory(prm) if (table_factory is not None and prm.beta > 0) else None
        worst = 0.0
        for Q in pts:
            g = np.exp(-(Q @ Q) / (4 * sigma**2))
            val = convolve_gaussian(prm, Q, sigma, table=table)
            worst = max(worst, abs(val - g))
        Ts.append(T)
        devs.append(worst)
    order = float(np.polyfit(np.log(Ts), np.log(devs), 1)[0])
    report = TZeroReport(Ts, devs, order, tolerance)
    if not report.converged:
        warnings.warn(f"T -> 0 sequence did not converge: deviations {devs}")
    return report
