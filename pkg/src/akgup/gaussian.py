"""Closed-form three-dimensional complex Gaussian integrals and their polynomial moments.

The integrand is ``exp(-A p1^2 - B p2^2 - C p3^2 + 2 D1 p1 p2 + 2 D2 p1 p3
+ 2 D3 p2 p3 + F . p)``.  Its integral is ``pi^(3/2) exp(beta~/(4 alpha~))
/ sqrt(alpha~)`` where ``alpha~`` is the determinant of the quadratic form
and ``beta~ = F^T adj(M) F``.  For purely oscillatory forms the value is
defined by analytic continuation from the damped region, which fixes the
branch of ``sqrt(alpha~)``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from .polynomial import Poly

__all__ = [
    "GaussianQuadraticForm",
    "DegenerateFormError",
    "FormDomainError",
    "UnsupportedDegreeError",
    "BranchInfo",
    "sqrt_alpha_tilde",
    "gaussian_triple",
    "moment_polynomials",
    "gaussian_moment",
    "gaussian_expectation",
    "MAX_MOMENT_DEGREE",
]

MAX_MOMENT_DEGREE = 4


class DegenerateFormError(ArithmeticError):
    """alpha~ vanishes: the stationary-phase prefactor diverges (caustic)."""


class FormDomainError(ValueError):
    """The quadratic form cannot be reached from a convergent one."""


class UnsupportedDegreeError(ValueError):
    pass


@dataclass(frozen=True)
class GaussianQuadraticForm:
    A: complex
    B: complex
    C: complex
    D1: complex = 0j
    D2: complex = 0j
    D3: complex = 0j
    F1: complex = 0j
    F2: complex = 0j
    F3: complex = 0j

    @property
    def alpha_tilde(self) -> complex:
        A, B, C, D1, D2, D3 = self.A, self.B, self.C, self.D1, self.D2, self.D3
        return A * B * C - 2 * D1 * D2 * D3 - A * D3**2 - B * D2**2 - C * D1**2

    def adjugate(self) -> np.ndarray:
        """Symmetric adjugate whose quadratic form in F is beta~."""
        A, B, C, D1, D2, D3 = self.A, self.B, self.C, self.D1, self.D2, self.D3
        return np.array(
            [
                [B * C - D3**2, C * D1 + D2 * D3, B * D2 + D1 * D3],
                [C * D1 + D2 * D3, A * C - D2**2, A * D3 + D1 * D2],
                [B * D2 + D1 * D3, A * D3 + D1 * D2, A * B - D1**2],
            ],
            dtype=complex,
        )

    @property
    def sources(self) -> np.ndarray:
        return np.array([self.F1, self.F2, self.F3], dtype=complex)

    @property
    def beta_tilde(self) -> complex:
        F = self.sources
        return complex(F @ self.adjugate() @ F)

    def matrix(self) -> np.ndarray:
        """``M`` with exponent ``-p^T M p + F.p``."""
        return np.array(
            [
                [self.A, -self.D1, -self.D2],
                [-self.D1, self.B, -self.D3],
                [-self.D2, -self.D3, self.C],
            ],
            dtype=complex,
        )

    @classmethod
    def from_matrix(cls, M: np.ndarray, F=(0, 0, 0)) -> "GaussianQuadraticForm":
        M = np.asarray(M, dtype=complex)
        if not np.allclose(M, M.T):
            raise ValueError("quadratic form matrix must be symmetric")
        return cls(M[0, 0], M[1, 1], M[2, 2], -M[0, 1], -M[0, 2], -M[1, 2], *[complex(f) for f in F])

    def with_sources(self, F1, F2, F3) -> "GaussianQuadraticForm":
        return replace(self, F1=complex(F1), F2=complex(F2), F3=complex(F3))

    def damped(self, eps: float) -> "GaussianQuadraticForm":
        return replace(self, A=self.A + eps, B=self.B + eps, C=self.C + eps)

    def real_part_eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix().real)

    def is_regulated(self) -> bool:
        """Real part of the quadratic form positive definite."""
        return bool(np.all(self.real_part_eigenvalues() > 0))


@dataclass(frozen=True)
class BranchInfo:
    root: complex
    principal: bool
    min_det_along_path: float


def _det3(M: np.ndarray) -> np.ndarray:
    return (
        M[..., 0, 0] * (M[..., 1, 1] * M[..., 2, 2] - M[..., 1, 2] * M[..., 2, 1])
        - M[..., 0, 1] * (M[..., 1, 0] * M[..., 2, 2] - M[..., 1, 2] * M[..., 2, 0])
        + M[..., 0, 2] * (M[..., 1, 0] * M[..., 2, 1] - M[..., 1, 1] * M[..., 2, 0])
    )


def sqrt_alpha_tilde(
    form: GaussianQuadraticForm, analytic_continuation: bool = False, steps: int = 2048
) -> BranchInfo:
    """Branch of ``sqrt(alpha~)`` continuous along ``(1-s) I + s M``, ``s in [0, 1]``.

    Along the path the real part stays positive definite, so the determinant
    never vanishes before the endpoint and its square root is tracked by
    phase unwrapping.
    """
    M = form.matrix()
    re_eigs = np.linalg.eigvalsh(M.real)
    scale = max(np.abs(M).max(), 1e-300)
    tol = 1e-12 * scale
    if re_eigs.min() < -tol:
        raise FormDomainError(
            f"real part of the quadratic form has a negative eigenvalue {re_eigs.min():.3e}; "
            "the integral diverges and no damping continuation exists"
        )
    if re_eigs.min() <= tol and not analytic_continuation:
        raise FormDomainError(
            "quadratic form is not regulated (Re M only semi-definite); "
            "pass analytic_continuation=True to define it by continuation from damped forms"
        )
    alpha = form.alpha_tilde
    if abs(alpha) <= 1e-13 * scale**3:
        raise DegenerateFormError(f"alpha~ = {alpha!r} vanishes (caustic)")

    s = np.linspace(0.0, 1.0, steps + 1)[:, None, None]
    path = (1.0 - s) * scale * np.eye(3) + s * M
    dets = _det3(path)
    dets[-1] = alpha
    phase = np.unwrap(np.angle(dets))
    if np.max(np.abs(np.diff(phase))) > np.pi / 4:
        return sqrt_alpha_tilde(form, analytic_continuation, steps * 8) if steps < 2**17 else _caustic(alpha)
    root = np.sqrt(abs(alpha)) * np.exp(0.5j * phase[-1])
    principal = np.sqrt(complex(alpha))
    return BranchInfo(
        root=complex(root),
        principal=bool(abs(root - principal) <= abs(root - (-principal))),
        min_det_along_path=float(np.min(np.abs(dets))),
    )


def _caustic(alpha):
    raise DegenerateFormError(f"square-root branch of alpha~ = {alpha!r} cannot be tracked (near-caustic)")


def gaussian_triple(form: GaussianQuadraticForm, analytic_continuation: bool = False) -> complex:
    """``int d^3p exp(-p^T M p + F.p) = pi^(3/2) exp(beta~/(4 alpha~)) / sqrt(alpha~)``."""
    branch = sqrt_alpha_tilde(form, analytic_continuation)
    return complex(np.pi**1.5 * np.exp(form.beta_tilde / (4.0 * form.alpha_tilde)) / branch.root)


@lru_cache(maxsize=None)
def _derivative_words(max_degree: int):
    return [e for d in range(max_degree + 1) for e in itertools.product(range(d + 1), repeat=3) if sum(e) == d]


def moment_polynomials(form: GaussianQuadraticForm, max_degree: int = MAX_MOMENT_DEGREE) -> dict[tuple[int, int, int], Poly]:
    """Normalized moments ``<p1^a p2^b p3^c>`` as polynomials in the sources F.

    With ``W(F) = beta~/(4 alpha~)`` the generating function is
    ``Z0 exp(W)``; each source derivative acts on ``P exp(W)`` as
    ``P -> dP/dF_i + P dW/dF_i``, so every moment is a polynomial in F.
    Only the quadratic part (A..D3) of ``form`` is used.
    """
    if max_degree > MAX_MOMENT_DEGREE:
        raise UnsupportedDegreeError(f"moments above total degree {MAX_MOMENT_DEGREE} are not supported")
    alpha = form.alpha_tilde
    if alpha == 0:
        raise DegenerateFormError("alpha~ vanishes (caustic)")
    grad_w = form.adjugate() / (2.0 * alpha)
    dW = [Poly.linear(list(grad_w[i])) for i in range(3)]

    out: dict[tuple[int, int, int], Poly] = {(0, 0, 0): Poly.constant(3, 1.0)}
    for exps in _derivative_words(max_degree):
        if exps in out:
            continue
        i = next(k for k in range(3) if exps[k])
        prev = list(exps)
        prev[i] -= 1
        P = out[tuple(prev)]
        out[exps] = P.diff(i) + P * dW[i]
    return out


def _check_degree(exps):
    if min(exps) < 0 or len(exps) != 3:
        raise ValueError(f"bad exponent triple {exps!r}")
    if sum(exps) > MAX_MOMENT_DEGREE:
        raise UnsupportedDegreeError(
            f"moment of total degree {sum(exps)} exceeds the supported {MAX_MOMENT_DEGREE}"
        )


def gaussian_expectation(form: GaussianQuadraticForm, exps: tuple[int, int, int]) -> complex:
    """``<p^exps>`` normalized by the zeroth moment."""
    _check_degree(exps)
    moments = moment_polynomials(form, sum(exps))
    return complex(moments[tuple(exps)](*form.sources))


def gaussian_moment(
    form: GaussianQuadraticForm, exps: tuple[int, int, int], analytic_continuation: bool = False
) -> complex:
    """``int d^3p p1^a p2^b p3^c exp(-p^T M p + F.p)``."""
    _check_degree(exps)
    return gaussian_triple(form, analytic_continuation) * gaussian_expectation(form, exps)
