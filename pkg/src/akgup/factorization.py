"""Symbolic Hamiltonian and factorized evolution operator of the GUP Arthurs-Kelly system.

All objects are :class:`~akgup.operators.OperatorPolynomial` exponents with
symbolic ``T``, ``kappa``, ``beta`` and inverse masses; ``hbar = 1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from ._scalars import GaussianRational
from .operators import (
    OperatorPolynomial,
    bch_compose,
    commutator,
    exp_series,
    multiply,
    one,
)

__all__ = [
    "term",
    "hamiltonian",
    "op_A",
    "op_B",
    "op_F",
    "op_G",
    "delta_x1",
    "delta_y1",
    "v_exponents",
    "factor_exponents",
    "ak_factor_exponents",
    "free_factor_exponents",
    "splitting_commutators",
    "product_series",
    "symmetric_split_exponent",
    "evolution_exponent",
    "FactorSequence",
    "FactorizationReport",
    "verify_factorization",
    "check_factorization",
    "FactorizationMismatch",
]


def term(
    re=0,
    im=0,
    *,
    beta: int = 0,
    T: int = 0,
    kappa: int = 0,
    inv_m: tuple[int, int, int] = (0, 0, 0),
    q: tuple[int, int, int] = (0, 0, 0),
    p: tuple[int, int, int] = (0, 0, 0),
    beta_cut: int = 1,
) -> OperatorPolynomial:
    """Single monomial ``(re + i*im) * beta^. T^. kappa^. (1/m)^. q^. p^.``."""
    key = (beta, T, kappa, *inv_m, *q, *p)
    return OperatorPolynomial({key: GaussianRational(Fraction(re), Fraction(im))}, beta_cut=beta_cut)


def _sum(*parts: OperatorPolynomial) -> OperatorPolynomial:
    out = parts[0]
    for x in parts[1:]:
        out = out + x
    return out


def hamiltonian(beta_cut: int = 1) -> OperatorPolynomial:
    """O(beta) Hamiltonian in terms of the ordinary canonical pairs."""
    t = lambda *a, **k: term(*a, beta_cut=beta_cut, **k)  # noqa: E731
    return _sum(
        t(Fraction(1, 2), inv_m=(1, 0, 0), p=(2, 0, 0)),
        t(Fraction(1, 2), inv_m=(0, 1, 0), p=(0, 2, 0)),
        t(Fraction(1, 2), inv_m=(0, 0, 1), p=(0, 0, 2)),
        t(1, beta=1, inv_m=(1, 0, 0), p=(4, 0, 0)),
        t(1, beta=1, inv_m=(0, 1, 0), p=(0, 4, 0)),
        t(1, beta=1, inv_m=(0, 0, 1), p=(0, 0, 4)),
        t(1, kappa=1, q=(0, 0, 1), p=(1, 0, 0)),
        t(1, kappa=1, p=(0, 1, 1)),
        t(1, beta=1, kappa=1, q=(0, 0, 1), p=(3, 0, 0)),
        t(1, beta=1, kappa=1, p=(0, 3, 1)),
        t(1, beta=1, kappa=1, p=(0, 1, 3)),
    )


def _times_minus_iT(x: OperatorPolynomial) -> OperatorPolynomial:
    shifted = {(k[0], k[1] + 1) + k[2:]: v * GaussianRational(0, -1) for k, v in x.terms.items()}
    return OperatorPolynomial(shifted, beta_cut=x.beta_cut, t_cut=x.t_cut)


def evolution_exponent(beta_cut: int = 1) -> OperatorPolynomial:
    """``-i H T``."""
    return _times_minus_iT(hamiltonian(beta_cut))


def op_A(beta_cut: int = 1) -> OperatorPolynomial:
    t = lambda *a, **k: term(*a, beta_cut=beta_cut, **k)  # noqa: E731
    return _sum(
        t(0, Fraction(-1, 2), T=1, inv_m=(0, 0, 1), p=(0, 0, 2)),
        t(0, -1, T=1, kappa=1, p=(0, 1, 1)),
        t(0, -1, beta=1, T=1, inv_m=(0, 0, 1), p=(0, 0, 4)),
        t(0, -1, beta=1, T=1, kappa=1, p=(0, 3, 1)),
        t(0, -1, beta=1, T=1, kappa=1, p=(0, 1, 3)),
    )


def op_B(beta_cut: int = 1) -> OperatorPolynomial:
    t = lambda *a, **k: term(*a, beta_cut=beta_cut, **k)  # noqa: E731
    return _sum(
        t(0, -1, T=1, kappa=1, q=(0, 0, 1), p=(1, 0, 0)),
        t(0, -1, beta=1, T=1, kappa=1, q=(0, 0, 1), p=(3, 0, 0)),
    )


def op_F(beta_cut: int = 1) -> OperatorPolynomial:
    return op_A(beta_cut) + op_B(beta_cut)


def op_G(beta_cut: int = 1) -> OperatorPolynomial:
    t = lambda *a, **k: term(*a, beta_cut=beta_cut, **k)  # noqa: E731
    return _sum(
        t(0, -1, beta=1, T=3, kappa=2, inv_m=(0, 0, 1), p=(2, 0, 2)),
        t(0, Fraction(-1, 2), beta=1, T=3, kappa=3, p=(2, 1, 1)),
    )


def delta_x1(beta_cut: int = 1) -> OperatorPolynomial:
    """``-iT/(2 m1) + i kappa^2 T^3 / (12 m3)`` as a c-number polynomial."""
    return term(0, Fraction(-1, 2), T=1, inv_m=(1, 0, 0), beta_cut=beta_cut) + term(
        0, Fraction(1, 12), T=3, kappa=2, inv_m=(0, 0, 1), beta_cut=beta_cut
    )


def delta_y1(beta_cut: int = 1) -> OperatorPolynomial:
    return _sum(
        term(0, -1, T=1, inv_m=(1, 0, 0), beta_cut=beta_cut),
        term(0, Fraction(1, 6), T=3, kappa=2, inv_m=(0, 0, 1), beta_cut=beta_cut),
        term(0, Fraction(-1, 30), T=5, kappa=4, inv_m=(0, 0, 1), beta_cut=beta_cut),
    )


def _with_p(c_number: OperatorPolynomial, p_exps, beta_pow: int = 0) -> OperatorPolynomial:
    out = {}
    for k, v in c_number.terms.items():
        out[(k[0] + beta_pow,) + k[1:9] + tuple(a + b for a, b in zip(k[9:12], p_exps))] = v
    return OperatorPolynomial(out, beta_cut=c_number.beta_cut, t_cut=c_number.t_cut)


def v_exponents(beta_cut: int = 1) -> list[OperatorPolynomial]:
    """The four commuting momentum exponents making up V(T)."""
    t = lambda *a, **k: term(*a, beta_cut=beta_cut, **k)  # noqa: E731
    return [
        t(0, Fraction(-1, 4), T=1, inv_m=(0, 0, 1), p=(0, 0, 2))
        + t(0, Fraction(-1, 2), beta=1, T=1, inv_m=(0, 0, 1), p=(0, 0, 4)),
        _sum(
            t(0, Fraction(-1, 2), T=1, kappa=1, p=(0, 1, 1)),
            t(0, Fraction(-1, 2), beta=1, T=1, kappa=1, p=(0, 3, 1)),
            t(0, Fraction(-1, 2), beta=1, T=1, kappa=1, p=(0, 1, 3)),
        ),
        t(0, Fraction(1, 2), beta=1, T=3, kappa=2, inv_m=(0, 0, 1), p=(2, 0, 2)),
        t(0, Fraction(1, 4), beta=1, T=3, kappa=3, p=(2, 1, 1)),
    ]


@dataclass(frozen=True)
class FactorSequence:
    """Exponents of an ordered product of exponentials, leftmost first."""

    labels: tuple[str, ...]
    exponents: tuple[OperatorPolynomial, ...]

    def __iter__(self):
        return iter(zip(self.labels, self.exponents))

    def nonzero(self) -> "FactorSequence":
        kept = [(l, e) for l, e in self if not e.is_zero()]
        return FactorSequence(tuple(l for l, _ in kept), tuple(e for _, e in kept))

    def substitute_zero(self, symbol: str) -> "FactorSequence":
        return FactorSequence(self.labels, tuple(e.substitute_zero(symbol) for e in self.exponents))


def factor_exponents(beta_cut: int = 1) -> FactorSequence:
    """Exponents of the factorized ``U(T)``, ordered left to right."""
    t = lambda *a, **k: term(*a, beta_cut=beta_cut, **k)  # noqa: E731
    e1 = _with_p(delta_x1(beta_cut), (2, 0, 0)) + _with_p(delta_y1(beta_cut), (4, 0, 0), beta_pow=1)
    e2 = t(0, Fraction(-1, 2), T=1, inv_m=(0, 1, 0), p=(0, 2, 0)) + t(
        0, -1, beta=1, T=1, inv_m=(0, 1, 0), p=(0, 4, 0)
    )
    eb = op_B(beta_cut)
    emid = t(0, Fraction(-1, 6), beta=1, T=5, kappa=4, inv_m=(0, 0, 1), p=(4, 0, 0))
    v = v_exponents(beta_cut)
    labels = ("p1", "p2", "V.p3", "V.p2p3", "V.p1p1p3p3", "V.p1p1p2p3", "q3p1", "p1^4", "V.p3", "V.p2p3", "V.p1p1p3p3", "V.p1p1p2p3")
    return FactorSequence(labels, (e1, e2, *v, eb, emid, *v))


def ak_factor_exponents(beta_cut: int = 1) -> FactorSequence:
    """The seven-factor evolution operator of the ordinary (beta = 0) AK system."""
    t = lambda *a, **k: term(*a, beta_cut=beta_cut, **k)  # noqa: E731
    e1 = _with_p(delta_x1(beta_cut), (2, 0, 0))
    e2 = t(0, Fraction(-1, 2), T=1, inv_m=(0, 1, 0), p=(0, 2, 0))
    e3 = t(0, Fraction(-1, 4), T=1, inv_m=(0, 0, 1), p=(0, 0, 2))
    e4 = t(0, Fraction(-1, 2), T=1, kappa=1, p=(0, 1, 1))
    e5 = t(0, -1, T=1, kappa=1, q=(0, 0, 1), p=(1, 0, 0))
    return FactorSequence(
        ("p1", "p2", "V.p3", "V.p2p3", "q3p1", "V.p3", "V.p2p3"), (e1, e2, e3, e4, e5, e3, e4)
    )


def free_factor_exponents(beta_cut: int = 1) -> FactorSequence:
    """Three decoupled free GUP particles."""
    t = lambda *a, **k: term(*a, beta_cut=beta_cut, **k)  # noqa: E731
    exps = []
    for j in range(3):
        inv = tuple(1 if i == j else 0 for i in range(3))
        p2 = tuple(2 if i == j else 0 for i in range(3))
        p4 = tuple(4 if i == j else 0 for i in range(3))
        exps.append(t(0, Fraction(-1, 2), T=1, inv_m=inv, p=p2) + t(0, -1, beta=1, T=1, inv_m=inv, p=p4))
    return FactorSequence(("p1", "p2", "p3"), tuple(exps))


def splitting_commutators(beta_cut: int = 1) -> dict[str, OperatorPolynomial]:
    """Every bracket used in the factorization chain, computed from A, B, F, G."""
    a, b = op_A(beta_cut), op_B(beta_cut)
    f, g = op_F(beta_cut), op_G(beta_cut)
    ab = commutator(a, b)
    b_ab = commutator(b, ab)
    bb_ab = commutator(b, b_ab)
    bbb_ab = commutator(b, bb_ab)
    fg = commutator(f, g)
    return {
        "[A,B]": ab,
        "[B,[A,B]]": b_ab,
        "[B,[B,[A,B]]]": bb_ab,
        "[B,[B,[B,[A,B]]]]": bbb_ab,
        "[A,[A,B]]": commutator(a, ab),
        "[A,[B,[A,B]]]": commutator(a, b_ab),
        "[B,[B,[B,[B,[A,B]]]]]": commutator(b, bbb_ab),
        "[F,G]": fg,
        "[F,[F,G]]": commutator(f, fg),
        "[G,[F,G]]": commutator(g, fg),
        "[F,[F,[F,G]]]": commutator(f, commutator(f, fg)),
    }


def symmetric_split_exponent(beta_cut: int = 1) -> OperatorPolynomial:
    """``log(e^{A/2} e^B e^{A/2})`` by two BCH compositions."""
    a, b = op_A(beta_cut), op_B(beta_cut)
    half_a = a.scale(Fraction(1, 2))
    return bch_compose(bch_compose(half_a, b), half_a)


def product_series(seq: FactorSequence, t_order: int) -> OperatorPolynomial:
    """Series of ``prod_k exp(E_k)`` through ``T^t_order``."""
    exps = [e.with_cuts(t_cut=t_order) for e in seq.exponents]
    acc = one(exps[0].beta_cut, t_order)
    for e in exps:
        if e.is_zero():
            continue
        acc = multiply(acc, exp_series(e, t_order))
    return acc


class FactorizationMismatch(AssertionError):
    def __init__(self, residual: OperatorPolynomial):
        self.residual = residual
        super().__init__(
            f"factorized product differs from exp(-iHT) in {len(residual)} terms:\n"
            + residual.to_text()
        )


@dataclass
class FactorizationReport:
    t_order: int
    beta_cut: int
    residual: OperatorPolynomial
    lhs_terms: int = field(default=0)

    @property
    def ok(self) -> bool:
        return self.residual.is_zero()

    def summary(self) -> str:
        return f"{len(self.residual)} terms"


def verify_factorization(t_order: int = 6, beta_cut: int = 1) -> OperatorPolynomial:
    """``exp(-iHT) - U_factorized`` expanded through ``T^t_order`` and ``beta^beta_cut``."""
    if t_order < 5:
        raise ValueError("t_order must be at least 5 to reach the T^5 terms of the factorization")
    lhs = exp_series(evolution_exponent(beta_cut).with_cuts(t_cut=t_order), t_order)
    rhs = product_series(factor_exponents(beta_cut), t_order)
    return lhs - rhs


def check_factorization(t_order: int = 6, beta_cut: int = 1) -> FactorizationReport:
    residual = verify_factorization(t_order, beta_cut)
    if not residual.is_zero():
        raise FactorizationMismatch(residual)
    return FactorizationReport(t_order, beta_cut, residual)
