from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from akgup._scalars import GaussianRational
from akgup.factorization import op_A, op_B, term
from akgup.operators import (
    BCHNonTerminating,
    NonTerminatingSeries,
    OperatorPolynomial,
    TruncationMismatch,
    adjoint,
    bch_compose,
    commutator,
    exp_series,
    is_anti_hermitian,
    multiply,
    one,
    p,
    q,
    zero,
)

small = st.integers(min_value=-3, max_value=3)
exps = st.tuples(st.integers(0, 2), st.integers(0, 2), st.integers(0, 2))


@st.composite
def polys(draw, max_terms=3):
    n = draw(st.integers(1, max_terms))
    out = zero()
    for _ in range(n):
        re, im = draw(small), draw(small)
        out = out + term(
            re,
            im,
            beta=draw(st.integers(0, 1)),
            T=draw(st.integers(0, 2)),
            kappa=draw(st.integers(0, 1)),
            q=draw(exps),
            p=draw(exps),
        )
    return out


# -- multiply -------------------------------------------------------------------
def test_multiply_reorders_canonical_pair():
    assert multiply(p(3), q(3)) == multiply(q(3), p(3)) - term(0, 1)


def test_multiply_commuting_pair_is_untouched():
    assert multiply(q(3), p(1)) == term(1, q=(0, 0, 1), p=(1, 0, 0))


def test_multiply_normal_ordered_product():
    lhs = term(1, q=(0, 0, 1), p=(1, 0, 0))
    rhs = term(1, p=(0, 1, 1))
    assert multiply(lhs, rhs) == term(1, q=(0, 0, 1), p=(1, 1, 1))


def test_multiply_rejects_mismatched_cuts():
    with pytest.raises(TruncationMismatch):
        multiply(p(1, beta_cut=1), p(1, beta_cut=0))


def test_beta_cut_drops_higher_orders():
    x = term(1, beta=1, p=(1, 0, 0))
    assert multiply(x, x).is_zero()


# -- commutator -----------------------------------------------------------------
def test_canonical_commutator():
    assert commutator(q(3), p(3)) == term(0, 1)
    assert commutator(q(1), p(2)).is_zero()


def test_ab_commutator_at_beta_zero():
    a, b = op_A(beta_cut=0), op_B(beta_cut=0)
    expected = term(0, 1, T=2, kappa=1, inv_m=(0, 0, 1), p=(1, 0, 1), beta_cut=0) + term(
        0, 1, T=2, kappa=2, p=(1, 1, 0), beta_cut=0
    )
    assert commutator(a, b) == expected


@settings(max_examples=40, deadline=None)
@given(polys(), polys())
def test_antisymmetry(x, y):
    assert commutator(x, y) == -commutator(y, x)


@settings(max_examples=25, deadline=None)
@given(polys(2), polys(2), polys(2))
def test_jacobi(x, y, z):
    total = commutator(x, commutator(y, z)) + commutator(y, commutator(z, x)) + commutator(z, commutator(x, y))
    assert total.is_zero()


@settings(max_examples=25, deadline=None)
@given(polys(2), polys(2), polys(2))
def test_leibniz(x, y, z):
    assert commutator(x, multiply(y, z)) == multiply(commutator(x, y), z) + multiply(y, commutator(x, z))


@settings(max_examples=25, deadline=None)
@given(polys(2), polys(2), polys(2))
def test_multiply_associative(x, y, z):
    assert multiply(multiply(x, y), z) == multiply(x, multiply(y, z))


# -- exp_series -----------------------------------------------------------------
def test_exp_series_of_zero_is_identity():
    assert exp_series(zero(), 4) == one()


def test_exp_series_single_commuting_monomial():
    x = term(0, Fraction(-1, 2), T=1, inv_m=(1, 0, 0), p=(2, 0, 0))
    expected = one() + x + term(Fraction(-1, 8), T=2, inv_m=(2, 0, 0), p=(4, 0, 0))
    assert exp_series(x, 2) == expected


def test_exp_series_matches_repeated_multiply():
    b = op_B()
    b2 = multiply(b, b)
    b3 = multiply(b2, b)
    brute = one() + b + b2.scale(Fraction(1, 2)) + b3.scale(Fraction(1, 6))
    assert exp_series(b, 3) == brute.with_cuts(t_cut=3)


def test_exp_series_needs_t_grading():
    with pytest.raises(NonTerminatingSeries):
        exp_series(p(1), 3)


# -- BCH ------------------------------------------------------------------------
def test_bch_commuting_is_sum():
    x = term(0, 1, T=1, p=(2, 0, 0))
    y = term(0, 1, T=1, p=(0, 3, 0))
    assert bch_compose(x, y) == x + y


def test_bch_symmetric_split():
    a, b = op_A(), op_B()
    half = a.scale(Fraction(1, 2))
    ab = commutator(a, b)
    b_ab = commutator(b, ab)
    bbb_ab = commutator(b, commutator(b, b_ab))
    expected = a + b - b_ab.scale(Fraction(1, 12)) + bbb_ab.scale(Fraction(1, 720))
    assert bch_compose(bch_compose(half, b), half) == expected


def test_bch_reports_non_terminating_series():
    # [q1 p1, p1] = i p1, so the nested brackets never vanish
    x = term(0, 1, T=1, q=(1, 0, 0), p=(1, 0, 0))
    y = term(0, 1, T=1, p=(1, 0, 0))
    with pytest.raises(BCHNonTerminating) as info:
        bch_compose(x, y)
    assert info.value.word


# -- adjoint --------------------------------------------------------------------
def test_anti_hermitian_examples():
    assert is_anti_hermitian(term(0, Fraction(-1, 2), T=1, inv_m=(0, 1, 0), p=(0, 2, 0)))
    assert not is_anti_hermitian(term(1, T=1, p=(2, 0, 0)))
    assert is_anti_hermitian(op_B())


def test_adjoint_of_qp_reorders():
    # (q3 p3)^dagger = p3 q3 = q3 p3 - i
    x = term(1, q=(0, 0, 1), p=(0, 0, 1))
    assert adjoint(x) == x - term(0, 1)


@settings(max_examples=40, deadline=None)
@given(polys(), polys())
def test_adjoint_reverses_products(x, y):
    assert adjoint(multiply(x, y)) == multiply(adjoint(y), adjoint(x))


# -- text form --------------------------------------------------------------------
GOLDEN = "(0/1,24/1) beta^1 T^5 kappa^4 im3^1 p1^4\n"


def test_golden_text_form():
    x = term(0, 24, beta=1, T=5, kappa=4, inv_m=(0, 0, 1), p=(4, 0, 0))
    assert x.to_text() == GOLDEN
    assert OperatorPolynomial.from_text(GOLDEN) == x


@settings(max_examples=40, deadline=None)
@given(polys())
def test_text_round_trip(x):
    assert OperatorPolynomial.from_text(x.to_text()) == x


def test_coefficient_lookup():
    x = term(Fraction(3, 4), -2, T=2, p=(1, 0, 0))
    assert x.coefficient(T=2, p1=1) == GaussianRational(Fraction(3, 4), Fraction(-2))
