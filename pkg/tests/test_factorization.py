from fractions import Fraction

import pytest

from akgup.factorization import (
    FactorSequence,
    ak_factor_exponents,
    splitting_commutators,
    check_factorization,
    evolution_exponent,
    factor_exponents,
    free_factor_exponents,
    op_A,
    op_B,
    op_F,
    op_G,
    product_series,
    term,
    verify_factorization,
)
from akgup.operators import commutator, exp_series, is_anti_hermitian, one, zero

H = Fraction(1, 2)


def expected_commutators():
    """Quoted brackets, written out monomial by monomial."""
    ab = (
        term(0, 1, T=2, kappa=1, inv_m=(0, 0, 1), p=(1, 0, 1))
        + term(0, 1, T=2, kappa=2, p=(1, 1, 0))
        + term(0, 1, beta=1, T=2, kappa=1, inv_m=(0, 0, 1), p=(3, 0, 1))
        + term(0, 4, beta=1, T=2, kappa=1, inv_m=(0, 0, 1), p=(1, 0, 3))
        + term(0, 1, beta=1, T=2, kappa=2, p=(3, 1, 0))
        + term(0, 1, beta=1, T=2, kappa=2, p=(1, 3, 0))
        + term(0, 3, beta=1, T=2, kappa=2, p=(1, 1, 2))
    )
    b_ab = (
        term(0, 1, T=3, kappa=2, inv_m=(0, 0, 1), p=(2, 0, 0))
        + term(0, 2, beta=1, T=3, kappa=2, inv_m=(0, 0, 1), p=(4, 0, 0))
        + term(0, 12, beta=1, T=3, kappa=2, inv_m=(0, 0, 1), p=(2, 0, 2))
        + term(0, 6, beta=1, T=3, kappa=3, p=(2, 1, 1))
    )
    bb_ab = term(0, 24, beta=1, T=4, kappa=3, inv_m=(0, 0, 1), p=(3, 0, 1)) + term(
        0, 6, beta=1, T=4, kappa=4, p=(3, 1, 0)
    )
    bbb_ab = term(0, 24, beta=1, T=5, kappa=4, inv_m=(0, 0, 1), p=(4, 0, 0))
    fg = term(0, -2, beta=1, T=4, kappa=3, inv_m=(0, 0, 1), p=(3, 0, 1)) + term(
        0, -H, beta=1, T=4, kappa=4, p=(3, 1, 0)
    )
    ffg = term(0, -2, beta=1, T=5, kappa=4, inv_m=(0, 0, 1), p=(4, 0, 0))
    return {
        "[A,B]": ab,
        "[B,[A,B]]": b_ab,
        "[B,[B,[A,B]]]": bb_ab,
        "[B,[B,[B,[A,B]]]]": bbb_ab,
        "[F,G]": fg,
        "[F,[F,G]]": ffg,
    }


@pytest.mark.parametrize("name", list(expected_commutators()))
def test_quoted_commutators_exact(name):
    assert splitting_commutators()[name] == expected_commutators()[name]


@pytest.mark.parametrize("name", ["[A,[A,B]]", "[A,[B,[A,B]]]", "[B,[B,[B,[B,[A,B]]]]]", "[G,[F,G]]", "[F,[F,[F,G]]]"])
def test_other_commutators_vanish_at_first_order(name):
    assert splitting_commutators()[name].is_zero()


def _series_of(*exponents, t_order=6):
    seq = FactorSequence(tuple(str(i) for i in range(len(exponents))), tuple(exponents))
    return product_series(seq, t_order)


def test_symmetric_split_step():
    a, b = op_A(), op_B()
    c = splitting_commutators()
    z = a + b - c["[B,[A,B]]"].scale(Fraction(1, 12)) + c["[B,[B,[B,[A,B]]]]"].scale(Fraction(1, 720))
    lhs = _series_of(a.scale(H), b, a.scale(H))
    assert lhs == exp_series(z, 6)


def test_fg_split_step():
    f, g = op_F(), op_G()
    ffg = splitting_commutators()["[F,[F,G]]"]
    lhs = exp_series(f + g, 6)
    rhs = _series_of(g.scale(H), f, g.scale(H), ffg.scale(Fraction(-1, 12)))
    assert lhs == rhs


def test_factorization_residual_zero_through_t6():
    assert verify_factorization(6, beta_cut=1).is_zero()
    assert verify_factorization(6, beta_cut=0).is_zero()


def test_factorization_report_summary():
    report = check_factorization(5)
    assert report.ok
    assert report.summary() == "0 terms"


def test_dropping_a_factor_breaks_factorization():
    seq = factor_exponents()
    broken = FactorSequence(seq.labels[:-1], seq.exponents[:-1])
    exact = exp_series(evolution_exponent(), 4).with_cuts(t_cut=4)
    assert not (product_series(broken, 4) - exact).is_zero()


def test_beta_zero_reduces_to_ak_sequence():
    reduced = factor_exponents(beta_cut=0).nonzero()
    ak = ak_factor_exponents(beta_cut=0)
    assert reduced.labels == ak.labels
    assert reduced.exponents == ak.exponents


def test_kappa_zero_reduces_to_free_factors():
    reduced = factor_exponents().substitute_zero("kappa").nonzero()
    free = free_factor_exponents()
    total = zero()
    for _, e in reduced:
        assert e.is_momentum_only()
        total = total + e
    for _, a in reduced:
        for _, b in reduced:
            assert commutator(a, b).is_zero()
    assert total == sum(free.exponents, zero())


def test_exponents_anti_hermitian():
    for label, e in factor_exponents():
        assert is_anti_hermitian(e), label


def test_identity_series():
    assert _series_of(zero()) == one()
