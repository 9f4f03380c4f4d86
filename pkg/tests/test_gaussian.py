import numpy as np
import pytest
from _helpers import random_form

from akgup.gaussian import (
    DegenerateFormError,
    FormDomainError,
    GaussianQuadraticForm,
    UnsupportedDegreeError,
    gaussian_moment,
    gaussian_triple,
    sqrt_alpha_tilde,
)
from akgup.oracle.quadrature import triple_quadrature, triple_quadrature_many

PI32 = np.pi**1.5


def test_unit_form():
    assert gaussian_triple(GaussianQuadraticForm(1, 1, 1)) == pytest.approx(PI32, rel=1e-15)


def test_completed_square():
    form = GaussianQuadraticForm(1, 1, 1, F1=2)
    assert gaussian_triple(form) == pytest.approx(PI32 * np.e, rel=1e-14)


def test_alpha_tilde_is_determinant():
    form = random_form(np.random.default_rng(5))
    assert form.alpha_tilde == pytest.approx(np.linalg.det(form.matrix()), rel=1e-13)


def test_beta_tilde_is_adjugate_form():
    form = random_form(np.random.default_rng(6))
    M = form.matrix()
    F = form.sources
    assert form.beta_tilde == pytest.approx(F @ (np.linalg.inv(M) * np.linalg.det(M)) @ F, rel=1e-12)


def test_zeroth_moment_is_triple():
    form = random_form(np.random.default_rng(7))
    assert gaussian_moment(form, (0, 0, 0)) == gaussian_triple(form)


def test_second_moment_of_unit_form():
    assert gaussian_moment(GaussianQuadraticForm(1, 1, 1), (2, 0, 0)) == pytest.approx(PI32 / 2, rel=1e-14)


def test_odd_moment_vanishes_without_sources():
    assert abs(gaussian_moment(GaussianQuadraticForm(1, 2, 3, D1=0.2), (1, 0, 0))) < 1e-15


@pytest.mark.parametrize("seed", range(5))
def test_against_quadrature(seed):
    form = random_form(np.random.default_rng(seed))
    ref = triple_quadrature(form)
    assert abs(gaussian_triple(form) - ref.value) <= 1e-10 * abs(ref.value)


def test_moment_against_quadrature():
    form = random_form(np.random.default_rng(11))
    ref = triple_quadrature(form, (3, 1, 0))
    assert abs(gaussian_moment(form, (3, 1, 0)) - ref.value) <= 1e-9 * abs(ref.value)


@pytest.mark.parametrize("i", range(3))
def test_source_derivative_raises_exponent(i):
    form = random_form(np.random.default_rng(20 + i))
    base = (1, 0, 2)
    h = 1e-5
    F = form.sources.copy()
    Fp, Fm = F.copy(), F.copy()
    Fp[i] += h
    Fm[i] -= h
    fd = (gaussian_moment(form.with_sources(*Fp), base) - gaussian_moment(form.with_sources(*Fm), base)) / (2 * h)
    raised = list(base)
    raised[i] += 1
    exact = gaussian_moment(form, tuple(raised))
    assert abs(fd - exact) <= 1e-6 * abs(exact)


def test_principal_branch_for_regulated_forms():
    form = GaussianQuadraticForm(1 + 2j, 1 - 0.5j, 2 + 1j, D1=0.1)
    assert sqrt_alpha_tilde(form).principal


def test_branch_continuation_follows_the_path():
    # three Fresnel-like factors: the continued root is not the principal one
    form = GaussianQuadraticForm(0.1 + 1j, 0.1 + 1j, 0.1 + 1j)
    root = sqrt_alpha_tilde(form).root
    assert root == pytest.approx(np.sqrt(0.1 + 1j) ** 3, rel=1e-12)
    assert gaussian_triple(form) == pytest.approx((np.sqrt(np.pi / (0.1 + 1j))) ** 3, rel=1e-12)


def test_unregulated_form_needs_flag():
    form = GaussianQuadraticForm(1j, 2j, 1j)
    with pytest.raises(FormDomainError):
        gaussian_triple(form)
    val = gaussian_triple(form, analytic_continuation=True)
    assert val == pytest.approx(np.sqrt(np.pi / 1j) ** 2 * np.sqrt(np.pi / 2j), rel=1e-12)


def test_divergent_form_rejected():
    with pytest.raises(FormDomainError):
        gaussian_triple(GaussianQuadraticForm(-1, 1, 1))


def test_caustic_rejected():
    with pytest.raises(DegenerateFormError):
        gaussian_triple(GaussianQuadraticForm(1j, 1j, 0j, D1=1j), analytic_continuation=True)


def test_degree_cap():
    with pytest.raises(UnsupportedDegreeError):
        gaussian_moment(GaussianQuadraticForm(1, 1, 1), (3, 1, 1))


def test_quadrature_many_consistent_with_single():
    form = random_form(np.random.default_rng(3))
    many = triple_quadrature_many(form, [(0, 0, 0), (2, 0, 0)])
    assert many[0].value == pytest.approx(triple_quadrature(form).value, rel=1e-12)
    assert not many[1].flagged
