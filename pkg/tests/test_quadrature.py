import numpy as np
import pytest
from _helpers import random_params, random_point, rel

from akgup.coefficients import derive_coefficients
from akgup.oracle.quadrature import damped_line_moments, quad_kernel, richardson_zero
from akgup.params import SystemParams
from akgup.propagator import PropagatorPoint, k_ak, k_gup


def recursion_moments(lam, g, eps, n):
    # I_0 = sqrt(pi/a) e^{-g^2/4a}, I_{k+1} = (i g / 2a) I_k + (k / 2a) I_{k-1}; Re a > 0 keeps the principal root
    a = complex(eps, lam)
    out = [np.sqrt(np.pi / a) * np.exp(-(g**2) / (4 * a))]
    out.append(1j * g / (2 * a) * out[0])
    for k in range(1, n):
        out.append(1j * g / (2 * a) * out[k] + k / (2 * a) * out[k - 1])
    return np.array(out[: n + 1])


@pytest.mark.parametrize("lam, g", [(0.5, 0.3), (-1.2, 2.5), (0.05, -4.0), (3.0, 0.0)])
@pytest.mark.parametrize("eps", [1e-1, 1e-3, 1e-6])
def test_damped_moments_match_recursion(lam, g, eps):
    got = damped_line_moments(lam, g, eps, 4)
    ref = recursion_moments(lam, g, eps, 4)
    scale = np.abs(ref).max()
    assert np.all(np.abs(got - ref) <= 1e-12 * scale)


def test_damped_moments_reject_bad_input():
    with pytest.raises(ValueError):
        damped_line_moments(1.0, 0.0, -1e-3)
    with pytest.raises(ValueError):
        damped_line_moments(0.0, 1.0, 0.0)


def test_richardson_exact_for_polynomials():
    eps = [1e-1, 5e-2, 2.5e-2]
    vals = [3 - 2 * e + 5 * e**2 for e in eps]
    val, err = richardson_zero(eps, vals)
    assert val == pytest.approx(3.0, abs=1e-13)
    assert err >= 0


def test_free_limit():
    prm = SystemParams(1.3, 0.8, 1.7, kappa=0.0, beta=0.0, T=0.7)
    pt = PropagatorPoint((0.3, -0.2, 0.5), (0.1, 0.4, -0.3))
    m, T = prm.masses, prm.T
    pref = np.prod([np.sqrt(mj / (2j * np.pi * T)) for mj in m])
    closed = pref * np.exp(1j * sum(mj * zj**2 for mj, zj in zip(m, pt.z)) / (2 * T))
    res = quad_kernel(prm, pt)
    assert not res.flagged
    assert rel(res.value, closed) < 1e-7


@pytest.mark.parametrize("seed", range(3))
def test_ak_limit(seed):
    rng = np.random.default_rng(seed)
    prm, pt = random_params(rng), random_point(rng)
    res = quad_kernel(prm, pt)
    assert rel(res.value, k_ak(prm, pt)) < 1e-6


@pytest.mark.parametrize("seed", range(3))
def test_gup_kernel(seed):
    rng = np.random.default_rng(100 + seed)
    prm, pt = random_params(rng, beta=1e-4), random_point(rng)
    res = quad_kernel(prm, pt)
    assert not res.flagged
    assert rel(res.value, k_gup(prm, pt, derive_coefficients(prm)).total) < 1e-6


def test_unconverged_sequence_is_flagged():
    prm = SystemParams(1.3, 0.8, 1.7, kappa=0.9, beta=1e-4, T=0.7)
    pt = PropagatorPoint((0.3, -0.2, 0.5), (0.1, 0.4, -0.3))
    res = quad_kernel(prm, pt, eps_list=(0.5, 0.4), refine=())
    assert res.flagged
    assert res.error > 1e-6 * abs(res.value)


def test_eps_list_validated():
    prm = SystemParams(1.3, 0.8, 1.7, kappa=0.9, T=0.7)
    pt = PropagatorPoint((0, 0, 0), (0, 0, 0))
    with pytest.raises(ValueError):
        quad_kernel(prm, pt, eps_list=(1e-3, 1e-2))
    with pytest.raises(ValueError):
        quad_kernel(prm, pt, eps_list=(1e-2, -1e-3))
