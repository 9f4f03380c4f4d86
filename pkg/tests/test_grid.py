import numpy as np
import pytest

from akgup.dynamics import GaussianPacket, InitialState
from akgup.factorization import ak_factor_exponents, free_factor_exponents
from akgup.oracle.grid import (
    GridSpec,
    GridState,
    GridTooSmallError,
    apply_factorized_unitary,
    compare_states,
    load_state,
    save_state,
    to_momentum,
    to_position,
    trotter_convergence,
    trotter_extrapolated,
    trotter_reference,
)
from akgup.params import SystemParams

SPEC = GridSpec(64, 9.0)
PRM = SystemParams(1.0, 2.0, 1.0, kappa=0.8, beta=1e-5, T=0.5)


@pytest.fixture(scope="module")
def state():
    return InitialState.product().on_grid(SPEC)


def test_spec_consistency():
    assert SPEC.dp * SPEC.length == pytest.approx(2 * np.pi)
    assert SPEC.dq * SPEC.n == pytest.approx(SPEC.length)
    with pytest.raises(ValueError):
        GridSpec(48, 9.0)


def test_round_trip_is_identity():
    rng = np.random.default_rng(0)
    a = rng.normal(size=(32,) * 3) + 1j * rng.normal(size=(32,) * 3)
    back = to_momentum(to_position(a))
    assert np.abs(back - a).max() <= 1e-13 * np.abs(a).max()
    mixed = to_momentum(to_position(a, axes=(2,)), axes=(2,))
    assert np.abs(mixed - a).max() <= 1e-13 * np.abs(a).max()


def test_plane_wave_convention():
    # a momentum eigenstate at p_k becomes exp(+i q p_k) in position space
    spec = GridSpec(16, 4.0)
    k = 11
    a = np.zeros((16,) * 3, dtype=complex)
    a[k, 8, 8] = 1.0
    psi = to_position(a)[:, 8, 8]
    q, p = spec.positions(), spec.momenta()[k]
    ratio = psi / np.exp(1j * q * p)
    assert np.allclose(ratio, ratio[0], atol=1e-14)


def test_norm_preserved_per_factor(state):
    trace = []
    apply_factorized_unitary(state, PRM, trace=trace)
    assert len(trace) == 12
    for label, before, after in trace:
        assert abs(after - before) <= 1e-12 * before, label


def test_kappa_zero_equals_free_factors(state):
    prm = PRM.replace(kappa=0.0)
    full = apply_factorized_unitary(state, prm).amplitudes
    free = apply_factorized_unitary(state, prm, sequence=free_factor_exponents()).amplitudes
    assert np.abs(full - free).max() <= 1e-14


def test_kappa_zero_trotter_exact_in_one_step(state):
    prm = PRM.replace(kappa=0.0)
    one = trotter_reference(state, prm, 1).amplitudes
    assert np.abs(one - apply_factorized_unitary(state, prm).amplitudes).max() <= 1e-14


def test_beta_zero_equals_ak_sequence(state):
    prm = PRM.replace(beta=0.0)
    a = apply_factorized_unitary(state, prm).amplitudes
    b = apply_factorized_unitary(state, prm, sequence=ak_factor_exponents(beta_cut=0)).amplitudes
    assert np.abs(a - b).max() <= 1e-14


def test_trotter_order_two(state):
    report = trotter_convergence(state, PRM.replace(beta=0.0), (50, 100, 200))
    assert report.monotone
    assert report.order == pytest.approx(2.0, abs=0.1)


def test_trotter_extrapolation_matches_factorized(state):
    ref = apply_factorized_unitary(state, PRM)
    assert compare_states(trotter_extrapolated(state, PRM, 100), ref)["l2_relative"] <= 1e-6


def test_trotter_rejects_zero_steps(state):
    with pytest.raises(ValueError):
        trotter_reference(state, PRM, 0)


def test_leak_detected():
    spec = GridSpec(32, 4.0)
    wide = InitialState.product(*(GaussianPacket(width=0.3),) * 3)
    with pytest.raises(GridTooSmallError) as info:
        wide.on_grid(spec)
    assert info.value.suggestion.n == 64


def test_leak_detected_during_evolution():
    spec = GridSpec(64, 8.0)
    st = InitialState.product().on_grid(spec)
    with pytest.raises(GridTooSmallError):
        apply_factorized_unitary(st, PRM.replace(T=0.8))


def test_shape_mismatch_rejected():
    with pytest.raises(ValueError):
        GridState(SPEC, np.zeros((32,) * 3))


def test_save_load_round_trip(tmp_path, state):
    raw, side = save_state(state, tmp_path / "psi")
    assert raw.stat().st_size == 16 * SPEC.n**3
    assert '"byteorder": "little"' in side.read_text()
    back = load_state(tmp_path / "psi")
    assert back.spec == SPEC
    np.testing.assert_array_equal(back.amplitudes, state.amplitudes)


def test_load_rejects_truncated_binary(tmp_path, state):
    raw, _ = save_state(state, tmp_path / "psi")
    raw.write_bytes(raw.read_bytes()[:-16])
    with pytest.raises(ValueError):
        load_state(tmp_path / "psi")
