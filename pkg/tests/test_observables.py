import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nvpump import (
    DEFAULT_RATES,
    ReadoutConfig,
    basis_state,
    fluorescence_rate,
    make_pulse_train,
    polarization,
    rabi_contrast,
    rabi_signal,
    readout_counts,
    relax_to_ground,
    run_schedule,
    steady_state_eigen,
    thermal_state,
)
from nvpump.errors import BadParameterError, UnsupportedStateError
from oracles import NOMINAL_RATES, literal_matrix, trapezoid_integral

from conftest import states

FLUOR = [0, 0, 0.4396, 0.4396, 0, 0]
# trapezoid rule (1e-3 ns) on the RK4 trajectory, 300 ns readout
COUNTS_MS0_300 = 44.88612653019746


def ground(p1):
    return np.array([p1, 1 - p1, 0, 0, 0, 0])


def test_polarization_is_p1():
    assert polarization(thermal_state()) == pytest.approx(1 / 3)
    assert polarization(basis_state(1)) == 1.0


def test_steady_polarization_range():
    p = polarization(steady_state_eigen(4, 150))
    assert 1 / 3 < p <= 1
    assert p == pytest.approx(0.8655002163531199, abs=1e-8)  # RK4 oracle steady state


def test_fluorescence_rate():
    assert fluorescence_rate(ground(0.7)) == 0.0
    assert fluorescence_rate(basis_state(3)) == pytest.approx(0.4396)
    assert fluorescence_rate([0, 0, 0.5, 0.5, 0, 0]) == pytest.approx(0.4396)


def test_readout_is_spin_dependent():
    cfg = ReadoutConfig(300.0)
    assert readout_counts(basis_state(1), cfg) > readout_counts(basis_state(2), cfg)


def test_readout_vanishes_for_short_window():
    assert readout_counts(basis_state(1), ReadoutConfig(1e-9)) < 1e-9


def test_readout_matches_quadrature():
    got = readout_counts(basis_state(1), ReadoutConfig(300.0))
    ref = trapezoid_integral(literal_matrix(NOMINAL_RATES, True), basis_state(1), FLUOR, 300.0)
    assert got == pytest.approx(ref, rel=1e-6)
    assert got == pytest.approx(COUNTS_MS0_300, rel=1e-6)


@pytest.mark.parametrize("cfg", [dict(t_read=0), dict(t_read=-1), dict(collection_eff=0), dict(collection_eff=1.5)])
def test_readout_config_validation(cfg):
    with pytest.raises(BadParameterError):
        ReadoutConfig(**cfg)


@given(states(), states(), st.floats(0, 1))
def test_readout_linear(p, q, a):
    cfg = ReadoutConfig(300.0)
    mix = a * p + (1 - a) * q
    assert readout_counts(mix, cfg) == pytest.approx(a * readout_counts(p, cfg) + (1 - a) * readout_counts(q, cfg), abs=1e-10)


def test_rabi_rotation_cases():
    p = ground(0.9)
    np.testing.assert_allclose(rabi_signal(p, 0.0), p)
    np.testing.assert_allclose(rabi_signal(p, math.pi), ground(0.1), atol=1e-15)
    np.testing.assert_allclose(rabi_signal(p, math.pi / 2), ground(0.5), atol=1e-15)


def test_rabi_needs_ground_state():
    with pytest.raises(UnsupportedStateError):
        rabi_signal([0.3, 0.6, 0.1, 0, 0, 0], 1.0)


@given(states(support=2), st.floats(-10, 10))
def test_rabi_preserves_ground_total(p, theta):
    q = rabi_signal(p, theta)
    assert q[0] + q[1] == pytest.approx(p[0] + p[1], abs=1e-15)
    assert q[0] == pytest.approx(rabi_signal(p, -theta)[0], abs=1e-15)


@given(states(support=2), st.integers(-4, 4))
def test_rabi_inverts_at_multiples_of_pi(p, k):
    q = rabi_signal(p, k * math.pi)
    np.testing.assert_allclose(rabi_signal(q, -k * math.pi), p, atol=1e-12)


@pytest.mark.xfail(strict=True, reason="population mixing is not invertible; see decisions")
def test_rabi_inverts_literal():
    p = ground(0.9)
    np.testing.assert_allclose(rabi_signal(rabi_signal(p, 1.0), -1.0), p, atol=1e-12)


def test_relax_to_ground():
    p = steady_state_eigen(4, 150)
    assert p[2:].sum() > 1e-4
    q = relax_to_ground(p)
    assert q[2:].max() == 0.0
    assert q[0] > p[0]


def test_mixed_state_has_no_contrast():
    assert rabi_contrast(ground(0.5)).contrast == pytest.approx(0.0, abs=1e-12)


def test_contrast_curve_fields():
    curve = rabi_contrast(ground(0.9))
    assert len(curve.theta) >= 32
    assert curve.i_max >= curve.i_min >= 0
    assert 0 <= curve.contrast <= 1
    assert curve.contrast == pytest.approx((curve.i_max - curve.i_min) / curve.i_max)
    assert curve.residual < 1e-6 * curve.amplitude


def test_contrast_needs_enough_points():
    with pytest.raises(BadParameterError):
        rabi_contrast(ground(0.9), n_points=16)


def test_contrast_independent_of_collection_efficiency():
    a = rabi_contrast(ground(0.8), ReadoutConfig(300.0, 1.0)).contrast
    b = rabi_contrast(ground(0.8), ReadoutConfig(300.0, 0.013)).contrast
    assert a == pytest.approx(b, abs=1e-12)


def test_short_pulse_train_beats_single_pulse_contrast():
    short = rabi_contrast(relax_to_ground(steady_state_eigen(4, 150))).contrast
    single = rabi_contrast(relax_to_ground(run_schedule(make_pulse_train(300, 150, 1)).final_state)).contrast
    assert short > single


def test_contrast_amplitude_is_affine_in_polarization():
    # the fitted swing I_max - I_min is what scales linearly with P1 - P2
    swing = [rabi_contrast(ground(p1)).i_max - rabi_contrast(ground(p1)).i_min for p1 in (0.6, 0.8, 1.0)]
    assert swing[2] - swing[1] == pytest.approx(swing[1] - swing[0], abs=1e-9)


def test_contrast_is_increasing_above_half_polarization():
    c = [rabi_contrast(ground(p1)).contrast for p1 in (0.6, 0.7, 0.8, 0.9, 1.0)]
    assert all(a < b for a, b in zip(c, c[1:]))


@pytest.mark.xfail(strict=True, reason="(I_max - I_min)/I_max is a ratio in P1, not affine; see decisions")
def test_contrast_affine_in_polarization_literal():
    c = [rabi_contrast(ground(p1)).contrast for p1 in (0.4, 0.6, 0.8, 1.0)]
    d = np.diff(c)
    assert np.abs(d - d[0]).max() < 1e-9
