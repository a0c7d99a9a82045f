import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nvpump import (
    DEFAULT_RATES,
    Accumulator,
    basis_state,
    build_generator,
    propagate,
    propagate_with_accumulators,
    sample_trajectory,
    segment_propagator,
    singlet_accumulator,
    thermal_state,
)
from nvpump.errors import BadParameterError
from oracles import NOMINAL_RATES, literal_matrix, rk4_propagator, rk4_samples, trapezoid_integral

from conftest import rate_sets, states

M0 = build_generator(DEFAULT_RATES, True)
M1 = build_generator(DEFAULT_RATES, False)


@pytest.mark.parametrize("g", [M0, M1])
def test_zero_duration_is_identity(g):
    np.testing.assert_array_equal(segment_propagator(g, 0).t, np.eye(6))


def test_ground_state_frozen_without_laser():
    p = np.array([0.3, 0.7, 0, 0, 0, 0])
    np.testing.assert_allclose(propagate(M1, p, 1000.0), p, atol=1e-15)


def test_m0_4ns_matches_rk4():
    t = segment_propagator(M0, 4.0).t
    assert np.abs(t - rk4_propagator(literal_matrix(NOMINAL_RATES, True), 4.0)).max() < 1e-8


def test_m0_300ns_thermal_matches_rk4():
    p = propagate(M0, thermal_state(), 300.0)
    ref = rk4_propagator(literal_matrix(NOMINAL_RATES, True), 300.0) @ thermal_state()
    assert np.abs(p - ref).max() < 1e-8


def test_singlet_cascade_branching():
    p = propagate(M1, basis_state(5), 5000.0)
    assert p[2:].sum() < 1e-12
    assert p[0] / p[1] == pytest.approx(0.020724 / 0.013816, rel=1e-10)
    assert p[0] / p[1] == pytest.approx(1.5, rel=1e-9)


def test_negative_duration_rejected():
    with pytest.raises(BadParameterError):
        segment_propagator(M0, -1.0)


@given(rate_sets(), st.booleans(), st.floats(0, 1000))
def test_segment_propagator_is_stochastic(rates, on, dt):
    t = segment_propagator(build_generator(rates, on), dt).t
    assert np.abs(t.sum(axis=0) - 1).max() < 1e-10
    assert t.min() >= 0 and t.max() <= 1 + 1e-10


@given(states(), st.booleans(), st.floats(0, 1000))
def test_conservation_and_positivity(p, on, dt):
    g = M0 if on else M1
    q = propagate(g, p, dt)
    assert abs(q.sum() - p.sum()) < 1e-10
    assert q.min() >= -1e-12


@given(states(), st.booleans(), st.floats(0, 500), st.floats(0, 500))
def test_semigroup(p, on, a, b):
    g = M0 if on else M1
    np.testing.assert_allclose(propagate(g, p, a + b), propagate(g, propagate(g, p, a), b), atol=1e-10, rtol=0)


def test_accumulators_unchanged_at_zero_duration():
    acc = Accumulator((1, 2, 3, 4, 5, 6), value=7.0)
    q, (out,) = propagate_with_accumulators(M0, thermal_state(), 0.0, [acc])
    assert out.value == 7.0
    np.testing.assert_array_equal(q, thermal_state())


def test_no_singlet_dwell_without_laser_from_ground():
    _, (acc,) = propagate_with_accumulators(M1, basis_state(1), 100.0, [singlet_accumulator()])
    assert acc.value == 0.0


def test_singlet_dwell_matches_quadrature():
    _, (acc,) = propagate_with_accumulators(M0, thermal_state(), 50.0, [singlet_accumulator()])
    ref = trapezoid_integral(literal_matrix(NOMINAL_RATES, True), thermal_state(), [0, 0, 0, 0, 1, 1], 50.0)
    assert acc.value == pytest.approx(ref, rel=1e-6)
    # frozen from the quadrature oracle
    assert acc.value == pytest.approx(21.649988452231167, rel=1e-6)


@given(states(), st.floats(1, 300))
def test_accumulator_nonnegative_and_additive(p, dt):
    accs = [singlet_accumulator(), Accumulator((0, 0, 0.4396, 0.4396, 0, 0))]
    q, full = propagate_with_accumulators(M0, p, dt, accs)
    mid, half = propagate_with_accumulators(M0, p, dt / 2, accs)
    _, both = propagate_with_accumulators(M0, mid, dt / 2, half)
    for a, b in zip(full, both):
        assert a.value >= 0
        assert a.value == pytest.approx(b.value, rel=1e-9, abs=1e-12)


def test_sample_times():
    out = sample_trajectory(M0, thermal_state(), 10.0, 5.0)
    assert [t for t, _ in out] == [0.0, 5.0, 10.0]


def test_sample_times_include_endpoint():
    out = sample_trajectory(M0, thermal_state(), 10.0, 3.0)
    assert [t for t, _ in out] == pytest.approx([0, 3, 6, 9, 10])


def test_sample_step_rejected():
    with pytest.raises(BadParameterError):
        sample_trajectory(M0, thermal_state(), 10.0, 0.0)


def test_samples_satisfy_semigroup():
    out = sample_trajectory(M0, thermal_state(), 50.0, 2.5)
    step = segment_propagator(M0, 2.5).t
    for (_, a), (_, b) in zip(out, out[1:]):
        assert np.abs(step @ a - b).max() < 1e-10


def test_samples_match_rk4_pointwise():
    out = sample_trajectory(M0, thermal_state(), 300.0, 1.0)
    ref = rk4_samples(literal_matrix(NOMINAL_RATES, True), thermal_state(), 300.0, 1.0)
    got = np.array([p for _, p in out])
    assert got.shape == ref.shape
    assert np.abs(got - ref).max() < 1e-8


def test_samples_match_direct_propagation():
    for t, p in sample_trajectory(M1, basis_state(4), 40.0, 7.0):
        np.testing.assert_allclose(p, propagate(M1, basis_state(4), t), atol=1e-12)
