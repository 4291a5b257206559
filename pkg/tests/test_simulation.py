import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from consensus_rate import (
    DelayTerm,
    DimensionMismatch,
    HorizonExceeded,
    MatrixSequence,
    NoSchedule,
    NotPeriodic,
    ParamOutOfRange,
    RowSumViolation,
    augment_delays,
    empirical_rate,
    find_tree_schedule,
    simulate,
    spectral_rate_periodic,
)
from consensus_rate.experiments import sequential_index
from consensus_rate.systems import (
    DELAY_SYSTEMS,
    chain_sequence,
    delay_system,
    finite_time_sequence,
    stationary_sequence,
    two_periodic_sequence,
)

from helpers import random_sequence


def test_constant_state_stays_constant():
    traj = simulate(stationary_sequence(0.1), np.full(3, 2.5), 10)
    assert np.all(traj.diameters == 0.0)
    assert traj.horizon == 10 and traj.states.shape == (11, 3)


def test_finite_time_consensus():
    traj = simulate(finite_time_sequence(4), [1.0, 0.0, 0.0], 2)
    np.testing.assert_array_equal(traj.states[2], [1.0, 1.0, 1.0])
    assert traj.diameters[2] == 0.0


def test_simulate_horizon_and_shape_errors():
    with pytest.raises(HorizonExceeded):
        simulate(finite_time_sequence(4), [1.0, 0.0, 0.0], 5)
    with pytest.raises(DimensionMismatch):
        simulate(stationary_sequence(0.1), [1.0, 0.0], 2)


def test_simulate_from_later_start():
    seq = two_periodic_sequence()
    traj = simulate(seq, [0.0, 1.0, 2.0], 1, t0=1)
    np.testing.assert_allclose(traj.states[1], seq[1] @ [0.0, 1.0, 2.0])


def test_empirical_rate_examples():
    rate = empirical_rate(stationary_sequence(0.1), 64, 32, seed=0)
    assert rate.value == pytest.approx(1 / 3 - 0.1, abs=0.02)
    assert rate.initial_states == 35
    ident = MatrixSequence.periodic([np.eye(3)])
    assert empirical_rate(ident, 20, 4, seed=1).value == 1.0


def test_empirical_rate_is_deterministic():
    seq = two_periodic_sequence()
    a = empirical_rate(seq, 32, 8, seed=5)
    b = empirical_rate(seq, 32, 8, seed=5)
    assert a == b


def test_empirical_rate_survives_long_horizons():
    # plain ratios would underflow to zero long before t = 2000
    rate = empirical_rate(stationary_sequence(0.1), 2000, 4, seed=0)
    assert rate.value == pytest.approx(1 / 3 - 0.1, abs=1e-3)


def test_empirical_rate_finite_time():
    assert empirical_rate(finite_time_sequence(8), 8, 4).value == 0.0


def test_empirical_rate_arguments():
    with pytest.raises(ParamOutOfRange):
        empirical_rate(stationary_sequence(0.1), 10, 0)
    with pytest.raises(HorizonExceeded):
        empirical_rate(finite_time_sequence(4), 10, 2)


def test_spectral_rate_examples():
    assert spectral_rate_periodic(stationary_sequence(0.1)) == pytest.approx(1 / 3 - 0.1, abs=1e-12)
    assert spectral_rate_periodic(chain_sequence(4, 0.3)) == pytest.approx(0.7, abs=1e-9)
    with pytest.raises(NotPeriodic):
        spectral_rate_periodic(finite_time_sequence(4))


def test_spectral_rate_two_periodic_against_exact_eigenvalues():
    # exact eigenvalues of the period product are 1, -1/2 and 0
    half = sp.Rational(1, 2)
    even = sp.Matrix([[half, half, 0], [half, half, 0], [0, 0, 1]])
    odd = sp.Matrix([[0, half, half], [half, 0, half], [1, 0, 0]])
    moduli = sorted((abs(ev) for ev in (odd * even).eigenvals()), reverse=True)
    exact = float(sp.sqrt(moduli[1]))
    assert exact == pytest.approx(1 / math.sqrt(2), abs=1e-15)
    assert spectral_rate_periodic(two_periodic_sequence()) == pytest.approx(exact, abs=1e-12)


def test_spectral_rate_one_agent():
    assert spectral_rate_periodic(MatrixSequence.periodic([[[1.0]]])) == 0.0


def test_augment_delays_matches_displayed_matrices():
    h, q = 0.5, 0.25
    shift = [[1, 0, 0, 0], [0, 1, 0, 0]]
    expected = {
        "simb": [[h, h, 0, 0], [0, 0, h, h]] + shift,
        "simc": [[q, 0, q, h], [h, 0, 0, h]] + shift,
        "simd": [[0, h, h, 0], [h, 0, 0, h]] + shift,
    }
    for name, matrix in expected.items():
        np.testing.assert_array_equal(delay_system(name)[0], matrix)
    np.testing.assert_array_equal(delay_system("sima")[0], [[h, h], [h, h]])


def test_augment_delays_two_step_history():
    seq = augment_delays(1, [DelayTerm(0, 0, 2, 1.0)])
    np.testing.assert_array_equal(seq[0], [[0, 0, 1], [1, 0, 0], [0, 1, 0]])


def test_augment_delays_errors():
    with pytest.raises(RowSumViolation):
        augment_delays(2, [(0, 0, 0, 0.5), (1, 1, 0, 1.0)])
    with pytest.raises(DimensionMismatch):
        augment_delays(2, [(0, 2, 0, 1.0), (1, 1, 0, 1.0)])
    with pytest.raises(ParamOutOfRange):
        augment_delays(1, [(0, 0, -1, 1.0)])
    with pytest.raises(ParamOutOfRange):
        delay_system("sime")


def test_delay_connectivity_indices():
    indices = {}
    for name in DELAY_SYSTEMS:
        part = sequential_index(delay_system(name))
        indices[name] = None if part is None else part.max_gap
    assert indices == {"sima": 1, "simb": 3, "simc": 2, "simd": None}
    seq = delay_system("simd")
    for root in range(4):
        with pytest.raises(NoSchedule):
            find_tree_schedule(seq, (0, 64), root)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 6), st.integers(1, 12))
def test_diameter_never_grows(seed, n, horizon):
    rng = np.random.default_rng(seed)
    seq = random_sequence(rng, n, horizon, density=0.4)
    traj = simulate(seq, rng.normal(scale=10, size=n), horizon)
    assert np.all(np.diff(traj.diameters) <= 1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 5), st.integers(1, 3))
def test_spectral_rate_is_at_most_one(seed, n, period):
    seq = random_sequence(np.random.default_rng(seed), n, period, periodic=True)
    assert 0.0 <= spectral_rate_periodic(seq) <= 1.0 + 1e-9
