import numpy as np
import pytest
from conftest import random_crossbar
from hypothesis import given, settings
from hypothesis import strategies as st

from rramvmm.crossbar import (
    IDEAL,
    SNEAK,
    CrossbarState,
    ReadMode,
    default_feedback_resistance,
    ideal_read_row,
    init_crossbar,
    program_cell,
    read_row,
    sensed_current,
)
from rramvmm.device import DeviceState, ResistanceDistribution, sample_resistance
from rramvmm.errors import ParameterError, ProgramFailure


def test_init_all_hrs_at_median(ideal_dist):
    x = init_crossbar(8, 8, ideal_dist, 0)
    assert x.shape == (8, 8)
    assert np.all(x.states == DeviceState.HRS)
    assert np.all(x.resistance == ideal_dist.median_hrs)
    assert np.all(x.program_count == 1)


def test_init_default_dist_all_hrs():
    x = init_crossbar(8, 8, ResistanceDistribution(), 0)
    assert np.all(x.states == DeviceState.HRS)
    assert len(np.unique(x.resistance)) == 64


def test_init_minimal_and_invalid(ideal_dist):
    assert init_crossbar(1, 1, ideal_dist).shape == (1, 1)
    with pytest.raises(ParameterError):
        init_crossbar(0, 4, ideal_dist)


def test_program_cell_single_attempt(ideal_dist):
    x = init_crossbar(2, 2, ideal_dist)
    assert program_cell(x, 1, 0, DeviceState.LRS, 0, (1.0, 3.0)) == 1
    assert x.states[1, 0] == DeviceState.LRS and x.resistance[1, 0] == 2.0
    assert x.program_count[1, 0] == 2


def test_program_cell_impossible_window(ideal_dist):
    x = init_crossbar(2, 2, ideal_dist)
    with pytest.raises(ProgramFailure) as err:
        program_cell(x, 0, 1, DeviceState.LRS, 0, (3.0, 4.0), max_attempts=5)
    assert err.value.attempts == 5
    assert err.value.resistance == 2.0
    assert x.program_count[0, 1] == 6


def test_program_cell_success_rate_matches_window_mass():
    dist = ResistanceDistribution(sigma_lrs=0.5, sigma_hrs=0.3)
    window = (dist.median_lrs / 2, dist.median_lrs * 2)
    # oracle: in-window mass estimated from the sampler itself
    rng = np.random.default_rng(11)
    draws = np.array([sample_resistance(DeviceState.LRS, dist, rng) for _ in range(100_000)])
    mass = np.mean((draws >= window[0]) & (draws <= window[1]))
    rng = np.random.default_rng(12)
    ok = 0
    n = 10_000
    for _ in range(n):
        x = init_crossbar(1, 1, dist, rng)
        try:
            program_cell(x, 0, 0, DeviceState.LRS, rng, window, max_attempts=1)
            ok += 1
        except ProgramFailure:
            pass
    assert abs(ok / n - mass) < 0.02


def test_program_cell_bounds(ideal_dist):
    with pytest.raises(IndexError):
        program_cell(init_crossbar(2, 2, ideal_dist), 2, 0, DeviceState.LRS)


def test_ideal_read_zero_input(ideal_dist):
    x = init_crossbar(4, 4, ideal_dist)
    assert ideal_read_row(x, 2, np.zeros(4)) == (0.0, 0.0)


def test_ideal_read_single_element():
    x = CrossbarState([[1]], [[2.0]], [[1]], ResistanceDistribution(), r_f=1e6)
    current, v = ideal_read_row(x, 0, [0.8])
    assert current == pytest.approx(0.4e-6, rel=1e-12)
    assert v == pytest.approx(0.4, rel=1e-12)


def test_ideal_read_matches_dot_product():
    rng = np.random.default_rng(5)
    x = random_crossbar(rng, 1, 4)
    v = rng.uniform(-1, 1, 4)
    g = 1.0 / (x.resistance[0] * 1e6)
    expected = sum(g[i] * v[i] for i in range(4))
    assert ideal_read_row(x, 0, v)[0] == pytest.approx(expected, rel=1e-12)


def test_ideal_read_errors(ideal_dist):
    x = init_crossbar(2, 3, ideal_dist)
    with pytest.raises(IndexError):
        ideal_read_row(x, 5, np.zeros(3))
    with pytest.raises(ParameterError):
        ideal_read_row(x, 0, np.zeros(2))


@settings(max_examples=60, deadline=None)
@given(
    seed=st.integers(0, 2**31),
    rows=st.integers(1, 64),
    cols=st.integers(1, 64),
    a=st.floats(-3, 3),
    b=st.floats(-3, 3),
)
def test_ideal_read_linear_and_matches_dense(seed, rows, cols, a, b):
    rng = np.random.default_rng(seed)
    x = random_crossbar(rng, rows, cols)
    v1, v2 = rng.uniform(0, 1, cols), rng.uniform(0, 1, cols)
    row = int(rng.integers(rows))
    dense = x.conductance() @ v1
    assert ideal_read_row(x, row, v1)[0] == pytest.approx(dense[row], rel=1e-12)
    lhs = ideal_read_row(x, row, a * v1 + b * v2)[0]
    rhs = a * ideal_read_row(x, row, v1)[0] + b * ideal_read_row(x, row, v2)[0]
    scale = abs(a) * dense[row] + abs(b) * (x.conductance() @ v2)[row]
    assert abs(lhs - rhs) <= 1e-12 * scale


def test_argmax_invariant_under_rf_scaling():
    rng = np.random.default_rng(9)
    x = random_crossbar(rng, 6, 5)
    v = rng.uniform(0, 0.8, 5)
    base = [ideal_read_row(x, r, v)[1] for r in range(6)]
    x.r_f *= 37.5
    scaled = [ideal_read_row(x, r, v)[1] for r in range(6)]
    assert np.argmax(base) == np.argmax(scaled)
    np.testing.assert_allclose(np.array(scaled) / np.array(base), 37.5, rtol=1e-12)


def test_sneak_single_row_equals_ideal():
    rng = np.random.default_rng(2)
    x = random_crossbar(rng, 1, 6)
    v = rng.uniform(0, 0.8, 6)
    assert read_row(x, 0, v, SNEAK) == read_row(x, 0, v, IDEAL)


def test_sneak_all_lrs_4x4():
    dist = ResistanceDistribution(sigma_lrs=0, sigma_hrs=0)
    x = init_crossbar(4, 4, dist, r_f=1e6, rail=None)
    x.states[:] = DeviceState.LRS
    x.resistance[:] = dist.median_lrs
    v = np.full(4, 0.8)
    ideal = sensed_current(x, 1, v, IDEAL)
    # ideal column drivers: floating rows draw current from the sources but
    # cannot change the sensed row's voltage drop
    assert sensed_current(x, 1, v, SNEAK) == pytest.approx(ideal, rel=1e-12)
    x.line_resistance = 1e3
    assert sensed_current(x, 1, v, SNEAK) < ideal


def test_all_hrs_near_zero_current(ideal_dist):
    x = init_crossbar(4, 4, ideal_dist, r_f=1e6)
    v = np.full(4, 0.8)
    for mode in (IDEAL, SNEAK):
        assert abs(sensed_current(x, 0, v, mode)) < 1e-7


def test_rail_clipping():
    x = CrossbarState([[1]], [[2.0]], [[1]], ResistanceDistribution(), r_f=1e8, rail=3.3)
    assert read_row(x, 0, [0.8]) == 3.3


def test_default_rf_keeps_full_scale_inside_rail():
    dist = ResistanceDistribution(sigma_lrs=0, sigma_hrs=0)
    for cols in (1, 8, 16):
        x = init_crossbar(2, cols, dist)
        assert x.r_f == pytest.approx(default_feedback_resistance(cols, dist))
        x.resistance[:] = dist.median_lrs
        assert abs(ideal_read_row(x, 0, np.full(cols, 0.8))[1]) < 3.3


def test_read_mode_from_strings():
    assert ReadMode("sneak", "grounded").floating_row_policy.value == "grounded"
    with pytest.raises(ValueError):
        ReadMode("bogus")
