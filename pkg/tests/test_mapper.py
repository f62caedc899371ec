import numpy as np
import pytest
from conftest import random_crossbar
from hypothesis import given, settings
from hypothesis import strategies as st

from rramvmm.crossbar import IDEAL, SNEAK, ReadMode, default_feedback_resistance
from rramvmm.device import IDEAL_DISTRIBUTION, DeviceState, ResistanceDistribution, conductance_siemens
from rramvmm.errors import ParameterError, ProgramFailure
from rramvmm.mapper import (
    MappingPlan,
    Polarity,
    hardware_forward_dataset,
    phase_count,
    plan_mapping,
    program_plan,
    schedule_inference,
)
from rramvmm.trainer import forward

H, L = int(DeviceState.HRS), int(DeviceState.LRS)
FIG2 = np.array([[-1, 1, 1, -1], [1, 1, -1, -1]])


def test_fig2_layout():
    plan = plan_mapping(FIG2, 4, 4)
    assert len(plan.slots) == 16 and plan.phases == 1
    t = plan.target_states(0)
    assert t[0].tolist() == [H, L, L, H]
    assert t[1].tolist() == [L, H, H, L]
    assert t[2].tolist() == [L, L, H, H]
    assert t[3].tolist() == [H, H, L, L]
    assignments = plan.row_assignments()
    assert assignments[(0, 0)] == (0, Polarity.PLUS, 0)
    assert assignments[(0, 3)] == (1, Polarity.MINUS, 0)


def test_wdbc_shape_mapping():
    plan = plan_mapping(np.ones((2, 30)), 8, 8)
    assert plan.n_partitions == 4
    widths = [b - a for a, b in map(plan.partition_bounds, range(4))]
    assert widths == [8, 8, 8, 6]
    assert len(plan.row_assignments()) == 16  # 8 pairs
    assert plan.phases == 2
    assert len(plan.slots) == 120


def test_minimal_mapping():
    plan = plan_mapping([[1]], 2, 1)
    assert len(plan.slots) == 2 and plan.phases == 1


def test_mapping_errors():
    with pytest.raises(ParameterError):
        plan_mapping([[1]], 1, 4)
    with pytest.raises(ParameterError):
        plan_mapping([[0.5]], 2, 2)


@given(k=st.integers(1, 4), f=st.integers(1, 40), rows=st.integers(2, 12), cols=st.integers(1, 12))
def test_phase_count_and_utilization(k, f, rows, cols):
    w = np.where(np.random.default_rng(k * f).random((k, f)) < 0.5, -1, 1)
    plan = plan_mapping(w, rows, cols)
    assert plan.phases == phase_count(k, f, rows, cols)
    assert len(plan.slots) == 2 * k * f
    cells = {(s.phase, s.row, s.col) for s in plan.slots}
    assert len(cells) == len(plan.slots)
    # exactly one LRS per complementary pair
    pairs = {}
    for s in plan.slots:
        pairs.setdefault((s.k, s.p, s.col), []).append(s.target)
    assert all(sorted(v) == [DeviceState.HRS, DeviceState.LRS] for v in pairs.values())


def test_plan_roundtrip():
    plan = plan_mapping(FIG2, 4, 4)
    assert MappingPlan.from_dict(plan.to_dict()) == plan


def test_program_fig2_sigma0():
    plan = plan_mapping(FIG2, 4, 4)
    (xbar,), report = program_plan(plan, IDEAL_DISTRIBUTION, 0)
    np.testing.assert_array_equal(xbar.states, plan.target_states(0))
    expected = np.where(xbar.states == L, 2.0, 50.0)
    np.testing.assert_array_equal(xbar.resistance, expected)
    assert report.summary() == {"programmed": 8, "failures": 0, "total_attempts": 8}


def test_program_empty_plan():
    plan = plan_mapping(np.zeros((0, 3)), 4, 4)
    (xbar,), report = program_plan(plan, IDEAL_DISTRIBUTION, 0)
    assert not xbar.states.any() and not report.entries


def test_program_default_dist_window_or_logged():
    plan = plan_mapping(np.ones((2, 30)), 8, 8)
    dist = ResistanceDistribution()
    lo, hi = dist.verify_window(DeviceState.LRS)
    xbars, report = program_plan(plan, dist, 1)
    for e in report.entries:
        r = xbars[e["phase"]].resistance[e["row"], e["col"]]
        assert e["ok"] == (lo <= r <= hi)
        assert e["resistance_mohm"] == r


def test_program_abort_policy():
    dist = ResistanceDistribution(sigma_lrs=2.0, max_overlap=1.0)
    plan = plan_mapping(np.ones((1, 8)), 2, 8)
    with pytest.raises(ProgramFailure):
        program_plan(plan, dist, 0, max_attempts=1, on_failure="abort")
    _, report = program_plan(plan, dist, 0, max_attempts=1)
    assert report.failures


def _program_ideal(w, rows, cols, **kw):
    plan = plan_mapping(w, rows, cols)
    xbars, _ = program_plan(plan, IDEAL_DISTRIBUTION, 0, **kw)
    return plan, xbars


def test_zero_input():
    plan, xbars = _program_ideal(FIG2, 4, 4)
    s = schedule_inference(plan, xbars, np.zeros(4, dtype=int))
    assert s.score.tolist() == [0.0, 0.0] and s.decision == 0


def test_single_weight_closed_form():
    plan, (xbar,) = _program_ideal([[1]], 2, 1)
    s = schedule_inference(plan, [xbar], [255])
    unit = xbar.read_voltage * xbar.r_f * (conductance_siemens(2.0) - conductance_siemens(50.0))
    assert s.score[0] == pytest.approx(255 * unit, rel=1e-12)


def test_input_mismatch():
    plan, xbars = _program_ideal(FIG2, 4, 4)
    with pytest.raises(ParameterError):
        schedule_inference(plan, xbars, np.zeros(5, dtype=int))
    with pytest.raises(ParameterError):
        schedule_inference(plan, [], np.zeros(4, dtype=int))


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**31), k=st.integers(1, 4), f=st.integers(1, 20),
       rows=st.integers(2, 16), cols=st.integers(1, 16))
def test_ideal_equivalence_property(seed, k, f, rows, cols):
    rng = np.random.default_rng(seed)
    w = np.where(rng.random((k, f)) < 0.5, -1, 1)
    q = rng.integers(0, 256, f)
    plan, xbars = _program_ideal(w, rows, cols)
    assert schedule_inference(plan, xbars, q).decision == int(np.argmax(forward(q[None], w)[0]))


def test_antisymmetry():
    rng = np.random.default_rng(3)
    w = np.where(rng.random((3, 10)) < 0.5, -1, 1)
    q = rng.integers(0, 256, 10)
    a = schedule_inference(*_program_ideal(w, 4, 4), q).score
    b = schedule_inference(*_program_ideal(-w, 4, 4), q).score
    np.testing.assert_allclose(b, -a, rtol=1e-12)


@pytest.mark.parametrize("line", [0.0, 50.0])
@pytest.mark.parametrize("mode", [IDEAL, SNEAK, ReadMode("sneak", "grounded")])
def test_batch_path_matches_literal_schedule(mode, line):
    rng = np.random.default_rng(4)
    w = np.where(rng.random((2, 11)) < 0.5, -1, 1)
    plan = plan_mapping(w, 4, 4)
    xbars, _ = program_plan(plan, ResistanceDistribution(), 5, line_resistance=line)
    q = rng.integers(0, 256, (6, 11))
    preds, scores, diag = hardware_forward_dataset(plan, xbars, q, mode)
    for i in range(6):
        lit = schedule_inference(plan, xbars, q[i], mode)
        np.testing.assert_allclose(scores[i].partial, lit.partial, rtol=1e-9, atol=1e-15)
        assert preds[i] == lit.decision
    if mode.mode.value == "sneak":
        assert diag["factorizations"] == len(plan.row_assignments())


def test_batch_path_counts_clipping():
    rng = np.random.default_rng(6)
    plan = plan_mapping(np.ones((1, 4)), 2, 4)
    xbars, _ = program_plan(plan, IDEAL_DISTRIBUTION, 0, r_f=1e7)
    q = rng.integers(0, 256, (3, 4))
    _, scores, diag = hardware_forward_dataset(plan, xbars, q)
    assert diag["clipped_cycles"] > 0
    for i in range(3):
        np.testing.assert_allclose(scores[i].partial, schedule_inference(plan, xbars, q[i]).partial, rtol=1e-9)


def test_toy_set_ideal_matches_software():
    rng = np.random.default_rng(7)
    w = np.where(rng.random((2, 6)) < 0.5, -1, 1)
    q = rng.integers(0, 256, (50, 6))
    plan, xbars = _program_ideal(w, 8, 8)
    preds, _, _ = hardware_forward_dataset(plan, xbars, q)
    np.testing.assert_array_equal(preds, np.argmax(forward(q, w), axis=1))


def test_default_feedback_keeps_full_scale_in_rail():
    dist = ResistanceDistribution()
    r_f = default_feedback_resistance(8, dist)
    assert 8 * 0.8 * conductance_siemens(2.0) * r_f == pytest.approx(0.8 * 3.3)
