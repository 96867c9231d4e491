import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from skillopt.bt import TickStatus, bind
from skillopt.rewards import RewardError, RewardSpec, evaluate, reward_value
from skillopt.sim.engine import EpisodeTrace, run_episode
from skillopt.sim.world import sample_world

DT = 0.01


def make_trace(rows, status=TickStatus.SUCCESS, goal=(0.8, 0.0, 0.0)):
    rec = np.array(rows, dtype=float)
    return EpisodeTrace(rec, np.zeros(len(rec), bool), np.zeros(len(rec), bool), status, DT, goal=goal,
                        poses={"goal1": (0.8, 0.0, 0.0, 0.0), "box1": (0.5, 0.0, 0.0, 0.0)})


# t, ref xyz, act xyz, obj x y yaw, F xyz
THREE_TICKS = [
    [0.01, 0.1, 0.0, 0.0, 0.1, 0.0, 0.0, 0.7, 0.0, 0.0, 1.0, 0.0, 2.0],
    [0.02, 0.2, 0.0, 0.0, 0.19, 0.0, 0.0, 0.75, 0.01, 0.1, 0.0, 0.0, 0.0],
    [0.03, 0.3, 0.04, 0.0, 0.27, 0.0, 0.0, 0.8, 0.03, 0.2, 3.0, 4.0, 1.0],
]


def test_push_specs_on_hand_trace():
    trace = make_trace(THREE_TICKS)
    specs = [RewardSpec("ObjectPoseDivergence", 2.0, 0, {"goal": "goal1", "alpha": 0.1}),
             RewardSpec("EeRefDistance", 3.0, 1)]
    # divergence 0.03 + 0.1 * 0.2; ref gaps 0, 0.01, 0.05 summed times dt
    assert evaluate(trace, specs, 2) == pytest.approx([2.0 * 0.05, 3.0 * 0.0006], abs=1e-15)


def test_wrench_on_hand_trace():
    assert reward_value(RewardSpec("AppliedWrench"), make_trace(THREE_TICKS)) == pytest.approx(-0.09)


def test_box_and_goal_distances():
    trace = make_trace(THREE_TICKS)
    box = reward_value(RewardSpec("EeBoxDistance", params={"box": (0.5, 0.0, 0.0)}), trace)
    assert box == pytest.approx(-(0.4 + 0.31 + 0.23) * DT)
    assert reward_value(RewardSpec("EeGoalDistance", params={"goal": "goal1"}), trace) == pytest.approx(-0.53)


def test_identity_and_zero_cases():
    rows = [r[:] for r in THREE_TICKS]
    rows[-1][7:10] = [0.8, 0.0, 0.0]
    for r in rows:
        r[10:13] = [0.0, 0.0, 0.0]
    trace = make_trace(rows)
    assert reward_value(RewardSpec("ObjectPoseDivergence"), trace) == 0.0
    assert reward_value(RewardSpec("AppliedWrench"), trace) == 0.0
    assert reward_value(RewardSpec("TaskCompletion"), trace) == 1.0
    assert reward_value(RewardSpec("TaskCompletion"), make_trace(rows, TickStatus.FAILURE)) == 0.0


def test_unused_objective_is_zero():
    y = evaluate(make_trace(THREE_TICKS), [RewardSpec("TaskCompletion", 5.0, 0)], 2)
    assert y.tolist() == [-5.0, 0.0]


def test_errors():
    with pytest.raises(RewardError):
        RewardSpec("Smoothness")
    with pytest.raises(RewardError):
        reward_value(RewardSpec("EeGoalDistance"), make_trace(THREE_TICKS))
    with pytest.raises(RewardError):
        evaluate(make_trace(THREE_TICKS), [RewardSpec("TaskCompletion", 1.0, 2)], 2)


def test_peg_specs_on_success_trace(peg_config, peg_pipeline):
    w = sample_world(peg_config.task, 0, 0)
    w = w.with_(believed_pose=w.true_pose)
    tree = bind(peg_pipeline.tree, {"1.force": 15.0, "1.radius": 0.005, "1.velocity": 0.05})
    trace = run_episode(tree, w, peg_config.controller, 3000, scene=peg_config.scene)
    assert trace.success
    rec = trace.records
    W = float(np.sum(np.abs(rec[:, 12]) + np.hypot(rec[:, 10], rec[:, 11])) * DT)
    assert evaluate(trace, peg_config.rewards, 2) == pytest.approx([-100.0, W])


weights = st.floats(-10, 10, allow_nan=False)


@given(weights, st.sampled_from(["EeRefDistance", "AppliedWrench", "EeBoxDistance", "ObjectPoseDivergence"]))
def test_linear_and_additive(w, kind):
    trace = make_trace(THREE_TICKS)
    params = {"box": "box1"} if kind == "EeBoxDistance" else {}
    one = evaluate(trace, [RewardSpec(kind, w, 0, params)], 1)
    two = evaluate(trace, [RewardSpec(kind, 2 * w, 0, params)], 1)
    halves = evaluate(trace, [RewardSpec(kind, w / 2, 0, params)] * 2, 1)
    assert two[0] == pytest.approx(2 * one[0], abs=1e-12)
    assert halves[0] == pytest.approx(one[0], abs=1e-12)


@given(st.floats(-math.pi, math.pi), st.integers(-3, 3))
def test_divergence_wraps(yaw, k):
    rows = [r[:] for r in THREE_TICKS]
    rows[-1][9] = yaw
    base = reward_value(RewardSpec("ObjectPoseDivergence"), make_trace(rows))
    rows[-1][9] = yaw + 2 * math.pi * k
    assert reward_value(RewardSpec("ObjectPoseDivergence"), make_trace(rows)) == pytest.approx(base, abs=1e-9)


def test_integral_rewards_never_positive(push_config, push_pipeline):
    for stream in range(3):
        cand = {"1.start_offset_x": 0.01, "1.start_offset_y": -0.02, "1.goal_offset_x": 0.0, "1.goal_offset_y": 0.03}
        trace = run_episode(bind(push_pipeline.tree, cand), sample_world(push_config.task, 1, stream),
                            push_config.controller, 3000, scene=push_config.scene)
        for kind in ("EeRefDistance", "AppliedWrench"):
            assert reward_value(RewardSpec(kind), trace) <= 0.0
