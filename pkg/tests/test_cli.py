import json

import numpy as np
import pytest

from skillopt.cli import main
from skillopt.experiment import baseline, evaluate_policy, plan_only_candidate
from skillopt.scenario import ScenarioError, builtin_path, load_scenario
from skillopt.sim.world import sample_world


def scenario_file(tmp_path, name="peg", **changes):
    data = json.loads(builtin_path(name).read_text())
    for key, value in changes.items():
        data[key] = value
    path = tmp_path / f"{name}-variant.json"
    path.write_text(json.dumps(data))
    return str(path)


def test_plan_peg(tmp_path, capsys):
    assert main(["plan", "--scenario", "peg", "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "0: (GoToLinear robot1 home hole1-approach)" in out
    assert "learnable parameters: 3" in out
    assert "1.radius: real [0, 0.015] m" in out
    for f in ("domain.pddl", "problem.pddl", "plan.txt"):
        assert (tmp_path / f).is_file()


def test_plan_push(tmp_path, capsys):
    assert main(["plan", "--scenario", "push", "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "(Push robot1 box1" in out and "learnable parameters: 4" in out


def test_goal_already_satisfied(tmp_path, capsys):
    path = scenario_file(tmp_path, goal="(and (holding robot1 peg1))")
    assert main(["plan", "--scenario", path, "--out", str(tmp_path / "o")]) == 0
    out = capsys.readouterr().out
    assert "(empty: goal already holds)" in out and "learnable parameters: 0" in out


def test_unsolvable_goal_exit_code(tmp_path, capsys):
    path = scenario_file(tmp_path, goal="(and (peg-in peg1 hole1) (holding robot1 peg1))")
    assert main(["plan", "--scenario", path, "--out", str(tmp_path / "o")]) == 3
    assert "planner failed" in capsys.readouterr().err


def test_invalid_objective_rejected_before_simulation(tmp_path):
    data = json.loads(builtin_path("peg").read_text())
    data["rewards"][1]["objective"] = 2
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(data))
    with pytest.raises(ScenarioError):
        load_scenario(path)
    assert main(["learn", "--scenario", str(path), "--out", str(tmp_path / "o"), "--budget", "25"]) == 2
    assert not (tmp_path / "o" / "observations.csv").exists()


def test_missing_file_and_small_budget(tmp_path):
    assert main(["plan", "--scenario", str(tmp_path / "nope.json")]) == 2
    assert main(["learn", "--scenario", "peg", "--out", str(tmp_path), "--budget", "5"]) == 2


@pytest.fixture(scope="module")
def learned(tmp_path_factory):
    runs = []
    for k in range(2):
        out = tmp_path_factory.mktemp(f"learn{k}")
        assert main(["learn", "--scenario", "peg", "--seed", "3", "--budget", "25", "--worlds", "2",
                     "--out", str(out)]) == 0
        runs.append(out)
    return runs


def test_learn_outputs(learned):
    out = learned[0]
    report = json.loads((out / "report.json").read_text())
    assert report["n_observations"] == 25 and report["seed"] == 3
    lines = (out / "observations.csv").read_text().splitlines()
    assert lines[0] == "iter,world,1.force,1.radius,1.velocity,y0,y1,success"
    assert len(lines) == 1 + 25 * 3
    pareto = json.loads((out / "pareto.json").read_text())
    assert len(pareto) == len(report["pareto"]) >= 1
    assert all(len(p["per_world"]) == 2 for p in pareto)
    assert (out / "pareto.txt").read_text().startswith("#")


def test_learn_byte_identical(learned):
    a, b = (p / "observations.csv" for p in learned)
    assert a.read_bytes() == b.read_bytes()
    ra, rb = (json.loads((p / "report.json").read_text()) for p in learned)
    assert ra["pareto"] == rb["pareto"]


def test_execute_round_trip(learned, capsys):
    report = learned[0] / "report.json"
    n = len(json.loads(report.read_text())["pareto"])
    assert main(["execute", "--report", str(report), "--index", "0"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("front point 0: 1.force=") and "held-out" in out
    assert (learned[0] / "execute_0.json").is_file()
    assert main(["execute", "--report", str(report), "--index", str(n)]) == 2
    assert main(["execute", "--report", str(learned[0] / "missing.json"), "--index", "0"]) == 2


def test_dump_traces(tmp_path):
    assert main(["learn", "--scenario", "push", "--budget", "20", "--worlds", "1", "--out", str(tmp_path),
                 "--dump-traces"]) == 0
    traces = sorted((tmp_path / "traces").iterdir())
    assert len(traces) == 20
    assert traces[0].read_text().splitlines()[0] == "t,ref_x,ref_y,ref_z,act_x,act_y,act_z,obj_x,obj_y,obj_yaw,Fx,Fy,Fz"


def test_baseline_cli_deterministic(tmp_path, capsys):
    for k in range(2):
        assert main(["baseline", "--scenario", "peg", "--mode", "random", "--n", "10", "--seed", "1",
                     "--out", str(tmp_path / str(k))]) == 0
    a, b = ((tmp_path / str(k) / "baseline_random.json").read_text() for k in range(2))
    assert a == b and len(json.loads(a)) == 10


def test_plan_only_fails_when_belief_offset_exceeds_clearance(peg_pipeline, peg_config):
    cand = plan_only_candidate(peg_pipeline)
    assert cand == {"1.force": 4.0, "1.radius": 0.0, "1.velocity": 0.05}
    ev = evaluate_policy(peg_pipeline, cand, seed=0)
    from skillopt.sim.world import evaluation_worlds

    worlds = evaluation_worlds(peg_config.task, 0, 2)
    for w, ok in zip(worlds, ev.successes):
        if w.belief_error > w.clearance:
            assert not ok


def test_plan_only_succeeds_without_offset(peg_pipeline, peg_config):
    from skillopt.bt import bind
    from skillopt.sim.engine import run_episode

    w = sample_world(peg_config.task, 0, 0).with_(mu=0.3)
    w = w.with_(believed_pose=w.true_pose, seat_force=3.0)
    assert 4.0 >= w.seat_force
    trace = run_episode(bind(peg_pipeline.tree, plan_only_candidate(peg_pipeline)), w, peg_config.controller,
                        3000, scene=peg_config.scene)
    assert trace.success


def test_random_baseline_reproducible(peg_pipeline):
    a = baseline(peg_pipeline, "random", 5, 10)
    b = baseline(peg_pipeline, "random", 5, 10)
    assert [e.to_dict() for e in a] == [e.to_dict() for e in b]
    assert len({tuple(e.candidate.values()) for e in a}) == 10
    assert np.isfinite([e.success_rate for e in a]).all()
