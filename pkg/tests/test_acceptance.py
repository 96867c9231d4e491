"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

The end-to-end ordering criterion runs the full learning protocol on ten seeds
and takes roughly a quarter of an hour on one core.
"""

import math
import time

import mpmath as mp
import numpy as np
import pytest

from skillopt.bt import bind, unbound_specs
from skillopt.cli import main
from skillopt.experiment import build_pipeline
from skillopt.mobo.acquisition import expected_improvement
from skillopt.mobo.gp import GpModel
from skillopt.mobo.loop import optimize
from skillopt.mobo.pareto import dominates, hypervolume_2d, pareto_filter
from skillopt.mobo.space import ParameterSpace
from skillopt.pddl import parse_domain
from skillopt.planner import plan, validate_plan
from skillopt.protocol import run_seed, summarize
from skillopt.rewards import RewardSpec, evaluate, reward_value
from skillopt.sim.engine import run_episode
from skillopt.sim.world import sample_world
from skillopt.world_model import LearnableParamSpec as Spec

from tests.test_planner import BLOCK_CASES, BLOCKS, blocks_problem, oracle_length
from tests.test_gp import FROZEN_MEAN, FROZEN_VAR, HYPER, PROBES, X5, Y5, dense_oracle
from tests.test_rewards import THREE_TICKS, make_trace

RESULTS: dict[int, str] = {}


def report(n: int, ok: bool, detail: str) -> None:
    line = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'} - {detail}"
    RESULTS[n] = line
    print(line)
    assert ok, line


def test_c01_pareto_correctness():
    rng = np.random.default_rng(2024)
    instances = [rng.integers(0, 10, size=(int(rng.integers(1, 101)), int(rng.choice([2, 3, 4]))))
                 for _ in range(1000)]
    t0 = time.perf_counter()
    fronts = [pareto_filter(pts).indices for pts in instances]
    elapsed = time.perf_counter() - t0
    mismatches = sum(f != brute_front(pts) for f, pts in zip(fronts, instances))
    report(1, mismatches == 0 and elapsed < 5.0, f"{mismatches} mismatches on 1000 instances in {elapsed:.2f} s")


def brute_front(pts):
    keep = []
    for i in range(len(pts)):
        if not any(np.all(pts[j] <= pts[i]) and np.any(pts[j] < pts[i]) for j in range(len(pts))):
            keep.append(i)
    return keep


def test_c02_dominance_order_laws():
    rng = np.random.default_rng(7)
    T = rng.integers(0, 3, size=(100_000, 3, 3))
    violations = 0
    for a, b, c in T:
        ab, ba, bc, ac = dominates(a, b), dominates(b, a), dominates(b, c), dominates(a, c)
        violations += dominates(a, a) + (ab and ba) + (ab and bc and not ac)
    report(2, violations == 0, f"{violations} violations on 1e5 triples")


def test_c03_gp_oracle():
    model = GpModel.from_hyperparameters(X5, Y5, **HYPER)
    mean, var = model.predict(PROBES)
    frozen = max(np.max(np.abs(mean - FROZEN_MEAN)), np.max(np.abs(var - FROZEN_VAR)))
    rng = np.random.default_rng(3)
    X = rng.uniform(size=(20, 2))
    y = np.sin(5 * X[:, 0]) * X[:, 1]
    ls = np.array([0.3, 0.6])
    grid = rng.uniform(size=(500, 2))
    m, v = GpModel.from_hyperparameters(X, y, ls, 1.1, 1e-4).predict(grid)
    om, ov = dense_oracle(X, y, grid, ls, 1.1, 1e-4)
    dense = max(np.max(np.abs(m - om)), np.max(np.abs(v - ov)))
    interp = np.max(np.abs(GpModel.from_hyperparameters(X, y, ls, 1.0, 1e-6).predict(X)[0] - y))
    ok = frozen <= 1e-8 and dense <= 1e-8 and interp <= 1e-4
    report(3, ok, f"frozen {frozen:.1e}, dense {dense:.1e} (tol 1e-8); interpolation {interp:.1e} (tol 1e-4)")


def test_c04_expected_improvement():
    mp.mp.dps = 40
    rng = np.random.default_rng(11)
    mean, var, best = rng.normal(size=1000), rng.uniform(1e-3, 5.0, 1000), rng.normal(size=1000)
    ei = expected_improvement(mean, var, best)
    worst = 0.0
    for e, m, v, b in zip(ei, mean, var, best):
        s = mp.sqrt(mp.mpf(v))
        z = (mp.mpf(b) - m) / s
        worst = max(worst, abs(float((mp.mpf(b) - m) * mp.ncdf(z) + s * mp.npdf(z)) - e))
    wide = expected_improvement(rng.normal(0, 30, 10**5), rng.uniform(0, 100, 10**5) * (rng.random(10**5) > 0.1),
                                rng.normal(0, 30, 10**5))
    report(4, worst <= 1e-10 and wide.min() >= 0.0, f"max abs error {worst:.1e} (tol 1e-10); min EI {wide.min():.1e}")


def branin(c):
    x1, x2 = c["x1"], c["x2"]
    b, cc, r, s, t = 5.1 / (4 * math.pi**2), 5 / math.pi, 6.0, 10.0, 1 / (8 * math.pi)
    return np.array([(x2 - b * x1**2 + cc * x1 - r) ** 2 + s * (1 - t) * math.cos(x1) + s])


def test_c05_branin():
    space = ParameterSpace((Spec("x1", "real", bounds=(-5.0, 10.0)), Spec("x2", "real", bounds=(0.0, 15.0))))
    t0 = time.perf_counter()
    bests = [min(o.y[0] for o in optimize(branin, space, 100, seed)[0]) for seed in range(10)]
    elapsed = time.perf_counter() - t0
    gap = float(np.median(bests)) - 0.397887
    report(5, gap <= 0.1 and elapsed < 60.0, f"median best - optimum = {gap:.4f} (tol 0.1), {elapsed:.1f} s")


def test_c06_bi_objective():
    space = ParameterSpace((Spec("s", "real", bounds=(-1.0, 3.0)),))
    f = lambda c: np.array([c["s"] ** 2, (c["s"] - 2) ** 2])
    s = np.linspace(-1.0, 3.0, 10_000)
    true_hv = hypervolume_2d(np.column_stack([s**2, (s - 2) ** 2]), (9, 9))
    t0 = time.perf_counter()
    ratios = []
    for seed in range(10):
        _, front = optimize(f, space, 60, seed)
        ratios.append(hypervolume_2d(np.stack([o.y for o in front]), (9, 9)) / true_hv)
    elapsed = time.perf_counter() - t0
    hits = sum(r >= 0.95 for r in ratios)
    report(6, hits >= 8 and elapsed < 60.0,
           f"{hits}/10 seeds reach 95% hypervolume (min ratio {min(ratios):.4f}), {elapsed:.1f} s")


def test_c07_planner(peg_pipeline, push_pipeline):
    peg, push = peg_pipeline.plan.skill_names, push_pipeline.plan.skill_names
    d = parse_domain(BLOCKS)
    lengths_ok = True
    for init, goal in BLOCK_CASES:
        p = blocks_problem(init, goal)
        steps = plan(d, p)
        lengths_ok &= validate_plan(p, steps.steps) and len(steps) == oracle_length(init, goal)
    ok = peg == ["GoToLinear", "PegInsertion"] and push == ["GoToLinear", "Push"] and lengths_ok
    report(7, ok, f"peg {peg}, push {push}; blocks-world lengths match BFS oracle: {lengths_ok}")


def test_c08_learnable_parameters(peg_pipeline, push_pipeline):
    n_peg, n_push = len(unbound_specs(peg_pipeline.tree)), len(unbound_specs(push_pipeline.tree))
    report(8, (n_peg, n_push) == (3, 4), f"peg {n_peg}, push {n_push}")


def test_c09_simulator(peg_config, peg_pipeline, push_config, push_pipeline):
    same = True
    for cfg, pipe, cand in (
        (peg_config, peg_pipeline, {"1.force": 12.0, "1.radius": 0.01, "1.velocity": 0.1}),
        (push_config, push_pipeline, {"1.start_offset_x": 0.01, "1.start_offset_y": 0.0,
                                      "1.goal_offset_x": 0.0, "1.goal_offset_y": -0.01}),
    ):
        for stream in range(3):
            w = sample_world(cfg.task, 5, stream)
            a, b = (run_episode(bind(pipe.tree, cand), w, cfg.controller, 3000, scene=cfg.scene) for _ in range(2))
            same &= a.records.tobytes() == b.records.tobytes() and a.status is b.status
    w = sample_world(peg_config.task, 0, 0)
    w = w.with_(believed_pose=w.true_pose)
    runs = {v: run_episode(bind(peg_pipeline.tree, {"1.force": 15.0, "1.radius": 0.005, "1.velocity": v}), w,
                           peg_config.controller, 3000, scene=peg_config.scene).success for v in (0.2, 0.3)}
    ok = same and runs[0.2] and not runs[0.3]
    report(9, ok, f"bit-identical repeats: {same}; capture at 0.2 m/s: {runs[0.2]}, at 0.3 m/s: {runs[0.3]}")


@pytest.fixture(scope="module")
def protocol(peg_config):
    pipe = build_pipeline(peg_config)
    completions: set[float] = set()
    count = [0]

    def sink(it, w, trace):
        completions.add(reward_value(RewardSpec("TaskCompletion"), trace))
        count[0] += 1

    outcomes = []
    for seed in range(peg_config.learning.seeds):
        outcome, _ = run_seed(pipe, seed, trace_sink=sink)
        print(f"seed {seed}: {outcome.to_dict()}")
        outcomes.append(outcome)
    return outcomes, completions, count[0]


def test_c10_end_to_end_ordering(protocol):
    outcomes, _, _ = protocol
    s = summarize(outcomes)
    ok = (s["median_learned"] > s["median_random"] >= s["median_plan_only"]
          and s["max_runtime_s"] <= 15 * 60 and all(o.n_observations == 400 for o in outcomes))
    report(10, ok, f"median success learned {s['median_learned']:.3f} > random {s['median_random']:.3f} >= "
                   f"plan-only {s['median_plan_only']:.3f}; front sizes {s['front_sizes']} "
                   f"(distinct {s['distinct_front_sizes']}); slowest run {s['max_runtime_s']:.0f} s")


def test_c11_reward_properties(protocol):
    _, completions, episodes = protocol
    trace = make_trace(THREE_TICKS)
    linear = 0.0
    for kind in ("EeRefDistance", "AppliedWrench", "ObjectPoseDivergence", "EeBoxDistance"):
        params = {"box": "box1"} if kind == "EeBoxDistance" else {}
        for w in (0.3, 1.7, -4.0):
            one = evaluate(trace, [RewardSpec(kind, w, 0, params)], 1)[0]
            linear = max(linear, abs(evaluate(trace, [RewardSpec(kind, 2 * w, 0, params)], 1)[0] - 2 * one))
    rows = [r[:] for r in THREE_TICKS]
    wrap = 0.0
    for yaw in np.linspace(-3, 3, 13):
        rows[-1][9] = yaw
        base = reward_value(RewardSpec("ObjectPoseDivergence"), make_trace(rows))
        rows[-1][9] = yaw + 2 * math.pi
        wrap = max(wrap, abs(reward_value(RewardSpec("ObjectPoseDivergence"), make_trace(rows)) - base))
    ok = linear <= 1e-12 and wrap <= 1e-12 and completions <= {0.0, 1.0} and episodes == 10 * 400 * 7
    report(11, ok, f"linearity {linear:.1e}, wrap {wrap:.1e}; TaskCompletion values {sorted(completions)} "
                   f"over {episodes} logged episodes")


def test_c12_reproducible_learn(tmp_path):
    paths = []
    for k in range(2):
        out = tmp_path / f"run{k}"
        assert main(["learn", "--scenario", "peg", "--seed", "7", "--budget", "30", "--worlds", "3",
                     "--out", str(out)]) == 0
        paths.append(out / "observations.csv")
    same = paths[0].read_bytes() == paths[1].read_bytes()
    report(12, same, f"observations.csv byte-identical across two runs: {same}")
