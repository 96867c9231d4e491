"""Goal -> plan -> behavior tree -> learned parameters, plus baselines and run logs."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

from .bt import BtNode, bind, compile_plan, unbound_specs
from .mobo.loop import BoSettings, optimize
from .mobo.pareto import Observation, ParetoFront, pareto_filter
from .mobo.space import Candidate, ParameterSpace
from .pddl import Domain, Problem, emit_domain, emit_problem
from .planner import Plan, plan
from .rewards import evaluate
from .scenario import ScenarioConfig, ScenarioError
from .sim.engine import EpisodeTrace, run_episode
from .sim.world import WorldConfig, evaluation_worlds, sample_worlds
from .world_model import LearnableParamSpec

RANDOM_BASELINE_STREAM = 0x5EED


@dataclass
class Pipeline:
    config: ScenarioConfig
    domain: Domain
    problem: Problem
    plan: Plan
    tree: BtNode
    specs: list[LearnableParamSpec]

    @property
    def space(self) -> ParameterSpace:
        if not self.specs:
            raise ScenarioError("the plan has no learnable parameters")
        return ParameterSpace(tuple(self.specs))


def build_pipeline(config: ScenarioConfig) -> Pipeline:
    """Emit PDDL from the scene, plan, and compile the plan into a behavior tree."""
    domain = emit_domain(config.scene, name=config.name)
    problem = emit_problem(config.scene, config.goal, domain, name=f"{config.name}-task")
    steps = plan(domain, problem)
    tree = compile_plan(steps, config.scene)
    specs = config.apply_space(unbound_specs(tree))
    return Pipeline(config, domain, problem, steps, tree, specs)


@dataclass
class EpisodeOutcome:
    world: WorldConfig
    y: np.ndarray
    success: bool
    trace: EpisodeTrace


def run_candidate(pipe: Pipeline, candidate: Candidate, worlds: Sequence[WorldConfig]) -> list[EpisodeOutcome]:
    cfg = pipe.config
    out = []
    for world in worlds:
        tree = bind(pipe.tree, candidate)
        trace = run_episode(tree, world, cfg.controller, cfg.learning.max_ticks, scene=cfg.scene)
        out.append(EpisodeOutcome(world, evaluate(trace, cfg.rewards, cfg.p), trace.success, trace))
    return out


TraceSink = Callable[[int, int, EpisodeTrace], None]


def make_objective(pipe: Pipeline, worlds: Sequence[WorldConfig], trace_sink: TraceSink | None = None):
    """Objective for the optimizer: per-world cost vectors and successes, averaged into ``y``."""
    counter = iter(range(1 << 62))

    def objective(candidate: Candidate):
        it = next(counter)
        outcomes = run_candidate(pipe, candidate, worlds)
        if trace_sink is not None:
            for w, o in enumerate(outcomes):
                trace_sink(it, w, o.trace)
        per_world = np.stack([o.y for o in outcomes])
        success = np.array([o.success for o in outcomes], dtype=bool)
        return per_world.mean(axis=0), per_world, success

    return objective


@dataclass
class RunResult:
    seed: int
    observations: list[Observation]
    front: ParetoFront
    worlds: list[WorldConfig]


def run_optimization(pipe: Pipeline, seed: int, budget: int | None = None, worlds: int | None = None,
                     on_observation: Callable[[Observation], None] | None = None,
                     trace_sink: TraceSink | None = None, settings: BoSettings | None = None) -> RunResult:
    """Space-filling design then BO, each candidate scored on the same sampled training worlds."""
    learning = pipe.config.learning
    budget = learning.budget if budget is None else budget
    n_worlds = learning.worlds if worlds is None else worlds
    settings = settings or BoSettings(n_initial=learning.n_initial)
    train = sample_worlds(pipe.config.task, seed, n_worlds)
    objective = make_objective(pipe, train, trace_sink)
    observations, front = optimize(objective, pipe.space, budget, seed, settings, on_observation)
    return RunResult(seed, observations, front, train)


# -- held-out evaluation -------------------------------------------------------


@dataclass
class PolicyEvaluation:
    candidate: Candidate
    starts: list[int]
    successes: list[bool]
    costs: list[list[float]]
    n_known: int = 0
    label: str = ""

    @property
    def success_rate(self) -> float:
        return float(np.mean(self.successes)) if self.successes else float("nan")

    def rate_where(self, known: bool) -> float:
        sel = [s for st, s in zip(self.starts, self.successes) if (st < self.n_known) == known]
        return float(np.mean(sel)) if sel else float("nan")

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "params": dict(self.candidate),
            "success_rate": self.success_rate,
            "known_success_rate": self.rate_where(True),
            "held_out_success_rate": self.rate_where(False),
            "episodes": [
                {"start": st, "success": bool(s), "y": list(map(float, c))}
                for st, s, c in zip(self.starts, self.successes, self.costs)
            ],
        }


def evaluate_policy(pipe: Pipeline, candidate: Candidate, seed: int, reps: int | None = None,
                    label: str = "") -> PolicyEvaluation:
    """Run ``candidate`` on fresh worlds for every known and held-out start configuration."""
    task = pipe.config.task
    reps = pipe.config.learning.eval_reps if reps is None else reps
    worlds = evaluation_worlds(task, seed, reps)
    outcomes = run_candidate(pipe, candidate, worlds)
    return PolicyEvaluation(
        candidate=dict(candidate),
        starts=[w.start_index for w in worlds],
        successes=[o.success for o in outcomes],
        costs=[o.y.tolist() for o in outcomes],
        n_known=task.n_known_starts,
        label=label,
    )


def plan_only_candidate(pipe: Pipeline) -> Candidate:
    """Parameters a planner would pick on its own: each spec's nominal value."""
    return pipe.space.nominal()


def random_candidates(pipe: Pipeline, n: int, seed: int) -> list[Candidate]:
    rng = np.random.default_rng([seed, RANDOM_BASELINE_STREAM])
    return [pipe.space.sample(rng) for _ in range(n)]


def baseline(pipe: Pipeline, mode: str, seed: int, n: int | None = None) -> list[PolicyEvaluation]:
    if mode == "plan-only":
        return [evaluate_policy(pipe, plan_only_candidate(pipe), seed, label="plan-only")]
    if mode == "random":
        n = pipe.config.learning.random_sets if n is None else n
        return [evaluate_policy(pipe, c, seed, label=f"random-{i}") for i, c in enumerate(random_candidates(pipe, n, seed))]
    raise ValueError(f"unknown baseline mode {mode!r}")


def best_success_index(front: ParetoFront) -> int:
    """Front member with the highest training success rate (ties: earliest)."""
    if not len(front):
        raise ValueError("empty Pareto front")
    rates = [o.success_rate for o in front]
    return int(np.argmax(rates))


# -- logs and reports ----------------------------------------------------------


def observation_header(space: ParameterSpace, p: int) -> list[str]:
    return ["iter", "world", *space.names, *[f"y{j}" for j in range(p)], "success"]


def _fmt(v: Any) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def observation_rows(obs: Observation, space: ParameterSpace) -> list[list[str]]:
    params = [_fmt(obs.candidate[n]) for n in space.names]
    rows = []
    if obs.per_world is not None:
        for w, yw in enumerate(obs.per_world):
            ok = obs.success[w] if obs.success is not None else ""
            rows.append([str(obs.iteration), str(w), *params, *map(_fmt, yw), _fmt(ok)])
    rate = _fmt(obs.success_rate) if obs.success is not None else ""
    rows.append([str(obs.iteration), "mean", *params, *map(_fmt, obs.y), rate])
    return rows


class ObservationLog:
    """Append-only CSV log, flushed after every observation so partial runs survive."""

    def __init__(self, path: str | Path, space: ParameterSpace, p: int):
        self.path = Path(path)
        self.space = space
        self._fh = open(self.path, "w", newline="")
        self._w = csv.writer(self._fh, lineterminator="\n")
        self._w.writerow(observation_header(space, p))
        self._fh.flush()

    def __call__(self, obs: Observation) -> None:
        self._w.writerows(observation_rows(obs, self.space))
        self._fh.flush()

    def close(self) -> None:
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def front_records(front: ParetoFront, evaluations: Sequence[PolicyEvaluation] | None = None) -> list[dict]:
    out = []
    for k, (idx, obs) in enumerate(zip(front.indices, front.members)):
        rec = {
            "index": k,
            "iteration": obs.iteration,
            "observation": idx,
            "params": {n: v for n, v in obs.candidate.items()},
            "y": [float(v) for v in obs.y],
            "success_rate": obs.success_rate,
            "per_world": [
                {"y": [float(v) for v in yw], "success": bool(obs.success[w]) if obs.success is not None else None}
                for w, yw in enumerate(obs.per_world if obs.per_world is not None else [])
            ],
        }
        if evaluations is not None:
            rec["held_out"] = evaluations[k].to_dict()
        out.append(rec)
    return out


def pareto_table(front: ParetoFront, space: ParameterSpace, objectives: Sequence[str],
                 evaluations: Sequence[PolicyEvaluation] | None = None) -> str:
    cols = ["#", *space.names, *objectives, "train success"]
    if evaluations is not None:
        cols.append("held-out success")
    rows = []
    for k, obs in enumerate(front):
        row = [str(k), *[f"{obs.candidate[n]:.6g}" if isinstance(obs.candidate[n], float) else str(obs.candidate[n])
                         for n in space.names]]
        row += [f"{v:.6g}" for v in obs.y]
        row.append(f"{obs.success_rate:.3f}")
        if evaluations is not None:
            row.append(f"{evaluations[k].success_rate:.3f}")
        rows.append(row)
    widths = [max(len(c), *(len(r[i]) for r in rows)) if rows else len(c) for i, c in enumerate(cols)]
    buf = io.StringIO()
    buf.write("  ".join(c.ljust(w) for c, w in zip(cols, widths)).rstrip() + "\n")
    for r in rows:
        buf.write("  ".join(v.ljust(w) for v, w in zip(r, widths)).rstrip() + "\n")
    return buf.getvalue()


def write_json(path: str | Path, data: Any) -> None:
    with open(path, "w") as fh:
        json.dump(data, fh, indent=2, sort_keys=False)
        fh.write("\n")


@dataclass
class RunReport:
    run_id: str
    seed: int
    scenario: str
    result: RunResult
    front_evaluations: list[PolicyEvaluation] = field(default_factory=list)
    baselines: dict[str, list[PolicyEvaluation]] = field(default_factory=dict)

    def to_dict(self, space: ParameterSpace, objectives: Sequence[str]) -> dict:
        return {
            "run_id": self.run_id,
            "seed": self.seed,
            "scenario": self.scenario,
            "objectives": list(objectives),
            "parameters": [dict(name=s.name, **s.to_dict()) for s in space.dims],
            "n_observations": len(self.result.observations),
            "observations": [
                {"iteration": o.iteration, "params": dict(o.candidate), "y": [float(v) for v in o.y],
                 "success_rate": o.success_rate}
                for o in self.result.observations
            ],
            "pareto": front_records(self.result.front, self.front_evaluations or None),
            "baselines": {k: [e.to_dict() for e in v] for k, v in self.baselines.items()},
            "success_rates": {
                "front": [e.success_rate for e in self.front_evaluations],
                **{k: [e.success_rate for e in v] for k, v in self.baselines.items()},
            },
        }


def pareto_of(observations: Sequence[Observation]) -> ParetoFront:
    return pareto_filter(observations)
