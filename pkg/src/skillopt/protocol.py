"""Per-seed learning protocol: learn, pick the best-success front point, compare with baselines."""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import experiment as ex


@dataclass
class SeedOutcome:
    seed: int
    runtime_s: float
    n_observations: int
    front_size: int
    distinct_front: int  # front members with distinct objective vectors
    best_params: dict
    learned: float  # evaluation-protocol success of the best-success front point
    learned_unknown: float  # same, restricted to held-out start configurations
    random: list[float] = field(default_factory=list)
    plan_only: float = float("nan")

    @property
    def random_mean(self) -> float:
        return float(np.mean(self.random))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["random_mean"] = self.random_mean
        return d


def run_seed(pipe: ex.Pipeline, seed: int, trace_sink: ex.TraceSink | None = None,
             **run_kwargs) -> tuple[SeedOutcome, ex.RunResult]:
    t0 = time.perf_counter()
    result = ex.run_optimization(pipe, seed, trace_sink=trace_sink, **run_kwargs)
    runtime = time.perf_counter() - t0
    best = result.front[ex.best_success_index(result.front)]
    ev = ex.evaluate_policy(pipe, best.candidate, seed, label="best")
    rnd = ex.baseline(pipe, "random", seed)
    plan_only = ex.baseline(pipe, "plan-only", seed)[0]
    outcome = SeedOutcome(
        seed=seed,
        runtime_s=runtime,
        n_observations=len(result.observations),
        front_size=len(result.front),
        distinct_front=len({tuple(o.y) for o in result.front}),
        best_params=dict(best.candidate),
        learned=ev.success_rate,
        learned_unknown=ev.rate_where(False),
        random=[e.success_rate for e in rnd],
        plan_only=plan_only.success_rate,
    )
    return outcome, result


def summarize(outcomes: list[SeedOutcome]) -> dict:
    """Medians across seeds of each policy's success rate, plus front sizes."""
    return {
        "seeds": [o.seed for o in outcomes],
        "median_learned": float(np.median([o.learned for o in outcomes])),
        "median_learned_unknown": float(np.median([o.learned_unknown for o in outcomes])),
        "median_random": float(np.median([o.random_mean for o in outcomes])),
        "median_plan_only": float(np.median([o.plan_only for o in outcomes])),
        "front_sizes": [o.front_size for o in outcomes],
        "distinct_front_sizes": [o.distinct_front for o in outcomes],
        "max_runtime_s": max(o.runtime_s for o in outcomes),
    }
