"""Command line: plan | learn | baseline | execute.

Exit codes: 0 success, 2 validation error, 3 planner failure, 4 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import experiment as ex
from .bt import BindingError, render
from .mobo.gp import GpFitError
from .pddl import PddlError, render_domain, render_problem
from .planner import PlanningError
from .scenario import ScenarioConfig, ScenarioError, load_scenario
from .sim.engine import SimulationError
from .world_model import WorldModelError

EXIT_OK, EXIT_INVALID, EXIT_PLANNER, EXIT_RUNTIME = 0, 2, 3, 4


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _out_dir(args, cfg: ScenarioConfig) -> Path:
    out = Path(args.out if args.out else cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load(args) -> ScenarioConfig:
    if not args.scenario:
        raise CliError("--scenario is required", EXIT_INVALID)
    cfg = load_scenario(args.scenario)
    changes = {k: getattr(args, k, None) for k in ("budget", "worlds")}
    if any(v is not None for v in changes.values()):
        cfg = cfg.with_learning(**changes)
    return cfg


def _pipeline(cfg: ScenarioConfig) -> ex.Pipeline:
    try:
        return ex.build_pipeline(cfg)
    except PlanningError as exc:
        raise CliError(f"planner failed: {exc}", EXIT_PLANNER) from exc


def plan_listing(pipe: ex.Pipeline) -> str:
    lines = ["plan:"]
    if not pipe.plan.steps:
        lines.append("  (empty: goal already holds)")
    for i, step in enumerate(pipe.plan.steps):
        lines.append(f"  {i}: {step.render()}")
    lines.append(f"learnable parameters: {len(pipe.specs)}")
    for s in pipe.specs:
        rng = f"[{s.bounds[0]:g}, {s.bounds[1]:g}]" if s.bounds is not None else "{" + ", ".join(map(str, s.values)) + "}"
        unit = f" {s.unit}" if s.unit else ""
        lines.append(f"  {s.name}: {s.kind} {rng}{unit}")
    lines.append("behavior tree:")
    lines.extend("  " + ln for ln in render(pipe.tree).splitlines())
    return "\n".join(lines) + "\n"


def _write_plan_files(pipe: ex.Pipeline, out: Path) -> str:
    (out / "domain.pddl").write_text(render_domain(pipe.domain))
    (out / "problem.pddl").write_text(render_problem(pipe.problem))
    listing = plan_listing(pipe)
    (out / "plan.txt").write_text(listing)
    return listing


def cmd_plan(args) -> int:
    cfg = _load(args)
    pipe = _pipeline(cfg)
    print(_write_plan_files(pipe, _out_dir(args, cfg)), end="")
    return EXIT_OK


def cmd_learn(args) -> int:
    cfg = _load(args)
    pipe = _pipeline(cfg)
    out = _out_dir(args, cfg)
    _write_plan_files(pipe, out)
    space = pipe.space
    sink = None
    if args.dump_traces:
        tdir = out / "traces"
        tdir.mkdir(exist_ok=True)

        def sink(it, w, trace):
            trace.to_csv(tdir / f"iter{it:04d}_world{w}.csv")

    with ex.ObservationLog(out / "observations.csv", space, cfg.p) as log:
        result = ex.run_optimization(pipe, args.seed, on_observation=log, trace_sink=sink)
    evaluations = [ex.evaluate_policy(pipe, o.candidate, args.seed, label=f"front-{k}")
                   for k, o in enumerate(result.front)]
    baselines = {
        "plan-only": ex.baseline(pipe, "plan-only", args.seed),
        "random": ex.baseline(pipe, "random", args.seed),
    }
    report = ex.RunReport(f"{cfg.name}-seed{args.seed}", args.seed, str(args.scenario), result, evaluations, baselines)
    ex.write_json(out / "pareto.json", ex.front_records(result.front, evaluations))
    ex.write_json(out / "report.json", report.to_dict(space, cfg.objectives))
    table = ex.pareto_table(result.front, space, cfg.objectives, evaluations)
    (out / "pareto.txt").write_text(table)
    print(f"{len(result.observations)} observations, Pareto front of {len(result.front)}:")
    print(table, end="")
    rnd = float(np.mean([e.success_rate for e in baselines["random"]]))
    print(f"baselines: plan-only {baselines['plan-only'][0].success_rate:.3f}, random (mean of "
          f"{len(baselines['random'])}) {rnd:.3f}")
    return EXIT_OK


def _evaluation_table(evals: list[ex.PolicyEvaluation]) -> str:
    lines = ["policy          success  known  held-out"]
    for e in evals:
        lines.append(f"{e.label:<15} {e.success_rate:7.3f}  {e.rate_where(True):5.3f}  {e.rate_where(False):8.3f}")
    return "\n".join(lines) + "\n"


def cmd_baseline(args) -> int:
    cfg = _load(args)
    pipe = _pipeline(cfg)
    evals = ex.baseline(pipe, args.mode, args.seed, args.n)
    out = _out_dir(args, cfg)
    ex.write_json(out / f"baseline_{args.mode}.json", [e.to_dict() for e in evals])
    print(_evaluation_table(evals), end="")
    if len(evals) > 1:
        print(f"mean success {np.mean([e.success_rate for e in evals]):.3f}")
    return EXIT_OK


def cmd_execute(args) -> int:
    report_path = Path(args.report) if args.report else Path(args.out or ".") / "report.json"
    if not report_path.is_file():
        raise CliError(f"no report at {report_path}", EXIT_INVALID)
    report = json.loads(report_path.read_text())
    if not args.scenario:
        args.scenario = report.get("scenario")
    cfg = _load(args)
    pipe = _pipeline(cfg)
    front = report["pareto"]
    if args.index is None or not 0 <= args.index < len(front):
        raise CliError(f"front index {args.index} out of range [0, {len(front)})", EXIT_INVALID)
    params = front[args.index]["params"]
    seed = report["seed"] if args.seed is None else args.seed
    evaluation = ex.evaluate_policy(pipe, params, seed, label=f"front-{args.index}")
    print(f"front point {args.index}: " + ", ".join(f"{k}={v:.6g}" if isinstance(v, float) else f"{k}={v}"
                                                  for k, v in params.items()))
    for st in sorted(set(evaluation.starts)):
        runs = [s for t, s in zip(evaluation.starts, evaluation.successes) if t == st]
        kind = "known" if st < evaluation.n_known else "held-out"
        print(f"  start {st:2d} ({kind:8s}): {sum(runs)}/{len(runs)}")
    print(f"success rate {evaluation.success_rate:.3f} (known {evaluation.rate_where(True):.3f}, "
          f"held-out {evaluation.rate_where(False):.3f})")
    ex.write_json(report_path.parent / f"execute_{args.index}.json", evaluation.to_dict())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="skillopt", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, seed_default=0):
        p.add_argument("--scenario", help="scenario JSON file or a bundled name (peg, push)")
        p.add_argument("--out", help="output directory (default: the scenario's output entry)")
        p.add_argument("--seed", type=int, default=seed_default)

    p = sub.add_parser("plan", help="emit PDDL, plan and list learnable parameters")
    common(p)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("learn", help="optimize the learnable parameters")
    common(p)
    p.add_argument("--budget", type=int)
    p.add_argument("--worlds", type=int)
    p.add_argument("--dump-traces", action="store_true", help="write one CSV per episode under traces/")
    p.set_defaults(func=cmd_learn)

    p = sub.add_parser("baseline", help="evaluate plan-only or random parameters")
    common(p)
    p.add_argument("--mode", choices=("plan-only", "random"), required=True)
    p.add_argument("--n", type=int, help="number of random parameter sets")
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("execute", help="run one Pareto point on the held-out protocol")
    common(p, seed_default=None)
    p.add_argument("--index", type=int, required=True)
    p.add_argument("--report", help="report.json path (default: <out>/report.json)")
    p.set_defaults(func=cmd_execute)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except PlanningError as exc:
        print(f"planner failed: {exc}", file=sys.stderr)
        return EXIT_PLANNER
    except (ScenarioError, WorldModelError, PddlError, BindingError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (SimulationError, GpFitError, RuntimeError, OSError) as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
