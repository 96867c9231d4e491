"""Full learning protocol on a bundled scenario: budget 400, 7 worlds, 10 seeds.

For every seed: learn, evaluate the best-success front point on the held-out
protocol, and compare it with the random and plan-only baselines.

    python scripts/peg_protocol.py --scenario peg --out runs/peg-protocol
"""

import argparse
import json
from pathlib import Path

from skillopt.experiment import build_pipeline
from skillopt.protocol import run_seed, summarize
from skillopt.scenario import load_scenario


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--scenario", default="peg")
    ap.add_argument("--seeds", type=int, help="number of seeds (default: the scenario's)")
    ap.add_argument("--budget", type=int)
    ap.add_argument("--worlds", type=int)
    ap.add_argument("--out", default=None)
    args = ap.parse_args()

    cfg = load_scenario(args.scenario)
    pipe = build_pipeline(cfg)
    seeds = args.seeds or cfg.learning.seeds
    out = Path(args.out or f"runs/{cfg.name}-protocol")
    out.mkdir(parents=True, exist_ok=True)
    outcomes = []
    print("seed  front  distinct  learned  unknown  random  plan-only  runtime")
    for seed in range(seeds):
        o, _ = run_seed(pipe, seed, budget=args.budget, worlds=args.worlds)
        outcomes.append(o)
        print(f"{seed:4d}  {o.front_size:5d}  {o.distinct_front:8d}  {o.learned:7.3f}  {o.learned_unknown:7.3f}"
              f"  {o.random_mean:6.3f}  {o.plan_only:9.3f}  {o.runtime_s:6.1f} s", flush=True)
    summary = summarize(outcomes)
    summary["per_seed"] = [o.to_dict() for o in outcomes]
    (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    print(f"median success: learned {summary['median_learned']:.3f} (held-out starts "
          f"{summary['median_learned_unknown']:.3f}), random {summary['median_random']:.3f}, "
          f"plan-only {summary['median_plan_only']:.3f}")


if __name__ == "__main__":
    main()
