"""Optimizer sanity benchmarks: Branin (single objective) and a 1D bi-objective toy."""

import math
import time

import numpy as np

from skillopt.mobo import ParameterSpace, hypervolume_2d, optimize
from skillopt.world_model import LearnableParamSpec as Spec

BRANIN_MIN = 0.397887


def branin(c):
    x1, x2 = c["x1"], c["x2"]
    b, cc, t = 5.1 / (4 * math.pi**2), 5 / math.pi, 1 / (8 * math.pi)
    return np.array([(x2 - b * x1**2 + cc * x1 - 6) ** 2 + 10 * (1 - t) * math.cos(x1) + 10])


def main():
    space = ParameterSpace((Spec("x1", "real", bounds=(-5.0, 10.0)), Spec("x2", "real", bounds=(0.0, 15.0))))
    t0 = time.perf_counter()
    bests = []
    for seed in range(10):
        obs, _ = optimize(branin, space, 100, seed)
        bests.append(min(o.y[0] for o in obs))
        print(f"branin seed {seed}: best {bests[-1]:.6f}")
    print(f"branin median gap {np.median(bests) - BRANIN_MIN:.2e} ({time.perf_counter() - t0:.1f} s)")

    toy = ParameterSpace((Spec("s", "real", bounds=(-1.0, 3.0)),))
    s = np.linspace(-1.0, 3.0, 10_000)
    true_hv = hypervolume_2d(np.column_stack([s**2, (s - 2) ** 2]), (9, 9))
    for seed in range(10):
        _, front = optimize(lambda c: np.array([c["s"] ** 2, (c["s"] - 2) ** 2]), toy, 60, seed)
        hv = hypervolume_2d(np.stack([o.y for o in front]), (9, 9))
        print(f"bi-objective seed {seed}: front {len(front)}, hypervolume ratio {hv / true_hv:.4f}")


if __name__ == "__main__":
    main()
