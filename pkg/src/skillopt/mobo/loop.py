"""Scalarized multi-objective BO loop over a mixed parameter space."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from .acquisition import RHO, expected_improvement, normalize_objectives, scalarize, simplex_weights
from .gp import GpFitError, GpModel, fit_gp
from .pareto import Observation, ParetoFront, pareto_filter
from .space import Candidate, ParameterSpace, initial_design, sobol_points


@dataclass(frozen=True)
class BoSettings:
    n_initial: int = 20
    n_candidates: int = 1024
    refine_rounds: int = 10
    line_points: int = 33
    zoom_levels: int = 3
    rho: float = RHO
    n_restarts: int = 10
    # Hyperparameters are fitted on at most this many points (the best half plus a
    # random draw of the rest); the posterior always conditions on every observation.
    max_fit_points: int | None = 64
    max_resample: int = 1000

    def __post_init__(self):
        if self.n_initial < 1 or self.n_candidates < 1 or self.refine_rounds < 0:
            raise ValueError("n_initial and n_candidates must be >= 1, refine_rounds >= 0")
        if self.max_fit_points is not None and self.max_fit_points < 2:
            raise ValueError("max_fit_points must be >= 2")


@dataclass
class Acquisition:
    """EI of the scalarized objective at encoded points, plus the state behind it."""

    model: GpModel
    weights: np.ndarray
    targets: np.ndarray
    best: float

    def __call__(self, X) -> np.ndarray:
        mean, var = self.model.predict(np.atleast_2d(X))
        return expected_improvement(mean, var, self.best)


def _rng_seed(rng: np.random.Generator) -> int:
    return int(rng.integers(2**31 - 1))


def _fit_subset(s: np.ndarray, limit: int | None, rng: np.random.Generator) -> np.ndarray:
    n = len(s)
    if limit is None or n <= limit:
        return np.arange(n)
    order = np.argsort(s, kind="stable")
    head = order[: limit // 2]
    rest = rng.choice(order[limit // 2:], size=limit - len(head), replace=False)
    return np.sort(np.concatenate([head, rest]))


def build_acquisition(observations: Sequence[Observation], space: ParameterSpace,
                      rng: np.random.Generator, settings: BoSettings = BoSettings()) -> Acquisition:
    """Draw weights, scalarize normalized objectives and fit one GP to them."""
    Y = np.stack([o.y for o in observations])
    w = simplex_weights(Y.shape[1], rng)
    s = scalarize(normalize_objectives(Y), w, settings.rho)
    X = np.stack([space.encode(o.candidate) for o in observations])
    fit_seed = _rng_seed(rng)
    sub = _fit_subset(s, settings.max_fit_points, rng)
    hyper = fit_gp(X[sub], s[sub], n_restarts=settings.n_restarts, seed=fit_seed)
    if len(sub) == len(s):
        model = hyper
    else:
        model = GpModel.from_hyperparameters(X, s, hyper.lengthscales, hyper.signal_var, hyper.noise_var)
    return Acquisition(model, w, s, float(s.min()))


def _line_values(space: ParameterSpace, j: int, n_real: int) -> list[np.ndarray]:
    """Legal encoded settings of dimension ``j`` used for a coordinate sweep."""
    dim = space.dims[j]
    width = space.widths()[j]
    if dim.kind == "categorical":
        return [np.eye(width)[k] for k in range(width)]
    if dim.kind == "ordinal":
        m = len(dim.values)
        return [np.array([k / (m - 1) if m > 1 else 0.0]) for k in range(m)]
    if dim.kind == "integer":
        lo, hi = dim.bounds
        count = int(hi - lo) + 1
        if count <= n_real:
            return [np.array([k / (hi - lo) if hi > lo else 0.0]) for k in range(count)]
    return [np.array([u]) for u in np.linspace(0.0, 1.0, n_real)]


def _refine(x0: np.ndarray, acq: Acquisition, space: ParameterSpace, settings: BoSettings) -> tuple[np.ndarray, float]:
    """Coordinate ascent on EI from ``x0``: one sweep per dimension, then zoom in on reals."""
    x = x0.copy()
    val = float(acq(x[None, :])[0])
    n = settings.line_points
    for _ in range(settings.refine_rounds):
        start_val = val
        for j, (dim, sl) in enumerate(zip(space.dims, space.slices())):
            options = _line_values(space, j, n)
            trial = np.repeat(x[None, :], len(options), axis=0)
            for k, block in enumerate(options):
                trial[k, sl] = block
            trial = space.snap_many(trial)
            vals = acq(trial)
            k = int(np.argmax(vals))
            if vals[k] > val:
                x, val = trial[k].copy(), float(vals[k])
            if dim.kind != "real":
                continue
            i, h = sl.start, 1.0 / (n - 1)
            for _zoom in range(settings.zoom_levels):
                grid = np.clip(np.linspace(x[i] - h, x[i] + h, n), 0.0, 1.0)
                trial = np.repeat(x[None, :], n, axis=0)
                trial[:, i] = grid
                vals = acq(trial)
                k = int(np.argmax(vals))
                if vals[k] > val:
                    x, val = trial[k].copy(), float(vals[k])
                h *= 2.0 / (n - 1)
        if val <= start_val * (1.0 + 1e-9):
            break
    return x, val


def initial_candidate(space: ParameterSpace, index: int, seed: int, settings: BoSettings = BoSettings()) -> Candidate:
    return initial_design(space, max(settings.n_initial, index + 1), seed)[index]


def propose_next(observations: Sequence[Observation], space: ParameterSpace, rng: np.random.Generator,
                 settings: BoSettings = BoSettings(), design_seed: int = 0) -> Candidate:
    """Next candidate to evaluate; never an exact repeat of an observed candidate."""
    n = len(observations)
    if n < space.D + 1:
        return initial_candidate(space, n, design_seed, settings)
    seen = {space.key(o.candidate) for o in observations}
    try:
        acq = build_acquisition(observations, space, rng, settings)
    except GpFitError:
        return _fresh_sample(space, rng, seen, settings)

    pts = sobol_points(space.d, settings.n_candidates, _rng_seed(rng))
    pts = space.snap_many(pts)
    vals = acq(pts)
    order = np.argsort(-vals, kind="stable")
    x, _ = _refine(pts[order[0]], acq, space, settings)
    cand = space.decode(x)
    if space.key(cand) not in seen:
        return cand
    for i in order:
        cand = space.decode(pts[i])
        if space.key(cand) not in seen:
            return cand
    return _fresh_sample(space, rng, seen, settings)


def _fresh_sample(space: ParameterSpace, rng: np.random.Generator, seen: set, settings: BoSettings) -> Candidate:
    for _ in range(settings.max_resample):
        cand = space.sample(rng)
        if space.key(cand) not in seen:
            return cand
    raise RuntimeError("could not find an unobserved candidate; the space looks exhausted")


Evaluation = Callable[[Candidate], "np.ndarray | tuple"]


def _as_observation(result, cand: Candidate, it: int) -> Observation:
    if isinstance(result, Observation):
        result.iteration = it
        return result
    if isinstance(result, tuple):
        y, per_world, success = (list(result) + [None, None])[:3]
        return Observation(dict(cand), y, per_world, success, it)
    return Observation(dict(cand), result, None, None, it)


def optimize(evaluate: Evaluation, space: ParameterSpace, budget: int, seed: int,
             settings: BoSettings = BoSettings(),
             on_observation: Callable[[Observation], None] | None = None) -> tuple[list[Observation], ParetoFront]:
    """Initial design followed by BO proposals until ``budget`` evaluations are spent.

    ``evaluate`` returns either an objective vector or ``(y, per_world, success)``.
    Iteration ``t`` draws its randomness from a generator seeded by ``(seed, t)``.
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    design = initial_design(space, min(settings.n_initial, budget), seed)
    observations: list[Observation] = []
    for it in range(budget):
        if it < len(design):
            cand = design[it]
        else:
            rng = np.random.default_rng([seed, it])
            cand = propose_next(observations, space, rng, settings, design_seed=seed)
        obs = _as_observation(evaluate(cand), cand, it)
        observations.append(obs)
        if on_observation is not None:
            on_observation(obs)
    return observations, pareto_filter(observations)


__all__ = [
    "Acquisition",
    "BoSettings",
    "build_acquisition",
    "initial_candidate",
    "optimize",
    "propose_next",
]
