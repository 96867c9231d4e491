"""Pareto dominance, non-dominated filtering and 2D hypervolume (minimization)."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np


@dataclass
class Observation:
    candidate: dict
    y: np.ndarray
    per_world: np.ndarray | None = None  # (worlds, p)
    success: np.ndarray | None = None  # (worlds,)
    iteration: int = 0

    def __post_init__(self):
        self.y = np.asarray(self.y, dtype=float)
        if not np.all(np.isfinite(self.y)):
            raise ValueError(f"observation {self.iteration} has a non-finite objective vector")

    @property
    def success_rate(self) -> float:
        return float(np.mean(self.success)) if self.success is not None and len(self.success) else float("nan")


def dominates(a, b) -> bool:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return bool(np.all(a <= b) and np.any(a < b))


def pareto_mask(Y) -> np.ndarray:
    """Boolean mask of rows not dominated by any other row."""
    Y = np.asarray(Y, dtype=float)
    if Y.size == 0:
        return np.zeros(len(Y), dtype=bool)
    le = np.all(Y[:, None, :] <= Y[None, :, :], axis=2)  # le[i, j]: i <= j everywhere
    lt = np.any(Y[:, None, :] < Y[None, :, :], axis=2)
    dominated_by = le & lt  # [i, j]: i dominates j
    return ~dominated_by.any(axis=0)


@dataclass
class ParetoFront:
    members: list[Any] = field(default_factory=list)
    indices: list[int] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __getitem__(self, i):
        return self.members[i]


def _vector(o) -> np.ndarray:
    return np.asarray(o.y if isinstance(o, Observation) else o, dtype=float)


def pareto_filter(observations: Sequence[Any]) -> ParetoFront:
    """Non-dominated subset in insertion order; equal vectors are all kept."""
    observations = list(observations)
    if not observations:
        return ParetoFront()
    Y = np.stack([_vector(o) for o in observations])
    idx = [int(i) for i in np.flatnonzero(pareto_mask(Y))]
    return ParetoFront([observations[i] for i in idx], idx)


def hypervolume_2d(Y, ref) -> float:
    """Area dominated by the points of ``Y`` and bounded by ``ref``."""
    Y = np.asarray(Y, dtype=float).reshape(-1, 2)
    rx, ry = float(ref[0]), float(ref[1])
    Y = Y[(Y[:, 0] < rx) & (Y[:, 1] < ry)]
    if not len(Y):
        return 0.0
    Y = Y[pareto_mask(Y)]
    Y = Y[np.lexsort((Y[:, 1], Y[:, 0]))]
    area, prev_y = 0.0, ry
    for x, y in Y:
        if y < prev_y:
            area += (rx - x) * (prev_y - y)
            prev_y = y
    return area
