"""Reward terms over episode traces and their aggregation into cost vectors.

Rewards follow the "higher is better" convention; ``evaluate`` negates the
weighted sums so that the optimizer minimizes every objective.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

import numpy as np

from .sim.engine import EpisodeTrace, wrap_angle

KINDS = (
    "TaskCompletion",
    "EeBoxDistance",
    "AppliedWrench",
    "EeGoalDistance",
    "EeRefDistance",
    "ObjectPoseDivergence",
)

DEFAULT_ANGLE_WEIGHT = 0.1  # m/rad


class RewardError(ValueError):
    pass


@dataclass(frozen=True)
class RewardSpec:
    kind: str
    weight: float = 1.0
    objective: int = 0
    params: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise RewardError(f"unknown reward kind {self.kind!r}; expected one of {KINDS}")
        if not math.isfinite(self.weight):
            raise RewardError(f"{self.kind}: weight must be finite")
        if self.objective < 0:
            raise RewardError(f"{self.kind}: objective index must be >= 0")

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> RewardSpec:
        return cls(d["kind"], float(d.get("weight", 1.0)), int(d.get("objective", 0)), dict(d.get("params", {})))

    def to_dict(self) -> dict:
        return {"kind": self.kind, "weight": self.weight, "objective": self.objective, "params": dict(self.params)}


def _resolve_xy(trace: EpisodeTrace, ref, what: str) -> tuple[float, ...]:
    if ref is None:
        raise RewardError(f"{what} is required")
    if isinstance(ref, str):
        if ref not in trace.poses:
            raise RewardError(f"{what}: unknown entity {ref!r}")
        return tuple(trace.poses[ref])
    return tuple(float(v) for v in ref)


def _goal_pose(spec: RewardSpec, trace: EpisodeTrace) -> tuple[float, float, float]:
    ref = spec.params.get("goal")
    if ref is None:
        if trace.goal is None:
            raise RewardError(f"{spec.kind} needs a goal pose")
        return trace.goal
    p = _resolve_xy(trace, ref, f"{spec.kind} goal")
    if len(p) == 4:  # entity pose (x, y, z, yaw)
        return p[0], p[1], p[3]
    if len(p) == 3:
        return p[0], p[1], p[2]
    return p[0], p[1], 0.0


def reward_value(spec: RewardSpec, trace: EpisodeTrace) -> float:
    """Unweighted reward of one kind over a finished trace."""
    kind = spec.kind
    dt = trace.dt
    rec = trace.records
    if kind == "TaskCompletion":
        return 1.0 if trace.success else 0.0
    if kind == "AppliedWrench":
        if not len(rec):
            return 0.0
        lateral = np.hypot(rec[:, 10], rec[:, 11])
        return -float(np.sum(np.abs(rec[:, 12]) + lateral) * dt)
    if kind == "EeRefDistance":
        if not len(rec):
            return 0.0
        gap = np.linalg.norm(rec[:, 1:4] - rec[:, 4:7], axis=1)
        return -float(np.sum(gap) * dt)
    if kind == "EeBoxDistance":
        box = spec.params.get("box")
        if box is None:
            raise RewardError("EeBoxDistance needs a 'box' entity or position")
        if not len(rec):
            return 0.0
        if box == trace.object_id:
            z = trace.poses[box][2] if box in trace.poses else 0.0
            centre = np.column_stack([rec[:, 7], rec[:, 8], np.full(len(rec), z)])
        else:
            p = _resolve_xy(trace, box, "EeBoxDistance box")
            centre = np.tile(np.array(p[:3] if len(p) >= 3 else (p[0], p[1], 0.0)), (len(rec), 1))
        return -float(np.sum(np.linalg.norm(rec[:, 4:7] - centre, axis=1)) * dt)
    if kind == "EeGoalDistance":
        ref = spec.params.get("goal")
        p = _resolve_xy(trace, ref, "EeGoalDistance goal")
        goal = np.array(p[:3] if len(p) >= 3 else (p[0], p[1], 0.0))
        if not len(rec):
            raise RewardError("EeGoalDistance needs at least one tick")
        return -float(np.linalg.norm(rec[-1, 4:7] - goal))
    if kind == "ObjectPoseDivergence":
        gx, gy, gyaw = _goal_pose(spec, trace)
        alpha = float(spec.params.get("alpha", DEFAULT_ANGLE_WEIGHT))
        if len(rec):
            ox, oy, oyaw = rec[-1, 7], rec[-1, 8], rec[-1, 9]
        else:
            raise RewardError("ObjectPoseDivergence needs at least one tick")
        return -(math.hypot(ox - gx, oy - gy) + alpha * abs(wrap_angle(oyaw - gyaw)))
    raise RewardError(f"unknown reward kind {kind!r}")


def evaluate(trace: EpisodeTrace, specs: Sequence[RewardSpec], p: int) -> np.ndarray:
    """Cost vector y with y[j] = -sum of weighted rewards assigned to objective j."""
    y = np.zeros(p)
    for spec in specs:
        if not 0 <= spec.objective < p:
            raise RewardError(f"{spec.kind}: objective {spec.objective} outside [0, {p})")
        y[spec.objective] -= spec.weight * reward_value(spec, trace)
    return y
