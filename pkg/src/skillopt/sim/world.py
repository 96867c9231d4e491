"""Randomized worlds for the peg and push tasks."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

TASKS = ("peg", "push")

# stream ids >= this are reserved for held-out evaluation worlds
EVAL_STREAM_BASE = 1 << 20


@dataclass(frozen=True)
class ControllerParams:
    stiffness: float = 500.0  # N/m, every axis
    dt: float = 0.01  # s
    v_lin: float = 0.1  # m/s, GoToLinear and Push path speed

    def __post_init__(self):
        if self.stiffness <= 0 or self.dt <= 0 or self.v_lin <= 0:
            raise ValueError("stiffness, dt and v_lin must be positive")


@dataclass(frozen=True)
class TaskSettings:
    """Nominal layout and randomization ranges for one task."""

    task: str
    object_id: str
    object_pose: tuple[float, float, float]  # nominal (x, y, yaw) of the hole or box
    start_poses: tuple[tuple[float, float, float], ...]  # known starts first, then held-out
    n_known_starts: int
    goal_id: str | None = None
    goal_pose: tuple[float, float, float] | None = None
    clearance: float = 0.0025
    mu_range: tuple[float, float] = (0.2, 1.0)
    seat_force_per_mu: float = 10.0
    belief_radius: float = 0.004
    object_jitter: float = 0.02  # peg: uniform in +-jitter per axis
    position_sigma: float = 0.01  # push: Gaussian sd of object and goal positions
    com_bias: tuple[float, float] = (0.0, 0.0)
    com_radius: float = 0.03
    normal_force: float = 4.905  # N, object weight resisting the push
    rotation_gain: float = 8.0  # rad / m^2
    surface_z: float = 0.0
    goal_tolerance: tuple[float, float] = (0.001, 0.01)
    success_tolerance: tuple[float, float] = (0.01, 0.05)  # push: (m, rad)

    def __post_init__(self):
        if self.task not in TASKS:
            raise ValueError(f"task must be one of {TASKS}")
        if not 1 <= self.n_known_starts <= len(self.start_poses):
            raise ValueError("n_known_starts must be within the start pose list")
        lo, hi = self.mu_range
        if not 0.05 <= lo <= hi <= 2.0:
            raise ValueError("friction range must lie in [0.05, 2.0]")
        if self.clearance <= 0:
            raise ValueError("clearance must be positive")
        if self.task == "push" and self.goal_pose is None:
            raise ValueError("push needs a goal pose")

    @property
    def n_starts(self) -> int:
        return len(self.start_poses)


@dataclass(frozen=True)
class WorldConfig:
    task: str
    seed: int
    stream: int
    true_pose: tuple[float, float, float]
    believed_pose: tuple[float, float, float]
    clearance: float
    mu: float
    seat_force: float
    com_offset: tuple[float, float]
    start_index: int
    start_pose: tuple[float, float, float]
    goal_pose: tuple[float, float, float] | None = None
    settings: TaskSettings | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.clearance <= 0:
            raise ValueError("clearance must be positive")
        if not 0.05 <= self.mu <= 2.0:
            raise ValueError("friction coefficient outside [0.05, 2.0]")

    @property
    def belief_error(self) -> float:
        return math.hypot(self.true_pose[0] - self.believed_pose[0], self.true_pose[1] - self.believed_pose[1])

    def with_(self, **changes) -> WorldConfig:
        return replace(self, **changes)


def world_rng(master_seed: int, stream: int) -> np.random.Generator:
    """Counter-based generator: one independent Philox stream per (seed, stream)."""
    key = (int(stream) << 64) | (int(master_seed) & ((1 << 64) - 1))
    return np.random.Generator(np.random.Philox(key=key))


def _disc(rng: np.random.Generator, radius: float) -> tuple[float, float]:
    r = radius * math.sqrt(rng.random())
    phi = 2.0 * math.pi * rng.random()
    return r * math.cos(phi), r * math.sin(phi)


def sample_world(settings: TaskSettings, master_seed: int, stream: int, start_index: int | None = None) -> WorldConfig:
    rng = world_rng(master_seed, stream)
    ox, oy, oyaw = settings.object_pose
    mu = float(rng.uniform(*settings.mu_range))
    drawn_start = int(rng.integers(settings.n_known_starts))
    start = drawn_start if start_index is None else int(start_index)
    goal = None
    if settings.task == "peg":
        true = (ox + float(rng.uniform(-1, 1)) * settings.object_jitter,
                oy + float(rng.uniform(-1, 1)) * settings.object_jitter, oyaw)
        dx, dy = _disc(rng, settings.belief_radius)
        believed = (true[0] + dx, true[1] + dy, oyaw)
        com = (0.0, 0.0)
    else:
        sx, sy = rng.normal(0.0, settings.position_sigma, size=2)
        true = (ox + float(sx), oy + float(sy), oyaw)
        believed = true
        gx, gy, gyaw = settings.goal_pose
        ex, ey = rng.normal(0.0, settings.position_sigma, size=2)
        goal = (gx + float(ex), gy + float(ey), gyaw)
        cx, cy = _disc(rng, settings.com_radius)
        com = (settings.com_bias[0] + cx, settings.com_bias[1] + cy)
    return WorldConfig(
        task=settings.task,
        seed=int(master_seed),
        stream=int(stream),
        true_pose=true,
        believed_pose=believed,
        clearance=settings.clearance,
        mu=mu,
        seat_force=settings.seat_force_per_mu * mu,
        com_offset=com,
        start_index=start,
        start_pose=tuple(settings.start_poses[start]),
        goal_pose=goal,
        settings=settings,
    )


def sample_worlds(settings: TaskSettings, master_seed: int, n: int) -> list[WorldConfig]:
    """``n`` training worlds; world ``i`` depends only on (master_seed, i)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return [sample_world(settings, master_seed, i) for i in range(n)]


def evaluation_worlds(settings: TaskSettings, master_seed: int, reps: int = 2,
                      starts: Sequence[int] | None = None) -> list[WorldConfig]:
    """Fresh worlds for every start configuration (known and held-out), ``reps`` each."""
    starts = range(settings.n_starts) if starts is None else starts
    out = []
    for s in starts:
        for r in range(reps):
            out.append(sample_world(settings, master_seed, EVAL_STREAM_BASE + s * 1000 + r, start_index=s))
    return out
