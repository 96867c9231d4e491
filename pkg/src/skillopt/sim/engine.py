"""Quasi-static planar simulator with a compliant end effector.

The controller is modelled by the gap between the reference and the actual
end-effector pose: contact forces equal stiffness times that gap. One
behavior-tree tick advances the simulation by one control step ``dt``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from ..bt import BtNode, TickStatus
from ..world_model import Scene, SkillBinding
from .spiral import SpiralTracker
from .world import ControllerParams, WorldConfig

DEFAULT_MAX_TICKS = 3000

TRACE_COLUMNS = (
    "t", "ref_x", "ref_y", "ref_z", "act_x", "act_y", "act_z",
    "obj_x", "obj_y", "obj_yaw", "Fx", "Fy", "Fz",
)

SUCCESS, FAILURE, RUNNING = TickStatus.SUCCESS, TickStatus.FAILURE, TickStatus.RUNNING


class SimulationError(RuntimeError):
    pass


@dataclass(slots=True)
class SimState:
    t: float
    ref: tuple[float, float, float]
    act: tuple[float, float, float]
    obj: tuple[float, float, float]
    force: tuple[float, float, float] = (0.0, 0.0, 0.0)
    in_contact: bool = False
    inserted: bool = False

    def row(self) -> tuple:
        return (self.t, *self.ref, *self.act, *self.obj, *self.force)


@dataclass
class EpisodeTrace:
    records: np.ndarray  # (ticks, 13), columns TRACE_COLUMNS
    in_contact: np.ndarray
    inserted: np.ndarray
    status: TickStatus
    dt: float
    object_id: str | None = None
    goal: tuple[float, float, float] | None = None
    poses: Mapping[str, tuple[float, float, float, float]] = field(default_factory=dict)

    @property
    def ticks(self) -> int:
        return len(self.records)

    @property
    def success(self) -> bool:
        return self.status is TickStatus.SUCCESS

    def column(self, name: str) -> np.ndarray:
        return self.records[:, TRACE_COLUMNS.index(name)]

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(TRACE_COLUMNS)
            for row in self.records:
                w.writerow([repr(float(v)) for v in row])


@dataclass
class PegSearch:
    """Progress of one insertion attempt."""

    center: tuple[float, float]
    spiral: SpiralTracker
    captured: bool = False
    exhausted: bool = False


def step_peg(state: SimState, search: PegSearch, params: Mapping[str, float], world: WorldConfig,
             ctrl: ControllerParams) -> SimState:
    """One control step of the pressed spiral search.

    The reference is pushed below the surface so that the quasi-static normal
    force equals the commanded force; the actual pose slides on the surface
    along the reference. Capture happens when the peg is within the clearance
    of the true hole centre, the per-tick step does not exceed the clearance
    and the force reaches the world's seating threshold.
    """
    force, v = params["force"], params["velocity"]
    surface = world.settings.surface_z if world.settings else 0.0
    k = ctrl.stiffness
    dx, dy = search.spiral.advance()
    rx, ry = search.center[0] + dx, search.center[1] + dy
    rz = surface - force / k
    fz = max(k * (surface - rz), 0.0)
    mx, my = rx - state.act[0], ry - state.act[1]
    step = math.hypot(mx, my)
    if step > 0.0:
        fx, fy = -world.mu * fz * mx / step, -world.mu * fz * my / step
    else:
        fx = fy = 0.0
    state.ref = (rx, ry, rz)
    state.act = (rx, ry, surface)
    state.force = (fx, fy, fz)
    state.in_contact = fz > 0.0
    c = world.clearance
    miss = math.hypot(rx - world.true_pose[0], ry - world.true_pose[1])
    if miss <= c and v * ctrl.dt <= c and force >= world.seat_force:
        search.captured = True
        state.inserted = True
    elif search.spiral.exhausted:
        search.exhausted = True
    return state


@dataclass
class PushProgress:
    p0: tuple[float, float]
    q: tuple[float, float]
    u: tuple[float, float]
    offset: tuple[float, float]
    phase: str = "approach"


def step_push(state: SimState, progress: PushProgress, world: WorldConfig, ctrl: ControllerParams) -> SimState:
    """One control step of the straight-line push.

    The object translates along the push direction by the reference
    displacement attenuated by 1/(1 + mu) and rotates by rotation_gain * l * ds,
    where l is the signed distance from the push line to the centre of mass.
    The push stops when the object's contact point reaches the target.
    """
    s = world.settings
    ux, uy = progress.u
    v_step = ctrl.v_lin * ctrl.dt
    rx, ry, rz = state.ref
    if progress.phase == "approach":
        gx, gy = progress.p0
        dist = math.hypot(gx - rx, gy - ry)
        if dist <= v_step:
            rx, ry = gx, gy
            progress.phase = "push"
        else:
            rx += (gx - rx) / dist * v_step
            ry += (gy - ry) / dist * v_step
        state.ref = (rx, ry, rz)
        state.act = state.ref
        state.force = (0.0, 0.0, 0.0)
        state.in_contact = False
        return state

    ox, oy, yaw = state.obj
    slip = 1.0 + world.mu
    cx, cy = ox + progress.offset[0], oy + progress.offset[1]
    remaining = (progress.q[0] - cx) * ux + (progress.q[1] - cy) * uy
    d_ref = min(v_step, max(remaining, 0.0) * slip)
    d_obj = d_ref / slip
    cos_y, sin_y = math.cos(yaw), math.sin(yaw)
    dx, dy = world.com_offset
    com_x = ox + cos_y * dx - sin_y * dy
    com_y = oy + sin_y * dx + cos_y * dy
    lever = ux * (com_y - progress.p0[1]) - uy * (com_x - progress.p0[0])
    state.obj = (ox + ux * d_obj, oy + uy * d_obj, yaw + s.rotation_gain * lever * d_obj)
    rx, ry = rx + ux * d_ref, ry + uy * d_ref
    lag = world.mu * s.normal_force / ctrl.stiffness
    state.ref = (rx, ry, rz)
    state.act = (rx - ux * lag, ry - uy * lag, rz)
    state.force = (ctrl.stiffness * lag * ux, ctrl.stiffness * lag * uy, 0.0)
    state.in_contact = True
    if remaining * slip - d_ref <= 1e-12:
        progress.phase = "done"
    return state


def wrap_angle(a: float) -> float:
    return (a + math.pi) % (2.0 * math.pi) - math.pi


class Simulator:
    """Environment handed to behavior-tree ``Action`` nodes."""

    def __init__(self, scene: Scene, world: WorldConfig, ctrl: ControllerParams | None = None):
        if world.settings is None:
            raise SimulationError("world has no task settings")
        self.scene = scene
        self.world = world
        self.ctrl = ctrl or ControllerParams()
        self.settings = world.settings
        sx, sy, sz = world.start_pose
        self.state = SimState(0.0, (sx, sy, sz), (sx, sy, sz), tuple(world.true_pose))
        self.rows: list[tuple] = []
        self.contact: list[bool] = []
        self.inserted: list[bool] = []

    # -- pose resolution ---------------------------------------------------

    def believed_xy(self, entity_id: str) -> tuple[float, float]:
        """Where the robot believes an entity is in this world."""
        x, y, _, _ = self.pose_of(entity_id)
        return x, y

    def pose_of(self, entity_id: str) -> tuple[float, float, float, float]:
        """World pose ``(x, y, z, yaw)`` of an entity as the robot knows it."""
        s, w = self.settings, self.world
        x, y, z, yaw = self.scene.entity(entity_id).pose
        if entity_id == s.object_id:
            return w.believed_pose[0], w.believed_pose[1], z, w.believed_pose[2]
        if entity_id == s.goal_id and w.goal_pose is not None:
            return w.goal_pose[0], w.goal_pose[1], z, w.goal_pose[2]
        anchor = self.scene.entity(entity_id).properties.get("relative_to")
        if anchor == s.object_id:
            x += w.believed_pose[0] - s.object_pose[0]
            y += w.believed_pose[1] - s.object_pose[1]
        elif anchor is not None and anchor == s.goal_id and w.goal_pose is not None:
            x += w.goal_pose[0] - s.goal_pose[0]
            y += w.goal_pose[1] - s.goal_pose[1]
        return x, y, z, yaw

    # -- skills ----------------------------------------------------------------

    def tick_skill(self, binding: SkillBinding, memory: dict) -> TickStatus:
        handler = SKILL_HANDLERS.get(binding.skill)
        if handler is None:
            raise SimulationError(f"no simulator handler for skill {binding.skill!r}")
        return handler(self, binding.bound, memory)

    def _go_to_linear(self, params, memory) -> TickStatus:
        if "target" not in memory:
            memory["target"] = self.pose_of(params["target"])[:3]
        tx, ty, tz = memory["target"]
        rx, ry, rz = self.state.ref
        dist = math.sqrt((tx - rx) ** 2 + (ty - ry) ** 2 + (tz - rz) ** 2)
        if dist <= 1e-12:
            return SUCCESS
        step = min(self.ctrl.v_lin * self.ctrl.dt, dist)
        f = step / dist
        ref = (rx + (tx - rx) * f, ry + (ty - ry) * f, rz + (tz - rz) * f) if step < dist else (tx, ty, tz)
        self.state.ref = ref
        self.state.act = ref
        self.state.force = (0.0, 0.0, 0.0)
        self.state.in_contact = False
        return RUNNING

    def _peg_insertion(self, params, memory) -> TickStatus:
        search = memory.get("search")
        if search is None:
            R = float(params["radius"])
            search = PegSearch(
                center=self.believed_xy(params["hole"]),
                spiral=SpiralTracker(R, float(params["velocity"]), self.world.clearance, self.ctrl.dt),
            )
            memory["search"] = search
        if search.captured or search.exhausted:
            self.state.force = (0.0, 0.0, 0.0)
            self.state.in_contact = False
            return SUCCESS if search.captured else FAILURE
        step_peg(self.state, search, params, self.world, self.ctrl)
        return RUNNING

    def _push(self, params, memory) -> TickStatus:
        progress = memory.get("push")
        if progress is None:
            bx, by = self.believed_xy(params["box"])
            gx, gy, _, _ = self.pose_of(params["goal"])
            o = (float(params["start_offset_x"]), float(params["start_offset_y"]))
            p0 = (bx + o[0], by + o[1])
            q = (gx + float(params["goal_offset_x"]), gy + float(params["goal_offset_y"]))
            n = math.hypot(q[0] - p0[0], q[1] - p0[1])
            u = ((q[0] - p0[0]) / n, (q[1] - p0[1]) / n) if n > 0 else (1.0, 0.0)
            progress = PushProgress(p0, q, u, o)
            memory["push"] = progress
        if progress.phase == "done":
            self.state.act = self.state.ref
            self.state.force = (0.0, 0.0, 0.0)
            self.state.in_contact = False
            return SUCCESS if self.push_succeeded(params["goal"]) else FAILURE
        step_push(self.state, progress, self.world, self.ctrl)
        return RUNNING

    def push_succeeded(self, goal_id: str) -> bool:
        gx, gy, _, gyaw = self.pose_of(goal_id)
        ox, oy, yaw = self.state.obj
        tol_pos, tol_yaw = self.settings.success_tolerance
        return math.hypot(ox - gx, oy - gy) <= tol_pos and abs(wrap_angle(yaw - gyaw)) <= tol_yaw

    # -- episode bookkeeping ---------------------------------------------------

    def end_tick(self) -> None:
        self.state.t = len(self.rows) * self.ctrl.dt + self.ctrl.dt
        self.rows.append(self.state.row())
        self.contact.append(self.state.in_contact)
        self.inserted.append(self.state.inserted)

    def trace(self, status: TickStatus) -> EpisodeTrace:
        records = np.array(self.rows, dtype=float).reshape(-1, len(TRACE_COLUMNS))
        s = self.settings
        poses = {e.id: self.pose_of(e.id) for e in self.scene.entities if e.pose is not None}
        goal = None
        if s.goal_id is not None and self.world.goal_pose is not None:
            gx, gy, _, gyaw = self.pose_of(s.goal_id)
            goal = (gx, gy, gyaw)
        return EpisodeTrace(
            records=records,
            in_contact=np.array(self.contact, dtype=bool),
            inserted=np.array(self.inserted, dtype=bool),
            status=status,
            dt=self.ctrl.dt,
            object_id=s.object_id,
            goal=goal,
            poses=poses,
        )


SKILL_HANDLERS: dict[str, Any] = {
    "GoToLinear": Simulator._go_to_linear,
    "PegInsertion": Simulator._peg_insertion,
    "Push": Simulator._push,
}


def run_episode(tree: BtNode, world: WorldConfig, ctrl: ControllerParams | None = None,
                max_ticks: int = DEFAULT_MAX_TICKS, *, scene: Scene) -> EpisodeTrace:
    """Tick ``tree`` until it settles or ``max_ticks`` elapse (then Failure)."""
    sim = Simulator(scene, world, ctrl)
    tree.reset()
    status = FAILURE
    for _ in range(max_ticks):
        status = tree.tick(sim)
        sim.end_tick()
        if status is not RUNNING:
            break
    else:
        status = FAILURE
    return sim.trace(status)
