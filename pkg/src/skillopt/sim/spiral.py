"""Archimedean search spiral r = b * theta / (2 pi), capped at radius R.

Past the cap the path continues on the circle of radius R. Arc length is
measured along the capped path so that the spiral can be traversed at a
constant path speed.
"""

from __future__ import annotations

import math


def arc_length(theta: float, R: float, b: float) -> float:
    a = b / (2.0 * math.pi)
    theta_cap = R / a
    if theta <= theta_cap:
        return 0.5 * a * (theta * math.sqrt(1.0 + theta * theta) + math.asinh(theta))
    return arc_length(theta_cap, R, b) + R * (theta - theta_cap)


def arc_rate(theta: float, R: float, b: float) -> float:
    """d(arc length)/d(theta)."""
    a = b / (2.0 * math.pi)
    if a * theta < R:
        return a * math.sqrt(1.0 + theta * theta)
    return R


def newton_step(theta: float, s: float, R: float, b: float) -> float:
    """One Newton update of the angle towards arc length ``s``."""
    return max(0.0, theta - (arc_length(theta, R, b) - s) / arc_rate(theta, R, b))


def spiral_offset(theta: float, R: float, b: float) -> tuple[float, float]:
    r = min(b * theta / (2.0 * math.pi), R)
    return r * math.cos(theta), r * math.sin(theta)


def spiral_theta(s: float, R: float, b: float, tol: float = 1e-14, max_iter: int = 100) -> float:
    """Angle at arc length ``s``, Newton iterated to convergence."""
    if s <= 0.0:
        return 0.0
    a = b / (2.0 * math.pi)
    theta = math.sqrt(2.0 * s / a)
    for _ in range(max_iter):
        nxt = newton_step(theta, s, R, b)
        if abs(nxt - theta) <= tol * max(1.0, theta):
            return nxt
        theta = nxt
    return theta


def spiral_reference(t: float, R: float, v: float, b: float) -> tuple[float, float]:
    """Offset from the spiral centre after travelling ``t`` seconds at path speed ``v``."""
    if R <= 0.0 or v <= 0.0 or t <= 0.0:
        return 0.0, 0.0
    return spiral_offset(spiral_theta(v * t, R, b), R, b)


class SpiralTracker:
    """Per-tick traversal: one Newton step from the previous angle each tick."""

    def __init__(self, R: float, v: float, b: float, dt: float):
        self.R, self.v, self.b, self.dt = R, v, b, dt
        self.theta = 0.0
        self.ticks = 0
        a = b / (2.0 * math.pi)
        self.theta_cap = R / a if R > 0 else 0.0

    def advance(self) -> tuple[float, float]:
        """Offset for the next tick; the first call returns the centre."""
        if self.R <= 0.0:
            self.ticks += 1
            return 0.0, 0.0
        if self.ticks > 0:
            theta = newton_step(self.theta, self.ticks * self.v * self.dt, self.R, self.b)
            # past the last revolution the search is over; clamping also guards tiny R
            self.theta = min(theta, self.theta_cap + 2.0 * math.pi)
        self.ticks += 1
        return spiral_offset(self.theta, self.R, self.b)

    @property
    def exhausted(self) -> bool:
        """True once a full revolution on the capping circle has been traversed."""
        return self.R <= 0.0 or self.theta >= self.theta_cap + 2.0 * math.pi
