"""Robot models: goal-seeking nominal controller, single-integrator and
unicycle kinematics, and the near-identity velocity-to-(v, omega) map.

The nominal controller commands a constant speed k straight at the goal
(gain k / distance), with a hard zero inside the arrival radius to avoid the
division singularity at the goal. Integration is explicit Euler at the
control period; at centimeter-per-step motion scales nothing finer is
needed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .safety_filter import ControlInput2D


def wrap_angle(theta: float) -> float:
    """Normalize to (-pi, pi]."""
    r = math.remainder(theta, math.tau)
    if r <= -math.pi:
        r += math.tau
    return r


@dataclass(frozen=True)
class RobotState:
    x: float
    y: float
    theta: float = 0.0

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.x, self.y, self.theta)):
            raise ValueError("robot state must be finite")
        object.__setattr__(self, "theta", wrap_angle(self.theta))

    @property
    def position(self) -> tuple[float, float]:
        return (self.x, self.y)


@dataclass(frozen=True)
class NominalParams:
    k: float = 0.15          # commanded speed, m/s
    goal_eps: float = 0.005  # arrival radius, m

    def __post_init__(self):
        if not (self.k > 0 and self.goal_eps > 0):
            raise ValueError("require k > 0 and goal_eps > 0")


@dataclass(frozen=True)
class DiffeoParams:
    """Look-ahead offset of the velocity reference point, meters."""

    r: float = 0.05

    def __post_init__(self):
        if not self.r > 0:
            raise ValueError("require r > 0")


def nominal_control(p, goal, params: NominalParams) -> ControlInput2D:
    """Constant-speed pull toward the goal; zero inside the arrival radius."""
    dx = goal[0] - p[0]
    dy = goal[1] - p[1]
    dist = math.hypot(dx, dy)
    if dist < params.goal_eps:
        return ControlInput2D(0.0, 0.0)
    kp = params.k / dist
    return ControlInput2D(kp * dx, kp * dy)


def integrate_single(p, u: ControlInput2D, dt: float):
    if dt <= 0:
        raise ValueError("dt must be positive")
    return (p[0] + u.vx * dt, p[1] + u.vy * dt)


def unicycle_from_velocity(theta: float, u: ControlInput2D, params: DiffeoParams):
    """Map a planar velocity command to (v, omega) via the near-identity
    diffeomorphism: the point at offset r ahead of the axle tracks u exactly."""
    c, s = math.cos(theta), math.sin(theta)
    v = c * u.vx + s * u.vy
    omega = (-s * u.vx + c * u.vy) / params.r
    return v, omega


def integrate_unicycle(state: RobotState, v: float, omega: float, dt: float) -> RobotState:
    if dt <= 0:
        raise ValueError("dt must be positive")
    return RobotState(
        x=state.x + v * math.cos(state.theta) * dt,
        y=state.y + v * math.sin(state.theta) * dt,
        theta=state.theta + omega * dt,
    )
