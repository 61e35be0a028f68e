"""Closed-form safety filter for single-integrator inputs.

For single-integrator dynamics the barrier constraint reduces to a single
half-space in velocity space, grad . u >= -gamma * h, so the minimum-norm
QP has the exact solution: keep the nominal input when feasible, otherwise
project it onto the constraint boundary along grad. No numeric QP solver is
involved, which keeps the control loop free of solver jitter.

The speed cap applies after projection; clamping may re-enter the constraint
interior, which is logged via the `clamped` flag rather than re-solved
(velocity commands shrink toward zero, which is always the safe direction).
When the gradient is numerically zero the constraint carries no information:
the nominal input passes through if h >= 0, otherwise the filter commands a
full stop and flags the outcome as degenerate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ContractError


@dataclass(frozen=True)
class ControlInput2D:
    vx: float = 0.0
    vy: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.vx) and math.isfinite(self.vy)):
            raise ContractError("control input components must be finite")

    def norm(self) -> float:
        return math.hypot(self.vx, self.vy)


@dataclass(frozen=True)
class FilterParams:
    gamma: float = 0.15       # class-K slope, 1/s
    v_max: float = 0.15       # speed cap, m/s
    grad_eps: float = 1e-9    # below this gradient norm the constraint is degenerate

    def __post_init__(self):
        if not (self.gamma > 0 and self.v_max > 0 and self.grad_eps >= 0):
            raise ValueError("require gamma > 0, v_max > 0, grad_eps >= 0")


@dataclass(frozen=True)
class FilterOutcome:
    u: ControlInput2D
    constraint_active: bool = False
    degenerate: bool = False
    clamped: bool = False


def alpha(h: float, gamma: float) -> float:
    """Linear class-K function: strictly increasing, alpha(0) = 0."""
    return gamma * h


def filter(u_nom: ControlInput2D, h: float, grad, params: FilterParams) -> FilterOutcome:
    """Minimum-norm correction of u_nom subject to grad . u >= -alpha(h)."""
    gx, gy = float(grad[0]), float(grad[1])
    if not (math.isfinite(h) and math.isfinite(gx) and math.isfinite(gy)):
        raise ContractError("filter inputs must be finite")

    constraint_active = False
    degenerate = False
    gnorm_sq = gx * gx + gy * gy
    if math.sqrt(gnorm_sq) <= params.grad_eps:
        if h >= 0:
            ux, uy = u_nom.vx, u_nom.vy
        else:
            # Vanishing gradient in the unsafe set: stop, conservatively.
            ux, uy = 0.0, 0.0
            degenerate = True
    else:
        bound = -alpha(h, params.gamma)
        dot = gx * u_nom.vx + gy * u_nom.vy
        if dot >= bound:
            ux, uy = u_nom.vx, u_nom.vy
        else:
            lam = (bound - dot) / gnorm_sq
            ux = u_nom.vx + lam * gx
            uy = u_nom.vy + lam * gy
            constraint_active = True

    clamped = False
    speed = math.hypot(ux, uy)
    if speed > params.v_max:
        scale = params.v_max / speed
        ux *= scale
        uy *= scale
        clamped = True

    return FilterOutcome(
        u=ControlInput2D(ux, uy),
        constraint_active=constraint_active,
        degenerate=degenerate,
        clamped=clamped,
    )
