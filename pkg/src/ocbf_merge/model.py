"""Domain types for the two-road merging geometry and the original constraints.

Positions are arc lengths measured from each vehicle's own origin. Both roads
are ``L`` meters long up to the merging point, so positions on different roads
are directly comparable.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Optional


class CavState(NamedTuple):
    x: float  # m, distance from own origin
    v: float  # m/s


@dataclass(frozen=True)
class Geometry:
    L: float = 400.0
    num_lanes: int = 2

    def __post_init__(self):
        if not self.L > 0:
            raise ValueError(f"control-zone length must be positive, got {self.L}")
        if self.num_lanes != 2:
            raise ValueError("only the two-road merging geometry is supported")


@dataclass(frozen=True)
class ConstraintParams:
    """Safety, speed and control limits plus CBF/CLF gains.

    Defaults are the values used in the merging experiments: 1.8 s reaction
    time, zero standstill distance, 0-30 m/s, -5.886..4.905 m/s^2, unit
    class-K gains and slack weight 10. ``eps`` (CLF rate) is not given there
    and defaults to 10.
    """

    phi: float = 1.8
    delta: float = 0.0
    v_min: float = 0.0
    v_max: float = 30.0
    u_min: float = -5.886
    u_max: float = 4.905
    k1: float = 1.0
    k2: float = 1.0
    k3: float = 1.0
    k4: float = 1.0
    eps: float = 10.0
    lam: float = 10.0

    def __post_init__(self):
        if not self.phi > 0:
            raise ValueError("phi must be positive")
        if self.delta < 0:
            raise ValueError("delta must be non-negative")
        if self.v_min < 0 or not self.v_max > self.v_min:
            raise ValueError("need 0 <= v_min < v_max")
        if not self.u_min < 0 < self.u_max:
            raise ValueError("need u_min < 0 < u_max")
        for name in ("k1", "k2", "k3", "k4", "eps", "lam"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")

    @property
    def gains(self) -> tuple:
        return (self.k1, self.k2, self.k3, self.k4)


@dataclass(slots=True)
class CavAgent:
    """One vehicle inside the control zone.

    ``ip`` is the id of the vehicle physically ahead on the same road, ``j``
    the id of the merging-conflict vehicle (the previous vehicle in FIFO order
    when it drives on the other road). ``bound_anchor``/``s`` describe the
    current trigger box of the event-driven scheme.
    """

    id: int
    lane: int
    state: CavState
    t0: float
    tf: Optional[float] = None
    u_current: float = 0.0
    ip: Optional[int] = None
    j: Optional[int] = None
    bound_anchor: Optional[CavState] = None
    s: tuple = (2.0, 0.5)
    index: int = 0  # 1-based FIFO position, maintained by the coordinator
    plan: object = field(default=None, repr=False)

    def __post_init__(self):
        if self.s[0] <= 0 or self.s[1] <= 0:
            raise ValueError("bound vector components must be positive")


def eval_b1(agent: CavState, preceding: CavState, params: ConstraintParams) -> float:
    """Rear-end margin x_ip - x_i - phi*v_i - delta (>= 0 means safe)."""
    return preceding.x - agent.x - params.phi * agent.v - params.delta


def phi_of_x(x: float, geometry: Geometry, params: ConstraintParams) -> float:
    """Position-dependent reaction time, growing linearly from 0 to phi at the merge."""
    if x < 0.0 or x > geometry.L:
        raise ValueError(f"x={x} outside the control zone [0, {geometry.L}]")
    return params.phi * x / geometry.L


def eval_b2(agent: CavState, conflict: CavState, geometry: Geometry,
            params: ConstraintParams) -> float:
    """Merging margin z_ij - Phi(x_i)*v_i - delta."""
    return conflict.x - agent.x - phi_of_x(agent.x, geometry, params) * agent.v - params.delta


def eval_b3_b4(agent: CavState, params: ConstraintParams) -> tuple[float, float]:
    return params.v_max - agent.v, agent.v - params.v_min
