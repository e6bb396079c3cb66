"""CBF, CLF and control-bound rows of the per-step tracking QP.

Every row is affine in the decision variables (u, e):
``cu*u + ce*e + c0 >= 0`` or ``<= 0``. The objective is
``1/2 (u - u_ref)^2 + lam * e^2``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .model import CavState, ConstraintParams, Geometry
from .planner import UnconstrainedPlan, eval_ref

GE = ">=0"
LE = "<=0"

# Order doubles as the deterministic tie-break order of the QP solver.
TAGS = ("CBF1", "CBF2", "CBF3", "CBF4", "CLF", "UMIN", "UMAX")
TAG_ORDER = {t: i for i, t in enumerate(TAGS)}


@dataclass(frozen=True, slots=True)
class LinearConstraint:
    cu: float
    ce: float
    c0: float
    sense: str
    tag: str

    def value(self, u: float, e: float = 0.0) -> float:
        return self.cu * u + self.ce * e + self.c0

    def as_ge(self) -> tuple[float, float, float]:
        """Coefficients of the equivalent ``>= 0`` row."""
        if self.sense == GE:
            return self.cu, self.ce, self.c0
        return -self.cu, -self.ce, -self.c0

    def satisfied(self, u: float, e: float = 0.0, tol: float = 1e-9) -> bool:
        val = self.value(u, e)
        return val >= -tol if self.sense == GE else val <= tol


@dataclass
class QpProblem:
    u_ref: float
    lam: float
    constraints: list = field(default_factory=list)
    u_min: float = -5.886
    u_max: float = 4.905

    def tags(self) -> list:
        return [c.tag for c in self.constraints]

    def objective(self, u: float, e: float) -> float:
        return 0.5 * (u - self.u_ref) ** 2 + self.lam * e * e


def build_cbf1(agent: CavState, preceding: CavState, params: ConstraintParams) -> LinearConstraint:
    b1 = preceding.x - agent.x - params.phi * agent.v - params.delta
    return LinearConstraint(-params.phi, 0.0, (preceding.v - agent.v) + params.k1 * b1, GE, "CBF1")


def build_cbf2(agent: CavState, conflict: CavState, geometry: Geometry,
               params: ConstraintParams) -> LinearConstraint:
    ratio = params.phi / geometry.L
    lf = conflict.v - agent.v - ratio * agent.v * agent.v
    b2 = conflict.x - agent.x - ratio * agent.x * agent.v - params.delta
    return LinearConstraint(-ratio * agent.x, 0.0, lf + params.k2 * b2, GE, "CBF2")


def build_speed_cbfs(agent: CavState, params: ConstraintParams):
    upper = LinearConstraint(-1.0, 0.0, params.k3 * (params.v_max - agent.v), GE, "CBF3")
    lower = LinearConstraint(1.0, 0.0, params.k4 * (agent.v - params.v_min), GE, "CBF4")
    return upper, lower


def build_clf(agent: CavState, v_ref: float, params: ConstraintParams) -> LinearConstraint:
    # V = (v - v_ref)^2 with v_ref frozen over the update interval, so L_f V = 0.
    dv = agent.v - v_ref
    return LinearConstraint(2.0 * dv, -1.0, params.eps * dv * dv, LE, "CLF")


def control_bounds(params: ConstraintParams):
    return (LinearConstraint(1.0, 0.0, -params.u_min, GE, "UMIN"),
            LinearConstraint(-1.0, 0.0, params.u_max, GE, "UMAX"))


def assemble_qp(agent: CavState, preceding: Optional[CavState], conflict: Optional[CavState],
                plan: UnconstrainedPlan, t: float, params: ConstraintParams,
                geometry: Geometry, clf_enabled: bool = True) -> QpProblem:
    """Nominal tracking QP at ``agent``.

    ``t`` is the time since the vehicle's entry; ``preceding``/``conflict``
    are the states of i_p and j, or None when absent.
    """
    u_ref, v_ref = eval_ref(plan, t)
    rows = []
    if preceding is not None:
        rows.append(build_cbf1(agent, preceding, params))
    if conflict is not None:
        rows.append(build_cbf2(agent, conflict, geometry, params))
    rows.extend(build_speed_cbfs(agent, params))
    if clf_enabled:
        rows.append(build_clf(agent, v_ref, params))
    rows.extend(control_bounds(params))
    return QpProblem(u_ref, params.lam, rows, params.u_min, params.u_max)
