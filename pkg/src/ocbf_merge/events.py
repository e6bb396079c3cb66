"""Event-triggered robustification of the CBF rows.

Between two QP updates of vehicle i, its state and the states of the
vehicles its constraints depend on stay inside boxes of half-width
``s = (s_x, s_v)`` around their values at the last update (clipped to the
admissible region). Each CBF row is replaced by its worst case over those
boxes, so a control that satisfies the robust row satisfies the original CBF
condition at every instant until one of the states leaves its box.

All terms are linear, bilinear or concave in the box variables, so their
minima are attained at box vertices and are computed by enumeration.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product
from typing import Optional

from .constraints import (GE, LinearConstraint, QpProblem, assemble_qp, build_clf,
                          control_bounds)
from .model import CavState, ConstraintParams, Geometry
from .planner import UnconstrainedPlan, eval_ref
from .qp import QpSolution, solve, solve_relaxed

COMPONENTWISE = "componentwise"
JOINT = "joint"
DEFAULT_HORIZON = 60.0


@dataclass(frozen=True)
class StateBox:
    lo: CavState
    hi: CavState
    degenerate: bool = False

    def vertices(self):
        return [CavState(x, v) for x, v in product((self.lo.x, self.hi.x), (self.lo.v, self.hi.v))]

    def contains(self, state: CavState, tol: float = 0.0) -> bool:
        return (self.lo.x - tol <= state.x <= self.hi.x + tol
                and self.lo.v - tol <= state.v <= self.hi.v + tol)


@dataclass
class RobustTerms:
    bf_min: dict = field(default_factory=dict)
    bgamma_min: dict = field(default_factory=dict)
    bg: dict = field(default_factory=dict)


def make_box(anchor: CavState, s, geometry: Geometry, params: ConstraintParams) -> StateBox:
    sx, sv = s
    if sx <= 0 or sv <= 0:
        raise ValueError("bound vector components must be positive")
    xlo, xhi = max(anchor.x - sx, 0.0), min(anchor.x + sx, geometry.L)
    vlo, vhi = max(anchor.v - sv, params.v_min), min(anchor.v + sv, params.v_max)
    degenerate = False
    if xlo > xhi:
        xlo = xhi = min(max(anchor.x, 0.0), geometry.L)
        degenerate = True
    if vlo > vhi:
        vlo = vhi = min(max(anchor.v, params.v_min), params.v_max)
        degenerate = True
    return StateBox(CavState(xlo, vlo), CavState(xhi, vhi), degenerate)


# Term definitions at a single point; yi is the ego state, yr the relevant vehicle.

def _lf(q, yi, yr, geometry, params):
    if q == 1:
        return yr.v - yi.v
    if q == 2:
        return yr.v - yi.v - params.phi / geometry.L * yi.v * yi.v
    return 0.0


def _gamma(q, yi, yr, geometry, params):
    if q == 1:
        return params.k1 * (yr.x - yi.x - params.phi * yi.v - params.delta)
    if q == 2:
        return params.k2 * (yr.x - yi.x - params.phi / geometry.L * yi.x * yi.v - params.delta)
    if q == 3:
        return params.k3 * (params.v_max - yi.v)
    return params.k4 * (yi.v - params.v_min)


def _vertex_min(fn, q, box_i, box_r, geometry, params):
    others = box_r.vertices() if (q in (1, 2) and box_r is not None) else [None]
    return min(fn(q, yi, yr, geometry, params) for yi in box_i.vertices() for yr in others)


def min_lf(q: int, box_i: StateBox, box_r: Optional[StateBox], geometry: Geometry,
           params: ConstraintParams) -> float:
    """Smallest L_f b_q over the two boxes (box_r is ignored for q = 3, 4)."""
    if q in (3, 4):
        return 0.0
    if q == 1:
        return box_r.lo.v - box_i.hi.v
    return _vertex_min(_lf, q, box_i, box_r, geometry, params)


def min_gamma(q: int, box_i: StateBox, box_r: Optional[StateBox], geometry: Geometry,
              params: ConstraintParams) -> float:
    if q == 1:
        return params.k1 * (box_r.lo.x - box_i.hi.x - params.phi * box_i.hi.v - params.delta)
    if q == 3:
        return params.k3 * (params.v_max - box_i.hi.v)
    if q == 4:
        return params.k4 * (box_i.lo.v - params.v_min)
    return _vertex_min(_gamma, q, box_i, box_r, geometry, params)


def min_joint(q: int, box_i: StateBox, box_r: Optional[StateBox], geometry: Geometry,
              params: ConstraintParams) -> float:
    """Smallest L_f b_q + gamma_q evaluated at a common point of the boxes."""

    def total(q, yi, yr, g, p):
        return _lf(q, yi, yr, g, p) + _gamma(q, yi, yr, g, p)

    return _vertex_min(total, q, box_i, box_r, geometry, params)


def limit_lg_b2(sign_hint: float, box_i: StateBox, geometry: Geometry,
                params: ConstraintParams) -> float:
    """Worst case of L_g b2 = -phi x/L for a control of the given sign."""
    x = box_i.hi.x if sign_hint >= 0 else box_i.lo.x
    return -params.phi * x / geometry.L


_LG_CONST = {1: None, 3: -1.0, 4: 1.0}


def robust_terms(box_i, box_ip, box_j, sign_hint, geometry, params, mode=COMPONENTWISE):
    """Per-constraint robust coefficients for the rows that apply."""
    terms = RobustTerms()
    relevant = {1: box_ip, 2: box_j, 3: None, 4: None}
    for q in (1, 2, 3, 4):
        box_r = relevant[q]
        if q in (1, 2) and box_r is None:
            continue
        if mode == JOINT:
            terms.bf_min[q] = min_joint(q, box_i, box_r, geometry, params)
            terms.bgamma_min[q] = 0.0
        else:
            terms.bf_min[q] = min_lf(q, box_i, box_r, geometry, params)
            terms.bgamma_min[q] = min_gamma(q, box_i, box_r, geometry, params)
        if q == 1:
            terms.bg[q] = -params.phi
        elif q == 2:
            terms.bg[q] = limit_lg_b2(sign_hint, box_i, geometry, params)
        else:
            terms.bg[q] = _LG_CONST[q]
    return terms


def build_robust_qp(anchor: CavState, box_i: StateBox, box_ip: Optional[StateBox],
                    box_j: Optional[StateBox], plan: UnconstrainedPlan, t: float,
                    params: ConstraintParams, geometry: Geometry, mode: str = COMPONENTWISE,
                    sign_hint: float = 1.0, clf_enabled: bool = True,
                    both_limits: bool = False) -> QpProblem:
    """Event-triggered QP: robust CBF rows, CLF at the anchor, control bounds.

    ``both_limits`` adds the merging row with both L_g b2 limits, which is
    valid for either sign of u.
    """
    u_ref, v_ref = eval_ref(plan, t)
    terms = robust_terms(box_i, box_ip, box_j, sign_hint, geometry, params, mode)
    rows = []
    for q in (1, 2, 3, 4):
        if q not in terms.bg:
            continue
        c0 = terms.bf_min[q] + terms.bgamma_min[q]
        rows.append(LinearConstraint(terms.bg[q], 0.0, c0, GE, f"CBF{q}"))
        if q == 2 and both_limits:
            other = limit_lg_b2(-sign_hint, box_i, geometry, params)
            rows.append(LinearConstraint(other, 0.0, c0, GE, "CBF2"))
    if clf_enabled:
        rows.append(build_clf(anchor, v_ref, params))
    rows.extend(control_bounds(params))
    return QpProblem(u_ref, params.lam, rows, params.u_min, params.u_max)


@dataclass
class EventSolve:
    solution: QpSolution
    problem: QpProblem
    sign_hint: float
    retried: bool = False


def _consistent(u, hint):
    return (u >= 0.0) == (hint >= 0.0)


def solve_event_qp(anchor: CavState, preceding: Optional[CavState], conflict: Optional[CavState],
                   s_i, s_ip, s_j, plan: UnconstrainedPlan, t: float, params: ConstraintParams,
                   geometry: Geometry, mode: str = COMPONENTWISE,
                   clf_enabled: bool = True) -> EventSolve:
    """Solve the event-triggered QP at a trigger instant.

    The sign of u needed for the merging row's L_g b2 limit comes from the
    nominal QP at the anchor. When the robust optimum has the other sign the
    QP is re-solved once with the other limit; if neither version is
    self-consistent both limits are imposed together. Infeasible robust QPs
    fall back to the least-violation control.
    """
    box_i = make_box(anchor, s_i, geometry, params)
    box_ip = make_box(preceding, s_ip, geometry, params) if preceding is not None else None
    box_j = make_box(conflict, s_j, geometry, params) if conflict is not None else None

    def robust(hint, both=False):
        return build_robust_qp(anchor, box_i, box_ip, box_j, plan, t, params, geometry, mode,
                               hint, clf_enabled, both)

    if box_j is None:
        prob = robust(1.0)
        sol = solve(prob)
        if not sol.optimal:
            sol = solve_relaxed(prob)
        return EventSolve(sol, prob, 1.0)

    nominal = assemble_qp(anchor, preceding, conflict, plan, t, params, geometry, clf_enabled)
    nom = solve(nominal)
    if not nom.optimal:
        nom = solve_relaxed(nominal)
    hint = 1.0 if nom.u >= 0.0 else -1.0
    prob = robust(hint)
    sol = solve(prob)
    if sol.optimal and _consistent(sol.u, hint):
        return EventSolve(sol, prob, hint)
    prob2 = robust(-hint)
    sol2 = solve(prob2)
    if sol2.optimal and _consistent(sol2.u, -hint):
        return EventSolve(sol2, prob2, -hint, retried=True)
    prob3 = robust(1.0, both=True)
    sol3 = solve(prob3)
    if not sol3.optimal:
        sol3 = solve_relaxed(prob3)
    return EventSolve(sol3, prob3, hint, retried=True)


def _outward_roots(d0, v, u, target):
    """Nonnegative times where d0 + v t + u t^2/2 == target, moving outward."""
    out = []
    if u == 0.0:
        if v != 0.0:
            out.append((target - d0) / v)
    else:
        a, b, c = 0.5 * u, v, d0 - target
        disc = b * b - 4.0 * a * c
        if disc >= 0.0:
            sq = math.sqrt(disc)
            qq = -0.5 * (b + math.copysign(sq, b)) if b != 0.0 else -0.5 * sq * math.copysign(1.0, a)
            if qq != 0.0:
                out.extend((qq / a, c / qq))
            else:
                out.append(0.0)
    res = []
    for t in out:
        if t < -1e-12:
            continue
        t = max(t, 0.0)
        rate = v + u * t
        if rate * target > 0.0 or (rate == 0.0 and u * target > 0.0):
            res.append(t)
    return res


def first_crossing_time(state: CavState, u: float, anchor: CavState, s,
                        horizon: float = DEFAULT_HORIZON):
    """Earliest time at which constant-acceleration motion leaves the box around ``anchor``.

    Returns ``(time, "position" | "velocity")`` or None if the box is not left
    within ``horizon``.
    """
    sx, sv = s
    best = None
    dv0 = state.v - anchor.v
    if u > 0.0:
        best = ((sv - dv0) / u, "velocity")
    elif u < 0.0:
        best = ((-sv - dv0) / u, "velocity")
    if best is not None and best[0] < 0.0:
        best = (0.0, "velocity")
    dx0 = state.x - anchor.x
    for target in (sx, -sx):
        for t in _outward_roots(dx0, state.v, u, target):
            if best is None or t < best[0]:
                best = (t, "position")
    if best is None or best[0] > horizon:
        return None
    return best
