"""Unconstrained energy/time-optimal reference trajectory.

Minimizing ``beta*tf + int 1/2 u^2`` for a double integrator that must cover
``L`` meters with free terminal speed and free terminal time gives a linear
control ``u(t) = a*t + b`` that vanishes at ``tf``. Stationarity of the
Hamiltonian at ``tf`` and the terminal position lead to

    vf**2 = v0*vf + beta*tf**2/2
    v0*tf + beta*tf**3/(3*vf) = L

with ``a = -beta/vf`` and ``b = beta*tf/vf``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.optimize import brentq

from .model import ConstraintParams


class PlannerError(RuntimeError):
    """Root finding for the reference plan failed."""


@dataclass(frozen=True)
class UnconstrainedPlan:
    a: float
    b_coef: float
    tf: float
    v0: float
    v_terminal: float
    L: float

    def residuals(self) -> tuple[float, float]:
        beta = -self.a * self.v_terminal
        vf, tf = self.v_terminal, self.tf
        r1 = vf * vf - self.v0 * vf - 0.5 * beta * tf * tf
        r2 = self.v0 * tf + beta * tf ** 3 / (3.0 * vf) - self.L
        return r1, r2


def beta_from_alpha(alpha: float, params: ConstraintParams) -> float:
    if not 0.0 <= alpha < 1.0:
        raise ValueError(f"alpha must lie in [0, 1), got {alpha}")
    umax2 = max(params.u_max ** 2, params.u_min ** 2)
    return alpha * umax2 / (2.0 * (1.0 - alpha))


def _terminal_speed(tf, v0, beta):
    # positive root of vf**2 - v0*vf - beta*tf**2/2 = 0
    return 0.5 * (v0 + math.sqrt(v0 * v0 + 2.0 * beta * tf * tf))


def _newton(v0, L, beta, tol=1e-13, max_iter=60):
    """Safeguarded Newton on tf, with vf eliminated through the first equation.

    The position residual is increasing in tf, negative at 0 and positive at
    L/v0, so every iterate is kept inside a shrinking bracket.
    """
    lo, hi = 0.0, L / v0
    tf = hi
    for _ in range(max_iter):
        vf = _terminal_speed(tf, v0, beta)
        g = v0 * tf + beta * tf ** 3 / (3.0 * vf) - L
        if abs(g) < tol * L:
            return tf, vf
        if g > 0.0:
            hi = tf
        else:
            lo = tf
        dvf = beta * tf / (2.0 * vf - v0)
        dg = v0 + beta * tf * tf / vf - beta * tf ** 3 * dvf / (3.0 * vf * vf)
        step = tf - g / dg if dg > 0.0 else -1.0
        tf = step if lo < step < hi else 0.5 * (lo + hi)
    return None


def _bisection(v0, L, beta):
    def g(tf):
        return v0 * tf + beta * tf ** 3 / (3.0 * _terminal_speed(tf, v0, beta)) - L

    hi = L / v0
    tf = brentq(g, 0.0, hi, xtol=1e-13, maxiter=500)
    return tf, _terminal_speed(tf, v0, beta)


def solve_unconstrained(v0: float, L: float, beta: float) -> UnconstrainedPlan:
    """Reference plan for a vehicle entering at speed ``v0`` with ``L`` meters to go."""
    if not (v0 > 0 and L > 0 and beta >= 0):
        raise ValueError(f"need v0 > 0, L > 0, beta >= 0 (got {v0}, {L}, {beta})")
    if beta == 0.0:
        return UnconstrainedPlan(0.0, 0.0, L / v0, v0, v0, L)
    sol = _newton(v0, L, beta)
    if sol is None:
        try:
            sol = _bisection(v0, L, beta)
        except (ValueError, RuntimeError) as exc:
            raise PlannerError(f"no reference plan for v0={v0}, L={L}, beta={beta}") from exc
    tf, vf = sol
    a = -beta / vf
    return UnconstrainedPlan(a, -a * tf, tf, v0, vf, L)


def eval_ref(plan: UnconstrainedPlan, t: float) -> tuple[float, float]:
    """Reference (u, v) at ``t`` seconds after entry; held at the terminal values past tf."""
    if t >= plan.tf:
        return 0.0, plan.v_terminal
    if t < 0.0:
        t = 0.0
    return plan.a * t + plan.b_coef, plan.v0 + plan.b_coef * t + 0.5 * plan.a * t * t


def fallback_plan(v0: float, L: float) -> UnconstrainedPlan:
    """Cruise plan used when the root finder fails: u_ref = 0, v_ref = v0."""
    return UnconstrainedPlan(0.0, 0.0, L / v0, v0, v0, L)
