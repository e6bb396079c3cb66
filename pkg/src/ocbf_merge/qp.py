"""Exact solver for the small (u, e) tracking QPs."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .constraints import TAG_ORDER, QpProblem

OPTIMAL = "Optimal"
INFEASIBLE = "Infeasible"
FEAS_TOL = 1e-9

_HARD_BOUNDS = ("UMIN", "UMAX")


@dataclass
class QpSolution:
    u: float
    e: float
    status: str
    active_set: tuple = ()
    multipliers: tuple = field(default=(), repr=False)

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


def _ordered_rows(problem: QpProblem):
    rows = sorted(problem.constraints, key=lambda r: TAG_ORDER.get(r.tag, len(TAG_ORDER)))
    A = np.empty((len(rows), 2))
    c = np.empty(len(rows))
    for k, row in enumerate(rows):
        A[k, 0], A[k, 1], c[k] = row.as_ge()
    return rows, A, c


def _multipliers(A, act, u, e, u_ref, lam):
    """KKT multipliers of the active rows (at most two, so solved in closed form)."""
    g0, g1 = u - u_ref, 2.0 * lam * e
    if len(act) == 1:
        a0, a1 = A[act[0]]
        nn = a0 * a0 + a1 * a1
        return (float((a0 * g0 + a1 * g1) / nn),) if nn > 0 else (0.0,)
    if len(act) == 2:
        (p0, p1), (q0, q1) = A[act[0]], A[act[1]]
        det = p0 * q1 - q0 * p1
        if det != 0.0:
            return (float((g0 * q1 - q0 * g1) / det), float((p0 * g1 - g0 * p1) / det))
        G = A[list(act)].T
        mu, *_ = np.linalg.lstsq(G, np.array([g0, g1]), rcond=None)
        return tuple(float(m) for m in mu)
    return ()


def solve(problem: QpProblem) -> QpSolution:
    """Global optimum of the QP, or an Infeasible solution (u, e are NaN)."""
    rows, A, c = _ordered_rows(problem)
    status, u, e, r, s = kernels.qp_enumerate(A, c, float(problem.u_ref), float(problem.lam),
                                              FEAS_TOL)
    if status == kernels.STATUS_INFEASIBLE:
        return QpSolution(float("nan"), float("nan"), INFEASIBLE)
    act = tuple(k for k in (r, s) if k >= 0)
    return QpSolution(float(u), float(e), OPTIMAL, tuple(rows[k].tag for k in act),
                      _multipliers(A, act, u, e, problem.u_ref, problem.lam))


def solve_relaxed(problem: QpProblem) -> QpSolution:
    """Least-squares constraint violation control for an infeasible problem.

    Squared violations of the CBF rows are minimized subject to the hard
    control bounds; ties are broken towards ``u_ref``. The CLF row is dropped
    since its slack can always absorb it. The status stays Infeasible.
    """
    a, c = [], []
    for row in problem.constraints:
        if row.tag == "CLF" or row.tag in _HARD_BOUNDS:
            continue
        cu, _, c0 = row.as_ge()
        a.append(cu)
        c.append(c0)
    u, _ = kernels.relaxed_minimize(np.asarray(a, dtype=np.float64),
                                    np.asarray(c, dtype=np.float64),
                                    float(problem.u_ref), float(problem.u_min),
                                    float(problem.u_max))
    e = 0.0
    for row in problem.constraints:
        if row.tag == "CLF":
            e = max(0.0, row.cu * u + row.c0)
    return QpSolution(float(u), e, INFEASIBLE)


def solve_or_relax(problem: QpProblem) -> QpSolution:
    sol = solve(problem)
    return sol if sol.optimal else solve_relaxed(problem)
