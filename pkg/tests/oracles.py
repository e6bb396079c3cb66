"""Independent reference computations used by the tests.

None of these reuse the package's algorithms: QPs are checked by dense search
over u with the best slack computed per grid point, box minima by dense grids,
plans by ODE integration and event times by fine sampling.
"""
import math

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import minimize_scalar


# --- QP ---------------------------------------------------------------------

def _slack_interval(rows, u):
    """Feasible e-interval and u-row violation for each u (vectorized)."""
    u = np.asarray(u, dtype=float)
    lo = np.full_like(u, -np.inf)
    hi = np.full_like(u, np.inf)
    viol = np.zeros_like(u)
    for au, ae, c in rows:
        val = au * u + c
        if ae > 0:
            lo = np.maximum(lo, -val / ae)
        elif ae < 0:
            hi = np.minimum(hi, val / -ae)
        else:
            viol = np.maximum(viol, -val)
    return lo, hi, viol


def _infeasibility(rows, u):
    lo, hi, viol = _slack_interval(rows, u)
    gap = np.where(np.isfinite(lo) & np.isfinite(hi), lo - hi, -np.inf)
    return np.maximum(viol, gap)


def _objective(rows, u, u_ref, lam):
    lo, hi, _ = _slack_interval(rows, u)
    e = np.clip(0.0, lo, hi)
    return 0.5 * (u - u_ref) ** 2 + lam * e ** 2, e


def qp_oracle(rows, u_ref, lam, window=200.0, tol=1e-9):
    """Brute-force solution of min 1/2(u-u_ref)^2 + lam e^2 s.t. rows >= 0.

    ``rows`` are ``(a_u, a_e, c)`` triples in ``>= 0`` form. Returns
    ``(feasible, u, e)``. Feasibility is decided by minimizing the (convex)
    worst violation; the optimum by a 0.1 grid, a 1e-3 grid around the best
    point and a bounded scalar refinement.
    """
    grid = np.linspace(-window, window, int(2 * window / 0.1) + 1)
    h = _infeasibility(rows, grid)
    k = int(np.argmin(h))
    a, b = grid[max(k - 1, 0)], grid[min(k + 1, len(grid) - 1)]
    res = minimize_scalar(lambda x: float(_infeasibility(rows, np.array([x]))[0]),
                          bounds=(a, b), method="bounded", options={"xatol": 1e-13})
    hmin = min(float(h[k]), float(res.fun))
    if hmin > tol:
        return False, math.nan, math.nan

    def penalized(x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        f, _ = _objective(rows, x, u_ref, lam)
        bad = _infeasibility(rows, x)
        return np.where(bad <= tol, f, np.inf)

    f = penalized(grid)
    k = int(np.argmin(f))
    if not np.isfinite(f[k]):
        # feasible set thinner than the coarse grid: start from the least violating point
        centre = res.x if res.fun <= h[k] else grid[k]
    else:
        centre = grid[k]
    fine = np.linspace(centre - 0.1, centre + 0.1, 201)
    ff = penalized(fine)
    if np.isfinite(ff).any():
        k2 = int(np.argmin(ff))
        centre = fine[k2]
        lo_b, hi_b = fine[max(k2 - 1, 0)], fine[min(k2 + 1, len(fine) - 1)]
        ref = minimize_scalar(lambda x: float(penalized(x)[0]) if np.isfinite(penalized(x)[0])
                              else 1e300, bounds=(lo_b, hi_b), method="bounded",
                              options={"xatol": 1e-12})
        if np.isfinite(penalized(ref.x)[0]) and penalized(ref.x)[0] <= penalized(centre)[0]:
            centre = float(ref.x)
    _, e = _objective(rows, np.array([centre]), u_ref, lam)
    return True, float(centre), float(e[0])


# --- box minima -----------------------------------------------------------

def box_grid_min(fn, box_i, box_r=None, n=200):
    """Minimum of fn(x_i, v_i, x_r, v_r) on an n x n grid of box_i times the vertices of box_r.

    Every term is affine in the relevant vehicle's state, so its vertices suffice.
    """
    xi = np.linspace(box_i.lo.x, box_i.hi.x, n)
    vi = np.linspace(box_i.lo.v, box_i.hi.v, n)
    XI, VI = np.meshgrid(xi, vi, indexing="ij")
    if box_r is None:
        return float(np.min(fn(XI, VI, 0.0, 0.0)))
    best = np.inf
    for xr in (box_r.lo.x, box_r.hi.x):
        for vr in (box_r.lo.v, box_r.hi.v):
            best = min(best, float(np.min(fn(XI, VI, xr, vr))))
    return best


# --- planner ---------------------------------------------------------------

def integrate_plan(a, b, v0, tf):
    """Terminal (x, v) of x' = v, v' = a t + b from (0, v0), integrated numerically."""
    sol = solve_ivp(lambda t, y: [y[1], a * t + b], (0.0, tf), [0.0, v0],
                    method="DOP853", rtol=1e-12, atol=1e-12)
    return sol.y[0, -1], sol.y[1, -1]


def plan_cost(u_fn, tf, beta, n=20001):
    t = np.linspace(0.0, tf, n)
    u = u_fn(t)
    return beta * tf + np.trapezoid(0.5 * u * u, t)


# --- event times ---------------------------------------------------------------

def sampled_crossing(state, u, anchor, s, hz=1000.0, horizon=60.0):
    """First sample time (at ``hz``) at which the motion is outside the open box."""
    t = np.arange(0.0, horizon + 1.0 / hz, 1.0 / hz)
    x = state.x + state.v * t + 0.5 * u * t * t
    v = state.v + u * t
    out = (np.abs(x - anchor.x) >= s[0]) | (np.abs(v - anchor.v) >= s[1])
    idx = np.flatnonzero(out)
    return None if idx.size == 0 else float(t[idx[0]])
