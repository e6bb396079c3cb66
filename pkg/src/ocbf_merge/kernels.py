"""Inner loops that dominate simulation time.

Each kernel exists twice: a loop version compiled by numba and a vectorized
numpy version. ``qp_enumerate``, ``relaxed_minimize`` and ``sample_segments``
point at the numba build unless ``OCBF_MERGE_DISABLE_NUMBA`` is set.
"""
import math

import numpy as np

from ._jit import USE_NUMBA, njit

STATUS_OPTIMAL = 0
STATUS_INFEASIBLE = 1

_DET_EPS = 1e-12


# --- 2-variable QP by active-set enumeration ---------------------------------

def _qp_enumerate_loop(A, c, u_ref, lam, tol):
    """min 1/2 (u-u_ref)^2 + lam e^2  s.t.  A[:,0] u + A[:,1] e + c >= 0.

    Returns (status, u, e, first_active, second_active); active indices are -1
    when unused.
    """
    m = A.shape[0]
    h1 = 2.0 * lam
    for r in range(m):
        if A[r, 0] == 0.0 and A[r, 1] == 0.0 and c[r] < -tol:
            return STATUS_INFEASIBLE, math.nan, math.nan, -1, -1

    best = math.inf
    best_u = math.nan
    best_e = math.nan
    best_r = -1
    best_s = -1
    n_cand = 1 + m + (m * (m - 1)) // 2
    for k in range(n_cand):
        if k == 0:
            u = u_ref
            e = 0.0
            r = -1
            s = -1
        elif k <= m:
            r = k - 1
            s = -1
            a0 = A[r, 0]
            a1 = A[r, 1]
            q = a0 * a0 + a1 * a1 / h1
            if q <= 0.0:
                continue
            nu = -(a0 * u_ref + c[r]) / q
            u = u_ref + a0 * nu
            e = a1 * nu / h1
        else:
            # unrank the pair index k - m - 1 into (r, s) with r < s
            p = k - m - 1
            r = 0
            while p >= m - 1 - r:
                p -= m - 1 - r
                r += 1
            s = r + 1 + p
            det = A[r, 0] * A[s, 1] - A[r, 1] * A[s, 0]
            scale = (abs(A[r, 0]) + abs(A[r, 1])) * (abs(A[s, 0]) + abs(A[s, 1]))
            if abs(det) <= _DET_EPS * scale or scale == 0.0:
                continue
            u = (-c[r] * A[s, 1] + c[s] * A[r, 1]) / det
            e = (-A[r, 0] * c[s] + A[s, 0] * c[r]) / det
        ok = True
        for t in range(m):
            if A[t, 0] * u + A[t, 1] * e + c[t] < -tol:
                ok = False
                break
        if not ok:
            continue
        obj = 0.5 * (u - u_ref) * (u - u_ref) + lam * e * e
        if obj < best:
            best = obj
            best_u = u
            best_e = e
            best_r = r
            best_s = s
    if best == math.inf:
        return STATUS_INFEASIBLE, math.nan, math.nan, -1, -1
    return STATUS_OPTIMAL, best_u, best_e, best_r, best_s


def _pair_index(m):
    r, s = np.triu_indices(m, k=1)
    return r, s


def _qp_enumerate_numpy(A, c, u_ref, lam, tol):
    A = np.asarray(A, dtype=np.float64)
    c = np.asarray(c, dtype=np.float64)
    m = A.shape[0]
    h1 = 2.0 * lam
    const = (A[:, 0] == 0.0) & (A[:, 1] == 0.0)
    if np.any(const & (c < -tol)):
        return STATUS_INFEASIBLE, math.nan, math.nan, -1, -1

    a0, a1 = A[:, 0], A[:, 1]
    q = a0 * a0 + a1 * a1 / h1
    with np.errstate(divide="ignore", invalid="ignore"):
        nu = -(a0 * u_ref + c) / q
        u1 = u_ref + a0 * nu
        e1 = a1 * nu / h1
    ok1 = q > 0.0

    r, s = _pair_index(m)
    det = A[r, 0] * A[s, 1] - A[r, 1] * A[s, 0]
    scale = (np.abs(A[r, 0]) + np.abs(A[r, 1])) * (np.abs(A[s, 0]) + np.abs(A[s, 1]))
    ok2 = (np.abs(det) > _DET_EPS * scale) & (scale != 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        u2 = (-c[r] * A[s, 1] + c[s] * A[r, 1]) / det
        e2 = (-A[r, 0] * c[s] + A[s, 0] * c[r]) / det

    U = np.concatenate(([u_ref], u1, u2))
    E = np.concatenate(([0.0], e1, e2))
    valid = np.concatenate(([True], ok1, ok2))
    R = np.concatenate(([-1], np.arange(m), r))
    S = np.concatenate(([-1], np.full(m, -1), s))
    with np.errstate(invalid="ignore"):
        resid = np.outer(a0, U) + np.outer(a1, E) + c[:, None]
        feas = valid & np.all(resid >= -tol, axis=0)
    if not feas.any():
        return STATUS_INFEASIBLE, math.nan, math.nan, -1, -1
    obj = np.where(feas, 0.5 * (U - u_ref) * (U - u_ref) + lam * E * E, np.inf)
    k = int(np.argmin(obj))
    return STATUS_OPTIMAL, float(U[k]), float(E[k]), int(R[k]), int(S[k])


# --- least-violation control for infeasible instances --------------------------

def _violation(a, c, u):
    f = 0.0
    for r in range(a.shape[0]):
        g = a[r] * u + c[r]
        if g < 0.0:
            f += g * g
    return f


_violation = njit(_violation)


def _relaxed_loop(a, c, u_ref, u_min, u_max):
    """Minimize sum(max(0, -(a u + c))^2) over [u_min, u_max].

    Among minimizers the point closest to ``u_ref`` is returned.
    """
    k = a.shape[0]
    pts = np.empty(6 + 2 * k)
    n = 0
    pts[n] = u_min
    n += 1
    pts[n] = u_max
    n += 1
    pts[n] = min(max(u_ref, u_min), u_max)
    n += 1
    for r in range(k):
        if a[r] != 0.0:
            b = -c[r] / a[r]
            if u_min < b < u_max:
                pts[n] = b
                n += 1
    brk = np.sort(pts[:n])
    m = n
    # stationary point of the quadratic piece on each interval
    for i in range(m - 1):
        lo = brk[i]
        hi = brk[i + 1]
        mid = 0.5 * (lo + hi)
        num = 0.0
        den = 0.0
        for r in range(k):
            if a[r] * mid + c[r] < 0.0:
                num += a[r] * c[r]
                den += a[r] * a[r]
        if den > 0.0:
            ustar = -num / den
            if lo < ustar < hi:
                pts[n] = ustar
                n += 1
    fmin = math.inf
    for i in range(n):
        f = _violation(a, c, pts[i])
        if f < fmin:
            fmin = f
    thresh = fmin + 1e-12 * (1.0 + fmin)
    lo = math.inf
    hi = -math.inf
    for i in range(n):
        if _violation(a, c, pts[i]) <= thresh:
            lo = min(lo, pts[i])
            hi = max(hi, pts[i])
    return min(max(u_ref, lo), hi), fmin


def _relaxed_numpy(a, c, u_ref, u_min, u_max):
    a = np.asarray(a, dtype=np.float64)
    c = np.asarray(c, dtype=np.float64)
    nz = a != 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        b = -c[nz] / a[nz]
    b = b[(b > u_min) & (b < u_max)]
    brk = np.sort(np.concatenate(([u_min, u_max, min(max(u_ref, u_min), u_max)], b)))
    mids = 0.5 * (brk[:-1] + brk[1:])
    viol = (np.outer(mids, a) + c) < 0.0
    num = viol @ (a * c)
    den = viol @ (a * a)
    with np.errstate(divide="ignore", invalid="ignore"):
        ustar = -num / den
    keep = (den > 0.0) & (ustar > brk[:-1]) & (ustar < brk[1:])
    pts = np.concatenate((brk, ustar[keep]))
    g = np.outer(pts, a) + c
    f = np.sum(np.where(g < 0.0, g * g, 0.0), axis=1)
    fmin = f.min()
    sel = pts[f <= fmin + 1e-12 * (1.0 + fmin)]
    return min(max(u_ref, sel.min()), sel.max()), float(fmin)


# --- piecewise zero-order-hold trajectories ------------------------------------

def _sample_segments_loop(seg_t, seg_x, seg_v, seg_u, times, out_x, out_v):
    """Evaluate a piecewise-constant-acceleration trajectory at sorted ``times``.

    Times before the first segment are written as NaN.
    """
    n = seg_t.shape[0]
    k = 0
    for i in range(times.shape[0]):
        t = times[i]
        if n == 0 or t < seg_t[0]:
            out_x[i] = math.nan
            out_v[i] = math.nan
            continue
        while k + 1 < n and seg_t[k + 1] <= t:
            k += 1
        dt = t - seg_t[k]
        out_x[i] = seg_x[k] + seg_v[k] * dt + 0.5 * seg_u[k] * dt * dt
        out_v[i] = seg_v[k] + seg_u[k] * dt


def _sample_segments_numpy(seg_t, seg_x, seg_v, seg_u, times, out_x, out_v):
    idx = np.searchsorted(seg_t, times, side="right") - 1
    before = idx < 0
    idx = np.maximum(idx, 0)
    dt = times - seg_t[idx]
    out_x[:] = seg_x[idx] + seg_v[idx] * dt + 0.5 * seg_u[idx] * dt * dt
    out_v[:] = seg_v[idx] + seg_u[idx] * dt
    out_x[before] = np.nan
    out_v[before] = np.nan


qp_enumerate_numba = njit(_qp_enumerate_loop)
relaxed_numba = njit(_relaxed_loop)
sample_segments_numba = njit(_sample_segments_loop)

if USE_NUMBA:
    qp_enumerate = qp_enumerate_numba
    relaxed_minimize = relaxed_numba
    sample_segments = sample_segments_numba
else:
    qp_enumerate = _qp_enumerate_numpy
    relaxed_minimize = _relaxed_numpy
    sample_segments = _sample_segments_numpy

BACKEND = "numba" if USE_NUMBA else "numpy"
