"""Per-vehicle and per-run performance metrics."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import kernels
from .model import ConstraintParams, Geometry

_trapezoid = getattr(np, "trapezoid", None) or np.trapz


class EmptyMetricsError(ValueError):
    """Raised when aggregating a run in which no vehicle completed."""


@dataclass(frozen=True)
class FuelParams:
    """Polynomial fuel-rate model (mL/s).

    Defaults are the commonly quoted coefficients of the Kamal et al. (2012)
    model; override them to match another vehicle.
    """

    w0: float = 0.1569
    w1: float = 0.02450
    w2: float = -0.0007415
    w3: float = 0.00005975
    r0: float = 0.07224
    r1: float = 0.09681
    r2: float = 0.001075

    def __post_init__(self):
        for name, val in asdict(self).items():
            if not math.isfinite(val):
                raise ValueError(f"fuel coefficient {name} must be finite")


def fuel_rate(v, u, fp: FuelParams = FuelParams()):
    """Cruise term plus acceleration term; braking consumes no extra fuel."""
    v = np.asarray(v, dtype=float)
    u = np.asarray(u, dtype=float)
    cruise = fp.w0 + fp.w1 * v + fp.w2 * v * v + fp.w3 * v ** 3
    accel = (fp.r0 + fp.r1 * v + fp.r2 * v * v) * u
    out = cruise + np.maximum(accel, 0.0)
    return float(out) if out.ndim == 0 else out


def objective_value(travel_time: float, half_u2_integral: float, alpha: float,
                    params: ConstraintParams) -> float:
    """Normalized time/energy trade-off of a single trajectory."""
    if not 0.0 <= alpha < 1.0:
        raise ValueError(f"alpha must lie in [0, 1), got {alpha}")
    norm = 0.5 * max(params.u_max ** 2, params.u_min ** 2)
    return alpha * travel_time + (1.0 - alpha) * half_u2_integral / norm


@dataclass
class CavTrajectory:
    """Piecewise constant-acceleration record of one vehicle's transit.

    Row k holds the state at ``seg_t[k]`` and the acceleration applied until
    ``seg_t[k+1]`` (or ``tf``). ``links`` lists ``(t, ip, j)`` changes with
    -1 for an absent neighbor.
    """

    id: int
    lane: int
    t0: float
    tf: float
    seg_t: np.ndarray
    seg_x: np.ndarray
    seg_v: np.ndarray
    seg_u: np.ndarray
    seg_status: list = field(default_factory=list)
    links: list = field(default_factory=list)
    sampled: bool = False  # True for noisy runs: rows are sensor samples

    @property
    def travel_time(self) -> float:
        return self.tf - self.t0

    def half_u2(self) -> float:
        ends = np.append(self.seg_t[1:], self.tf)
        return float(np.sum(0.5 * self.seg_u ** 2 * (ends - self.seg_t)))

    def sample(self, times):
        times = np.ascontiguousarray(times, dtype=np.float64)
        x = np.empty_like(times)
        v = np.empty_like(times)
        kernels.sample_segments(self.seg_t, self.seg_x, self.seg_v, self.seg_u, times, x, v)
        return x, v

    def control_at(self, times):
        idx = np.clip(np.searchsorted(self.seg_t, times, side="right") - 1, 0, len(self.seg_t) - 1)
        return self.seg_u[idx]

    def sensor_times(self, sensor_hz: float):
        h = 1.0 / sensor_hz
        n = int(math.floor((self.tf - self.t0) / h + 1e-9))
        ts = self.t0 + h * np.arange(n + 1)
        if self.tf - ts[-1] > 1e-9:
            ts = np.append(ts, self.tf)
        return ts

    def fuel(self, fp: FuelParams, sensor_hz: float) -> float:
        ts = self.sensor_times(sensor_hz)
        _, v = self.sample(ts)
        rate = fuel_rate(v, self.control_at(ts), fp)
        return float(_trapezoid(rate, ts)) if len(ts) > 1 else 0.0


@dataclass
class RunMetrics:
    avg_travel_time: float
    avg_half_u2: float
    avg_fuel: float
    qp_solved: int
    qp_infeasible: int
    messages: int
    min_b1: float
    min_b2: float
    avg_objective: float
    n_cavs: int = 0
    min_b3: float = math.inf
    min_b4: float = math.inf
    qp_invocations: int = 0
    saturations: int = 0
    deferred_admissions: int = 0

    def __post_init__(self):
        if self.qp_infeasible > self.qp_solved:
            raise ValueError("more infeasible QPs than QPs solved")
        if min(self.qp_solved, self.qp_infeasible, self.messages) < 0:
            raise ValueError("counts must be non-negative")

    def to_dict(self) -> dict:
        return asdict(self)


def aggregate(trajectories, alpha: float, params: ConstraintParams, fuel: FuelParams,
              sensor_hz: float = 20.0, counts: dict | None = None,
              margins: dict | None = None) -> RunMetrics:
    """Average the per-vehicle metrics of completed transits."""
    trajectories = list(trajectories)
    if not trajectories:
        raise EmptyMetricsError("no completed vehicle to aggregate")
    counts = counts or {}
    margins = margins or {}
    tt = np.array([tr.travel_time for tr in trajectories])
    e = np.array([tr.half_u2() for tr in trajectories])
    f = np.array([tr.fuel(fuel, sensor_hz) for tr in trajectories])
    obj = np.array([objective_value(a, b, alpha, params) for a, b in zip(tt, e)])
    return RunMetrics(
        avg_travel_time=float(tt.mean()),
        avg_half_u2=float(e.mean()),
        avg_fuel=float(f.mean()),
        qp_solved=int(counts.get("qp_solved", 0)),
        qp_infeasible=int(counts.get("qp_infeasible", 0)),
        messages=int(counts.get("messages", 0)),
        min_b1=float(margins.get("b1", math.inf)),
        min_b2=float(margins.get("b2", math.inf)),
        avg_objective=float(obj.mean()),
        n_cavs=len(trajectories),
        min_b3=float(margins.get("b3", math.inf)),
        min_b4=float(margins.get("b4", math.inf)),
        qp_invocations=int(counts.get("qp_invocations", 0)),
        saturations=int(counts.get("saturations", 0)),
        deferred_admissions=int(counts.get("deferred", 0)),
    )


def constraint_values(traj: CavTrajectory, times, by_id: dict, params: ConstraintParams,
                      geometry: Geometry):
    """b1..b4 of ``traj`` at ``times`` (NaN where the neighbor is absent)."""
    times = np.asarray(times, dtype=np.float64)
    x, v = traj.sample(times)
    b1 = np.full_like(times, np.nan)
    b2 = np.full_like(times, np.nan)
    link_t = np.array([lk[0] for lk in traj.links]) if traj.links else np.array([traj.t0])
    which = np.searchsorted(link_t, times, side="right") - 1
    for k, (_, ip, j) in enumerate(traj.links):
        sel = which == k
        if not sel.any():
            continue
        if ip >= 0:
            xp, _ = by_id[ip].sample(times[sel])
            b1[sel] = xp - x[sel] - params.phi * v[sel] - params.delta
        if j >= 0:
            xj, _ = by_id[j].sample(times[sel])
            b2[sel] = xj - x[sel] - params.phi / geometry.L * x[sel] * v[sel] - params.delta
    return b1, b2, params.v_max - v, v - params.v_min


def audit_times(traj: CavTrajectory, hz: float):
    """Grid times k/hz inside the transit, plus both endpoints."""
    k0 = math.ceil(traj.t0 * hz - 1e-9)
    k1 = math.floor(traj.tf * hz + 1e-9)
    grid = np.arange(k0, k1 + 1) / hz
    ts = np.concatenate(([traj.t0], grid, [traj.tf]))
    return np.unique(np.clip(ts, traj.t0, traj.tf))


def audit(trajectories, params: ConstraintParams, geometry: Geometry, hz: float = 100.0):
    """Minimum of each original constraint per vehicle, evaluated at ``hz``."""
    by_id = {tr.id: tr for tr in trajectories}
    per_cav = {}
    for tr in trajectories:
        ts = tr.seg_t if tr.sampled else audit_times(tr, hz)
        if tr.sampled:
            ts = np.append(ts, tr.tf) if tr.tf > ts[-1] else ts
        bs = constraint_values(tr, ts, by_id, params, geometry)
        per_cav[tr.id] = tuple(float(np.nanmin(b)) if np.any(~np.isnan(b)) else math.inf
                               for b in bs)
    overall = {}
    for q in range(4):
        vals = [m[q] for m in per_cav.values()]
        overall[f"b{q + 1}"] = min(vals) if vals else math.inf
    return per_cav, overall
