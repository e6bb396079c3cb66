"""Closed-loop merging simulations.

Noise-free runs use an exact discrete-event engine: every vehicle moves with
piecewise-constant acceleration, so positions, exit times, speed-limit hits
and event-trigger instants are all computed in closed form. Noisy runs are
integrated on the sensor grid and triggers are checked at sensor samples.
"""
from __future__ import annotations

import heapq
import logging
import math
from collections import deque
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .constraints import assemble_qp
from .coordinator import (AdmissionDeferred, ConflictZone, admit, exit_zone,
                          propagate_trigger)
from .events import COMPONENTWISE, DEFAULT_HORIZON, JOINT, _outward_roots, solve_event_qp
from .metrics import (CavTrajectory, FuelParams, RunMetrics, aggregate, audit,
                      constraint_values)
from .model import CavState, ConstraintParams, Geometry
from .planner import PlannerError, beta_from_alpha, fallback_plan, solve_unconstrained
from .qp import INFEASIBLE, OPTIMAL, solve, solve_relaxed

log = logging.getLogger(__name__)

TIME_DRIVEN = "time_driven"
EVENT_TRIGGERED = "event_triggered"
MODES = (TIME_DRIVEN, EVENT_TRIGGERED)
POLICIES = ("check", "always")

_EXIT, _CLAMP, _ARRIVAL, _SOLVE = 0, 1, 2, 3
_VTOL = 1e-12


@dataclass
class SimConfig:
    mode: str = TIME_DRIVEN
    alpha: float = 0.25
    beta: Optional[float] = None  # overrides alpha when set
    dt: float = 0.05
    sensor_hz: float = 20.0
    audit_hz: float = 100.0
    s_default: tuple = (2.0, 0.5)
    arrival_rate: float = 0.1  # per origin
    v0_range: tuple = (15.0, 20.0)
    noise: Optional[tuple] = None  # ((w1_lo, w1_hi), (w2_lo, w2_hi))
    cav_count: int = 20
    duration: Optional[float] = None
    rng_seed: int = 0
    min_mode: str = COMPONENTWISE
    clf_enabled: bool = True
    neighbor_policy: str = "check"
    params: ConstraintParams = field(default_factory=ConstraintParams)
    geometry: Geometry = field(default_factory=Geometry)
    fuel: FuelParams = field(default_factory=FuelParams)

    def __post_init__(self):
        self.s_default = tuple(float(s) for s in self.s_default)
        self.v0_range = tuple(float(v) for v in self.v0_range)
        if self.noise is not None:
            self.noise = tuple(tuple(float(w) for w in rng) for rng in self.noise)
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.min_mode not in (COMPONENTWISE, JOINT):
            raise ValueError(f"min_mode must be componentwise or joint, got {self.min_mode!r}")
        if self.neighbor_policy not in POLICIES:
            raise ValueError(f"neighbor_policy must be one of {POLICIES}")
        if not self.dt > 0 or not self.sensor_hz > 0 or not self.audit_hz > 0:
            raise ValueError("dt, sensor_hz and audit_hz must be positive")
        if not self.arrival_rate > 0:
            raise ValueError("arrival_rate must be positive")
        lo, hi = self.v0_range
        if not (self.params.v_min <= lo <= hi <= self.params.v_max) or lo <= 0:
            raise ValueError("v0_range must be a positive sub-interval of [v_min, v_max]")
        if min(self.s_default) <= 0:
            raise ValueError("bound vector components must be positive")
        if self.cav_count is None and self.duration is None:
            raise ValueError("need cav_count or duration")
        if self.cav_count is not None and self.cav_count < 1:
            raise ValueError("cav_count must be >= 1")
        if self.beta is None:
            beta_from_alpha(self.alpha, self.params)
        elif self.beta < 0:
            raise ValueError("beta must be non-negative")
        if self.noise is not None:
            if len(self.noise) != 2 or any(a > b for a, b in self.noise):
                raise ValueError("noise must be ((w1_lo, w1_hi), (w2_lo, w2_hi))")
            ratio = self.sensor_hz * self.dt
            if abs(ratio - round(ratio)) > 1e-9 or round(ratio) < 1:
                raise ValueError("noisy runs need dt to be a multiple of the sensor period")

    @property
    def effective_beta(self) -> float:
        return self.beta if self.beta is not None else beta_from_alpha(self.alpha, self.params)

    @property
    def objective_alpha(self) -> float:
        """Weight used for the normalized objective (recovered from beta if given)."""
        if self.beta is None:
            return self.alpha
        umax2 = max(self.params.u_max ** 2, self.params.u_min ** 2)
        return 2.0 * self.beta / (umax2 + 2.0 * self.beta)


@dataclass
class TraceSample:
    t: float
    id: int
    x: float
    v: float
    u: float
    b1: float
    b2: float
    b3: float
    b4: float
    status: str


@dataclass
class RunResult:
    config: SimConfig
    trajectories: list
    metrics: RunMetrics
    margins: dict  # per-vehicle minima of (b1, b2, b3, b4)
    infeasible_ids: set = field(default_factory=set)
    triggers: list = field(default_factory=list)  # (t, id, cause) of event-triggered solves

    @property
    def all_optimal(self) -> bool:
        return self.metrics.qp_infeasible == 0

    def __iter__(self):
        yield self.traces()
        yield self.metrics

    def traces(self) -> list:
        """One sample per control segment plus a final sample at exit."""
        by_id = {tr.id: tr for tr in self.trajectories}
        p, g = self.config.params, self.config.geometry
        out = []
        for tr in self.trajectories:
            ts = np.append(tr.seg_t, tr.tf)
            x, v = tr.sample(ts)
            b1, b2, b3, b4 = constraint_values(tr, ts, by_id, p, g)
            us = np.append(tr.seg_u, 0.0)
            status = list(tr.seg_status) + ["Exit"]
            for k in range(len(ts)):
                if k > 0 and ts[k] <= ts[k - 1]:
                    continue
                out.append(TraceSample(float(ts[k]), tr.id, float(x[k]), float(v[k]),
                                       float(us[k]), float(b1[k]), float(b2[k]),
                                       float(b3[k]), float(b4[k]), status[k]))
        out.sort(key=lambda s: (s.t, s.id))
        return out


# --- plant -------------------------------------------------------------------

def step_exact(state: CavState, u: float, dt: float, params: ConstraintParams) -> CavState:
    """Zero-order-hold double integrator; speed saturates at [v_min, v_max]."""
    if dt < 0:
        raise ValueError("dt must be non-negative")
    x, v = state
    if u > 0.0 and v + u * dt > params.v_max:
        tau = max((params.v_max - v) / u, 0.0)
        x += v * tau + 0.5 * u * tau * tau + params.v_max * (dt - tau)
        return CavState(x, params.v_max)
    if u < 0.0 and v + u * dt < params.v_min:
        tau = max((params.v_min - v) / u, 0.0)
        x += v * tau + 0.5 * u * tau * tau + params.v_min * (dt - tau)
        return CavState(x, params.v_min)
    return CavState(x + v * dt + 0.5 * u * dt * dt, v + u * dt)


def step_noisy(state: CavState, u: float, dt: float, rng, params: ConstraintParams,
               noise=((-2.0, 2.0), (-0.2, 0.2))) -> CavState:
    """One RK4 step of x' = v + w1, v' = u + w2 with w held over the step."""
    (a1, b1), (a2, b2) = noise
    w1 = rng.uniform(a1, b1) if b1 > a1 else a1
    w2 = rng.uniform(a2, b2) if b2 > a2 else a2
    acc = u + w2

    def f(v):
        return v + w1

    x, v = state
    k1x, k1v = f(v), acc
    k2x, k2v = f(v + 0.5 * dt * k1v), acc
    k3x, k3v = f(v + 0.5 * dt * k2v), acc
    k4x, k4v = f(v + dt * k3v), acc
    x += dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
    v += dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
    return CavState(x, min(max(v, params.v_min), params.v_max))


# --- arrivals ------------------------------------------------------------------

def spawn_arrivals(config: SimConfig, rng=None):
    """Poisson arrivals on both roads: list of ``(t, lane, v0)`` sorted by time.

    Each road draws from its own stream, so the schedule depends only on the
    seed. With ``cav_count`` the first ``cav_count`` arrivals are kept,
    otherwise all arrivals before ``duration``.
    """
    if rng is None:
        rng = np.random.default_rng(config.rng_seed)
    lane_rngs = rng.spawn(2)
    lo, hi = config.v0_range
    out = []
    for lane, lr in enumerate(lane_rngs):
        t = 0.0
        n = 0
        while True:
            t += lr.exponential(1.0 / config.arrival_rate)
            v0 = lr.uniform(lo, hi)
            if config.duration is not None and t >= config.duration:
                break
            out.append((t, lane, v0))
            n += 1
            if config.duration is None and n >= config.cav_count:
                break
    out.sort()
    if config.cav_count is not None:
        out = out[:config.cav_count]
    return out


def _plan_for(v0, config):
    try:
        return solve_unconstrained(v0, config.geometry.L, config.effective_beta)
    except PlannerError:
        log.warning("reference planner failed for v0=%.3f; cruising", v0)
        return fallback_plan(v0, config.geometry.L)


# --- exact event engine -----------------------------------------------------------

class _Vehicle:
    __slots__ = ("agent", "plan", "ts", "xs", "vs", "ua", "log", "links", "version",
                 "solve_version", "anchor", "nb_anchor", "k", "last_solve")

    def __init__(self, agent, plan, t):
        self.agent = agent
        self.plan = plan
        self.ts, self.xs, self.vs, self.ua = t, agent.state.x, agent.state.v, 0.0
        self.log = []
        self.links = []
        self.version = 0
        self.solve_version = 0
        self.anchor = None
        self.nb_anchor = {}
        self.k = 0
        self.last_solve = -math.inf

    def state_at(self, t):
        d = t - self.ts
        return CavState(self.xs + self.vs * d + 0.5 * self.ua * d * d, self.vs + self.ua * d)


class _ExactEngine:
    def __init__(self, config: SimConfig):
        self.cfg = config
        self.p = config.params
        self.g = config.geometry
        self.cz = ConflictZone(config.geometry)
        self.heap = []
        self.seq = 0
        self.veh = {}
        self.done = []
        self.counts = dict(qp_solved=0, qp_infeasible=0, qp_invocations=0, saturations=0,
                           deferred=0)
        self.infeasible_ids = set()
        self.triggers = []
        self.event_mode = config.mode == EVENT_TRIGGERED

    def push(self, t, kind, *payload, order=0):
        self.seq += 1
        heapq.heappush(self.heap, (t, kind, order, self.seq, payload))

    # plant bookkeeping

    def set_segment(self, vid, t, u, status):
        veh = self.veh[vid]
        st = veh.state_at(t)
        x, v = st.x, min(max(st.v, self.p.v_min), self.p.v_max)
        ua = u
        if (u > 0.0 and v >= self.p.v_max - _VTOL) or (u < 0.0 and v <= self.p.v_min + _VTOL):
            ua = 0.0
            self.counts["saturations"] += 1
        veh.ts, veh.xs, veh.vs, veh.ua = t, x, v, ua
        veh.agent.state = CavState(x, v)
        veh.agent.u_current = u
        if veh.log and veh.log[-1][0] == t:
            veh.log[-1] = (t, x, v, ua, status)
        else:
            veh.log.append((t, x, v, ua, status))
        veh.version += 1
        roots = _outward_roots(x, v, ua, self.g.L)
        if roots:
            self.push(t + min(roots), _EXIT, vid, veh.version)
        if ua > 0.0:
            self.push(t + (self.p.v_max - v) / ua, _CLAMP, vid, veh.version)
        elif ua < 0.0 and v > self.p.v_min:
            self.push(t + (self.p.v_min - v) / ua, _CLAMP, vid, veh.version)

    def record_links(self, vid, t):
        ag = self.veh[vid].agent
        entry = (t, -1 if ag.ip is None else ag.ip, -1 if ag.j is None else ag.j)
        links = self.veh[vid].links
        if links and links[-1][0] == t:
            links[-1] = entry
        elif not links or links[-1][1:] != entry[1:]:
            links.append(entry)

    # control

    def neighbor_states(self, ag, t):
        ip = self.veh[ag.ip].state_at(t) if ag.ip is not None else None
        j = self.veh[ag.j].state_at(t) if ag.j is not None else None
        return ip, j

    def solve_time_driven(self, vid, t):
        veh = self.veh[vid]
        ag = veh.agent
        st = veh.state_at(t)
        ip, j = self.neighbor_states(ag, t)
        prob = assemble_qp(st, ip, j, veh.plan, t - ag.t0, self.p, self.g, self.cfg.clf_enabled)
        sol = solve(prob)
        self.counts["qp_invocations"] += 1
        if not sol.optimal:
            sol = solve_relaxed(prob)
        return sol

    def solve_event(self, vid, t):
        veh = self.veh[vid]
        ag = veh.agent
        st = veh.state_at(t)
        ip, j = self.neighbor_states(ag, t)
        s = self.cfg.s_default
        res = solve_event_qp(st, ip, j, s, s, s, veh.plan, t - ag.t0, self.p, self.g,
                             self.cfg.min_mode, self.cfg.clf_enabled)
        self.counts["qp_invocations"] += (1 if j is None else 2) + (1 if res.retried else 0)
        veh.anchor = st
        ag.bound_anchor = st
        veh.nb_anchor = {}
        if ag.ip is not None:
            veh.nb_anchor[ag.ip] = ip
        if ag.j is not None:
            veh.nb_anchor[ag.j] = j
        return res.solution

    def do_solve(self, vid, t):
        veh = self.veh[vid]
        sol = self.solve_event(vid, t) if self.event_mode else self.solve_time_driven(vid, t)
        self.counts["qp_solved"] += 1
        if sol.status == INFEASIBLE:
            self.counts["qp_infeasible"] += 1
            self.infeasible_ids.add(vid)
        veh.last_solve = t
        self.set_segment(vid, t, sol.u, sol.status)
        if self.event_mode:
            recipients = propagate_trigger(self.cz, vid, t)
            self.schedule_event(vid, t)
            for r in recipients:
                if self.cfg.neighbor_policy == "always":
                    self.push_solve(r, t, "notify")
                else:
                    self.schedule_event(r, t)

    def push_solve(self, vid, t, cause):
        veh = self.veh[vid]
        veh.solve_version += 1
        self.push(t, _SOLVE, vid, veh.solve_version, cause, order=veh.agent.index)

    def schedule_event(self, vid, t):
        """Next instant at which vehicle or one of its neighbors leaves its box."""
        veh = self.veh[vid]
        s = self.cfg.s_default
        best = cause = None
        cands = [(veh.state_at(t), veh.ua, veh.anchor, "own")]
        for nid, anc in veh.nb_anchor.items():
            if nid in self.veh and self.veh[nid].agent.tf is None:
                nv = self.veh[nid]
                cands.append((nv.state_at(t), nv.ua, anc, "neighbor"))
        for st, ua, anc, label in cands:
            hit = _crossing(st, ua, anc, s)
            if hit is not None and (best is None or hit < best):
                best, cause = hit, label
        veh.solve_version += 1
        if best is not None:
            self.push(t + best, _SOLVE, vid, veh.solve_version, cause, order=veh.agent.index)

    # main loop

    def run(self, arrivals):
        lanes = {0: deque(), 1: deque()}
        for vid, (t, lane, v0) in enumerate(arrivals):
            lanes[lane].append((t, vid, v0))
        for lane, q in lanes.items():
            if q:
                self.push(q[0][0], _ARRIVAL, lane)
        pending = len(arrivals)
        while self.heap and (pending or self.cz.fifo):
            t, kind, _, _, payload = heapq.heappop(self.heap)
            if kind == _ARRIVAL:
                pending -= self.handle_arrival(t, payload[0], lanes)
            elif kind == _EXIT:
                vid, ver = payload
                if vid in self.veh and self.veh[vid].version == ver and self.veh[vid].agent.tf is None:
                    self.handle_exit(vid, t)
            elif kind == _CLAMP:
                vid, ver = payload
                veh = self.veh.get(vid)
                if veh is not None and veh.version == ver and veh.agent.tf is None:
                    self.set_segment(vid, t, veh.agent.u_current, "Saturated")
                    if self.event_mode:
                        self.schedule_event(vid, t)
                        for r in self.cz.followers_of(vid):
                            self.schedule_event(r, t)
            else:
                vid, tag = payload[:2]
                veh = self.veh.get(vid)
                if veh is None or veh.agent.tf is not None:
                    continue
                if self.event_mode:
                    if tag == veh.solve_version:
                        self.triggers.append((t, vid, payload[2]))
                        self.do_solve(vid, t)
                elif tag == veh.k:
                    self.do_solve(vid, t)
                    veh.k += 1
                    self.push(veh.agent.t0 + veh.k * self.cfg.dt, _SOLVE, vid, veh.k,
                              order=veh.agent.index)
        return self.done

    def handle_arrival(self, t, lane, lanes):
        q = lanes[lane]
        t_arr, vid, v0 = q[0]
        ip = self.cz.last_on_lane(lane)
        ip_state = self.veh[ip].state_at(t) if ip is not None else None
        try:
            agent = admit(self.cz, lane, t, v0, self.p, self.cfg.s_default, ip_state, cav_id=vid)
        except AdmissionDeferred as exc:
            self.counts["deferred"] += 1
            need = self.p.phi * v0 + self.p.delta
            ipv = self.veh[exc.ip]
            roots = _outward_roots(ip_state.x, ip_state.v, ipv.ua, need)
            wait = min(min(roots), self.cfg.dt) if roots else self.cfg.dt
            self.push(t + max(wait, 1e-9), _ARRIVAL, lane)
            log.debug("arrival of %d deferred by %.3fs", vid, wait)
            return 0
        q.popleft()
        veh = _Vehicle(agent, _plan_for(v0, self.cfg), t)
        agent.plan = veh.plan
        self.veh[vid] = veh
        for cid in self.cz.fifo:
            self.record_links(cid, t)
        veh.log.append((t, 0.0, v0, 0.0, OPTIMAL))
        self.do_solve(vid, t)
        if self.event_mode:
            self.triggers.append((t, vid, "entry"))
        else:
            veh.k = 1
            self.push(agent.t0 + self.cfg.dt, _SOLVE, vid, 1, order=agent.index)
        if q:
            self.push(max(q[0][0], t), _ARRIVAL, lane)
        return 1

    def handle_exit(self, vid, t):
        veh = self.veh[vid]
        st = veh.state_at(t)
        rec, changed = exit_zone(self.cz, vid, t)
        veh.agent.state = CavState(self.g.L, st.v)
        self.done.append(_trajectory(veh, rec))
        for cid in self.cz.fifo:
            self.record_links(cid, t)
        if self.event_mode:
            for cid in sorted(changed, key=lambda c: self.veh[c].agent.index):
                self.push_solve(cid, t, "link")


def _crossing(state, u, anchor, s):
    from .events import first_crossing_time

    hit = first_crossing_time(state, u, anchor, s, DEFAULT_HORIZON)
    return None if hit is None else hit[0]


def _trajectory(veh, rec, sampled=False):
    rows = veh.log
    return CavTrajectory(
        id=rec.id, lane=rec.lane, t0=rec.t0, tf=rec.tf,
        seg_t=np.array([r[0] for r in rows]), seg_x=np.array([r[1] for r in rows]),
        seg_v=np.array([r[2] for r in rows]), seg_u=np.array([r[3] for r in rows]),
        seg_status=[r[4] for r in rows], links=list(veh.links), sampled=sampled)


# --- sampled (noisy) engine --------------------------------------------------------

class _SampledEngine(_ExactEngine):
    """Sensor-grid integration with process noise.

    Controls are recomputed on the grid: every ``dt`` for the time-driven
    scheme, at the first sample where a box is left for the event-triggered
    one.
    """

    def __init__(self, config):
        super().__init__(config)
        self.h = 1.0 / config.sensor_hz
        self.every = int(round(config.dt * config.sensor_hz))
        self.noise = config.noise if config.noise is not None else ((0.0, 0.0), (0.0, 0.0))
        self.rngs = {}
        self.tick0 = {}
        self.flagged = {}

    def set_segment(self, vid, t, u, status):
        veh = self.veh[vid]
        v = veh.vs
        ua = u
        if (u > 0.0 and v >= self.p.v_max - _VTOL) or (u < 0.0 and v <= self.p.v_min + _VTOL):
            ua = 0.0
            self.counts["saturations"] += 1
        veh.ua = ua
        veh.agent.u_current = u
        veh.version += 1
        if veh.log and veh.log[-1][0] == t:
            veh.log[-1] = (t, veh.xs, veh.vs, ua, status)

    def schedule_event(self, vid, t):
        pass

    def push_solve(self, vid, t, cause):
        self.flagged.setdefault(vid, cause)

    def box_left(self, vid):
        """Cause of a trigger at the current sample, or None."""
        veh = self.veh[vid]
        s = self.cfg.s_default
        if not _inside(veh.state_at(veh.ts), veh.anchor, s):
            return "own"
        for nid, anc in veh.nb_anchor.items():
            nv = self.veh.get(nid)
            if nv is not None and nv.agent.tf is None and not _inside(nv.state_at(nv.ts), anc, s):
                return "neighbor"
        return None

    def run(self, arrivals):
        h = self.h
        lanes = {0: deque(), 1: deque()}
        for vid, (t, lane, v0) in enumerate(arrivals):
            lanes[lane].append((math.ceil(t / h - 1e-9), vid, v0))
        pending = len(arrivals)
        k = 0
        while pending or self.cz.fifo:
            t = k * h
            self.flagged = {}
            # exits
            for vid in list(self.cz.fifo):
                veh = self.veh[vid]
                if veh.xs >= self.g.L:
                    rec, changed = exit_zone(self.cz, vid, t)
                    veh.log.append((t, veh.xs, veh.vs, 0.0, "Exit"))
                    self.done.append(_trajectory(veh, rec, sampled=True))
                    for cid in self.cz.fifo:
                        self.record_links(cid, t)
                    for cid in changed:
                        self.flagged.setdefault(cid, "link")
            # arrivals
            for lane in (0, 1):
                q = lanes[lane]
                while q and q[0][0] <= k:
                    _, vid, v0 = q[0]
                    ip = self.cz.last_on_lane(lane)
                    ip_state = self.veh[ip].state_at(self.veh[ip].ts) if ip is not None else None
                    try:
                        agent = admit(self.cz, lane, t, v0, self.p, self.cfg.s_default, ip_state,
                                      cav_id=vid)
                    except AdmissionDeferred:
                        self.counts["deferred"] += 1
                        break
                    q.popleft()
                    pending -= 1
                    veh = _Vehicle(agent, _plan_for(v0, self.cfg), t)
                    agent.plan = veh.plan
                    self.veh[vid] = veh
                    self.tick0[vid] = k
                    self.rngs[vid] = np.random.default_rng([self.cfg.rng_seed, 7919, vid])
                    for cid in self.cz.fifo:
                        self.record_links(cid, t)
                    self.flagged[vid] = "entry"
            # log the sample for everybody, then solve where due
            for vid in self.cz.fifo:
                veh = self.veh[vid]
                veh.ts = t
                veh.log.append((t, veh.xs, veh.vs, veh.ua, "Hold"))
            for vid in list(self.cz.fifo):
                veh = self.veh[vid]
                if self.event_mode:
                    cause = self.flagged.get(vid) or self.box_left(vid)
                    if cause is not None:
                        self.triggers.append((t, vid, cause))
                        self.do_solve(vid, t)
                elif (k - self.tick0[vid]) % self.every == 0:
                    self.do_solve(vid, t)
            # integrate to the next sample
            for vid in self.cz.fifo:
                veh = self.veh[vid]
                nxt = step_noisy(CavState(veh.xs, veh.vs), veh.ua, h, self.rngs[vid], self.p,
                                 self.noise)
                veh.xs, veh.vs = nxt
                veh.agent.state = nxt
            k += 1
            if k > 10_000_000:  # pragma: no cover - runaway guard
                raise RuntimeError("simulation did not terminate")
        return self.done


def _inside(state, anchor, s):
    return abs(state.x - anchor.x) < s[0] and abs(state.v - anchor.v) < s[1]


# --- public entry points ---------------------------------------------------------------

def run(config: SimConfig, arrivals=None) -> RunResult:
    """Simulate one run; ``arrivals`` overrides the Poisson schedule with ``(t, lane, v0)`` rows."""
    if arrivals is None:
        arrivals = spawn_arrivals(config)
    else:
        arrivals = sorted((float(t), int(lane), float(v0)) for t, lane, v0 in arrivals)
        if not arrivals:
            raise ValueError("empty arrival schedule")
        if any(lane not in (0, 1) for _, lane, _ in arrivals):
            raise ValueError("lanes must be 0 or 1")
    if config.noise is None:
        engine = _ExactEngine(config)
        audit_hz = config.audit_hz
    else:
        engine = _SampledEngine(config)
        audit_hz = config.sensor_hz
    trajectories = engine.run(arrivals)
    trajectories.sort(key=lambda tr: tr.id)
    per_cav, overall = audit(trajectories, config.params, config.geometry, audit_hz)
    counts = dict(engine.counts, messages=engine.cz.message_count)
    metrics = aggregate(trajectories, config.objective_alpha, config.params, config.fuel,
                        config.sensor_hz, counts, overall)
    return RunResult(config, trajectories, metrics, per_cav, engine.infeasible_ids,
                     engine.triggers)


def run_time_driven(config: SimConfig, arrivals=None) -> RunResult:
    return run(replace(config, mode=TIME_DRIVEN), arrivals)


def run_event_driven(config: SimConfig, arrivals=None) -> RunResult:
    return run(replace(config, mode=EVENT_TRIGGERED), arrivals)
