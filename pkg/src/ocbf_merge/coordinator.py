"""Control-zone membership, FIFO indexing, neighbor links and message routing."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .model import CavAgent, CavState, ConstraintParams, Geometry, eval_b1


class AdmissionDeferred(Exception):
    """Entering now would violate the rear-end constraint against ``ip``."""

    def __init__(self, ip: int, margin: float):
        super().__init__(f"entry blocked by vehicle {ip} (b1 = {margin:.3f} m)")
        self.ip = ip
        self.margin = margin


@dataclass
class RunRecord:
    id: int
    lane: int
    t0: float
    tf: float


@dataclass
class ConflictZone:
    geometry: Geometry = field(default_factory=Geometry)
    fifo: list = field(default_factory=list)
    agents: dict = field(default_factory=dict)
    message_count: int = 0
    log: list = field(default_factory=list)
    _next_id: int = 0

    def __len__(self):
        return len(self.fifo)

    def index_of(self, cav_id: int) -> int:
        return self.fifo.index(cav_id) + 1

    def last_on_lane(self, lane: int) -> Optional[int]:
        for cid in reversed(self.fifo):
            if self.agents[cid].lane == lane:
                return cid
        return None

    def relink(self) -> set:
        """Recompute indices and (ip, j) for every member; return ids whose links changed."""
        changed = set()
        last = {}
        prev = None
        for k, cid in enumerate(self.fifo):
            ag = self.agents[cid]
            ag.index = k + 1
            ip = last.get(ag.lane)
            j = prev if (prev is not None and self.agents[prev].lane != ag.lane) else None
            if (ip, j) != (ag.ip, ag.j):
                changed.add(cid)
            ag.ip, ag.j = ip, j
            last[ag.lane] = cid
            prev = cid
        return changed

    def followers_of(self, cav_id: int) -> list:
        return [cid for cid in self.fifo
                if self.agents[cid].ip == cav_id or self.agents[cid].j == cav_id]


def admit(cz: ConflictZone, lane: int, t: float, v0: float, params: ConstraintParams,
          s=(2.0, 0.5), preceding_state: Optional[CavState] = None,
          cav_id: Optional[int] = None) -> CavAgent:
    """Append a vehicle entering at ``lane`` with speed ``v0`` at time ``t``.

    ``preceding_state`` is the current state of the last vehicle on the same
    lane, used to reject entries that would start with b1 < 0.
    """
    if not params.v_min <= v0 <= params.v_max:
        raise ValueError(f"entry speed {v0} outside [{params.v_min}, {params.v_max}]")
    ip = cz.last_on_lane(lane)
    state = CavState(0.0, v0)
    if ip is not None and preceding_state is not None:
        margin = eval_b1(state, preceding_state, params)
        if margin < -1e-9:
            raise AdmissionDeferred(ip, margin)
    if cav_id is None:
        cav_id = cz._next_id
    cz._next_id = max(cz._next_id, cav_id + 1)
    agent = CavAgent(id=cav_id, lane=lane, state=state, t0=t, s=tuple(s),
                     bound_anchor=state)
    cz.agents[cav_id] = agent
    cz.fifo.append(cav_id)
    cz.relink()
    cz.log.append(("admit", t, cav_id, lane))
    return agent


def exit_zone(cz: ConflictZone, cav_id: int, t: float):
    """Drop a vehicle that reached the merging point; returns (record, relinked ids)."""
    agent = cz.agents.pop(cav_id)
    cz.fifo.remove(cav_id)
    agent.tf = t
    changed = cz.relink()
    cz.log.append(("exit", t, cav_id, agent.lane))
    return RunRecord(cav_id, agent.lane, agent.t0, t), changed


def propagate_trigger(cz: ConflictZone, source_id: int, t: float) -> set:
    """Relay a fresh state of ``source_id`` to the vehicles constrained by it.

    One message goes from the source to the coordinator and one to each
    recipient.
    """
    recipients = set(cz.followers_of(source_id))
    cz.message_count += 1 + len(recipients)
    cz.log.append(("trigger", t, source_id, tuple(sorted(recipients))))
    return recipients
