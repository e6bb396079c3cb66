"""Config files (YAML), per-run trace CSVs, run summaries and paired reports."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, fields
from pathlib import Path

import numpy as np
import yaml

from .metrics import FuelParams, RunMetrics
from .model import ConstraintParams, Geometry
from .simulation import SimConfig, TraceSample

TRACE_COLUMNS = ("t", "id", "x", "v", "u", "b1", "b2", "b3", "b4", "status")

_SIM_KEYS = ("mode", "alpha", "beta", "dt", "sensor_hz", "audit_hz", "arrival_rate", "v0_range",
             "cav_count", "duration", "rng_seed", "clf_enabled", "neighbor_policy")


class ConfigError(ValueError):
    """Malformed or inconsistent configuration."""


def config_to_dict(cfg: SimConfig) -> dict:
    sim = {k: getattr(cfg, k) for k in _SIM_KEYS}
    sim["v0_range"] = list(cfg.v0_range)
    noise = None
    if cfg.noise is not None:
        noise = {"w1": list(cfg.noise[0]), "w2": list(cfg.noise[1])}
    return {
        "simulation": sim,
        "event": {"s_x": cfg.s_default[0], "s_v": cfg.s_default[1], "min_mode": cfg.min_mode},
        "noise": noise,
        "constraints": asdict(cfg.params),
        "geometry": {"L": cfg.geometry.L},
        "fuel": asdict(cfg.fuel),
    }


def _section(data, name, allowed):
    sec = data.get(name) or {}
    if not isinstance(sec, dict):
        raise ConfigError(f"section '{name}' must be a mapping")
    unknown = set(sec) - set(allowed)
    if unknown:
        raise ConfigError(f"unknown keys in '{name}': {sorted(unknown)}")
    return sec


def config_from_dict(data: dict) -> SimConfig:
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError("config root must be a mapping")
    unknown = set(data) - {"simulation", "event", "noise", "constraints", "geometry", "fuel"}
    if unknown:
        raise ConfigError(f"unknown sections: {sorted(unknown)}")
    sim = dict(_section(data, "simulation", _SIM_KEYS))
    ev = _section(data, "event", ("s_x", "s_v", "min_mode"))
    cons = _section(data, "constraints", [f.name for f in fields(ConstraintParams)])
    geo = _section(data, "geometry", ("L",))
    fuel = _section(data, "fuel", [f.name for f in fields(FuelParams)])
    kwargs = dict(sim)
    if "v0_range" in kwargs:
        kwargs["v0_range"] = tuple(kwargs["v0_range"])
    base = SimConfig.__dataclass_fields__["s_default"].default
    kwargs["s_default"] = (ev.get("s_x", base[0]), ev.get("s_v", base[1]))
    if "min_mode" in ev:
        kwargs["min_mode"] = ev["min_mode"]
    noise = data.get("noise")
    if noise is not None:
        if not isinstance(noise, dict) or set(noise) != {"w1", "w2"}:
            raise ConfigError("noise must map w1 and w2 to [lo, hi] ranges")
        kwargs["noise"] = (tuple(noise["w1"]), tuple(noise["w2"]))
    try:
        kwargs["params"] = ConstraintParams(**cons)
        kwargs["geometry"] = Geometry(**geo)
        kwargs["fuel"] = FuelParams(**fuel)
        return SimConfig(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path) -> SimConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML in {path}: {exc}") from exc
    return config_from_dict(data)


def save_config(cfg: SimConfig, path) -> None:
    Path(path).write_text(yaml.safe_dump(config_to_dict(cfg), sort_keys=False))


# --- traces -------------------------------------------------------------------

def _fmt(val):
    if isinstance(val, float):
        return "nan" if math.isnan(val) else repr(val)
    return str(val)


def write_trace(path, samples) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TRACE_COLUMNS)
        for s in samples:
            w.writerow([_fmt(getattr(s, c)) for c in TRACE_COLUMNS])


def read_trace(path) -> list:
    out = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != TRACE_COLUMNS:
            raise ValueError(f"unexpected trace header in {path}")
        for row in reader:
            out.append(TraceSample(
                t=float(row["t"]), id=int(row["id"]), x=float(row["x"]), v=float(row["v"]),
                u=float(row["u"]), b1=float(row["b1"]), b2=float(row["b2"]),
                b3=float(row["b3"]), b4=float(row["b4"]), status=row["status"]))
    return out


def trace_summary(samples) -> dict:
    """Average travel time and control energy recomputed from a trace.

    Each row's ``u`` holds until the vehicle's next row, the last row is the exit.
    """
    by_id = {}
    for s in samples:
        by_id.setdefault(s.id, []).append(s)
    tt, energy = [], []
    for rows in by_id.values():
        rows.sort(key=lambda s: s.t)
        t = np.array([r.t for r in rows])
        u = np.array([r.u for r in rows])
        tt.append(t[-1] - t[0])
        energy.append(float(np.sum(0.5 * u[:-1] ** 2 * np.diff(t))))
    return {"n_cavs": len(by_id), "avg_travel_time": float(np.mean(tt)),
            "avg_half_u2": float(np.mean(energy))}


# --- summaries ---------------------------------------------------------------------

SUMMARY_KEYS = ("mode", "seed") + tuple(f.name for f in fields(RunMetrics))


def summary_row(mode: str, seed: int, metrics: RunMetrics) -> dict:
    return {"mode": mode, "seed": seed, **metrics.to_dict()}


def write_summary(out_dir, rows) -> tuple:
    """Write ``summary.csv`` and ``summary.json``; returns both paths."""
    out_dir = Path(out_dir)
    csv_path, json_path = out_dir / "summary.csv", out_dir / "summary.json"
    with open(csv_path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=SUMMARY_KEYS)
        w.writeheader()
        for row in rows:
            w.writerow({k: _fmt(row[k]) for k in SUMMARY_KEYS})
    with open(json_path, "w") as fh:
        json.dump({"runs": [_jsonable(r) for r in rows]}, fh, indent=2)
    return csv_path, json_path


def _jsonable(row):
    return {k: (None if isinstance(v, float) and not math.isfinite(v) else v) for k, v in row.items()}


def comparison_report(pairs) -> str:
    """Paired time-driven vs event-triggered comparison.

    ``pairs`` is a list of ``(seed, td_metrics, et_metrics)``. Energy and fuel
    are listed side by side; their orderings are not required to agree.
    """
    if not pairs:
        raise ValueError("no paired runs to compare")
    lines = ["seed  qp_td  qp_et  ratio  infeas_td  infeas_et  tt_td  tt_et  "
             "half_u2_td  half_u2_et  fuel_td  fuel_et  messages_et"]
    tq = eq = ti = ei = 0
    for seed, td, et in pairs:
        lines.append(f"{seed:4d} {td.qp_solved:6d} {et.qp_solved:6d} "
                     f"{et.qp_solved / td.qp_solved:6.3f} {td.qp_infeasible:10d} "
                     f"{et.qp_infeasible:10d} {td.avg_travel_time:6.2f} {et.avg_travel_time:6.2f} "
                     f"{td.avg_half_u2:11.3f} {et.avg_half_u2:11.3f} {td.avg_fuel:8.3f} "
                     f"{et.avg_fuel:8.3f} {et.messages:12d}")
        tq += td.qp_solved
        eq += et.qp_solved
        ti += td.qp_infeasible
        ei += et.qp_infeasible
    mean = lambda key, k: float(np.mean([getattr(p[k], key) for p in pairs]))  # noqa: E731
    lines += [
        "",
        f"QP-count ratio (event/time): {eq / tq:.3f}",
        f"infeasible QPs: time {ti}, event {ei}"
        + (f" (ratio {ei / ti:.3f})" if ti else ""),
        f"avg travel time: time {mean('avg_travel_time', 1):.3f} s, "
        f"event {mean('avg_travel_time', 2):.3f} s",
        f"avg 1/2 u^2: time {mean('avg_half_u2', 1):.3f}, event {mean('avg_half_u2', 2):.3f}",
        f"avg fuel: time {mean('avg_fuel', 1):.3f}, event {mean('avg_fuel', 2):.3f}",
    ]
    return "\n".join(lines) + "\n"
