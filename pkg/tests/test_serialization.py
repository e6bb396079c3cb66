import json
import math
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ocbf_merge.cli import main
from ocbf_merge.metrics import ConstraintParams
from ocbf_merge.serialization import (ConfigError, comparison_report, config_from_dict,
                                      config_to_dict, load_config, read_trace, save_config,
                                      trace_summary, write_summary, write_trace, summary_row)
from ocbf_merge.simulation import SimConfig, run


@given(alpha=st.floats(0.0, 0.95), sx=st.floats(0.1, 5.0), sv=st.floats(0.05, 2.0),
       seed=st.integers(0, 2 ** 31), noisy=st.booleans(), joint=st.booleans(),
       phi=st.floats(0.5, 3.0))
def test_config_round_trip(tmp_path_factory, alpha, sx, sv, seed, noisy, joint, phi):
    cfg = SimConfig(alpha=alpha, s_default=(sx, sv), rng_seed=seed,
                    noise=((-2.0, 2.0), (-0.2, 0.2)) if noisy else None,
                    min_mode="joint" if joint else "componentwise",
                    params=ConstraintParams(phi=phi))
    path = tmp_path_factory.mktemp("cfg") / "c.yaml"
    save_config(cfg, path)
    assert load_config(path) == cfg
    assert config_from_dict(config_to_dict(cfg)) == cfg


def test_config_errors(tmp_path):
    with pytest.raises(ConfigError):
        config_from_dict({"simulation": {"warp": 9}})
    with pytest.raises(ConfigError):
        config_from_dict({"extras": {}})
    with pytest.raises(ConfigError):
        config_from_dict({"simulation": {"dt": -1}})
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.yaml")
    bad = tmp_path / "bad.yaml"
    bad.write_text("simulation: [1, 2")
    with pytest.raises(ConfigError):
        load_config(bad)
    assert config_from_dict(None) == SimConfig()


def test_summary_recomputable_from_trace(tmp_path):
    res = run(SimConfig(mode="event_triggered", cav_count=5, rng_seed=2))
    path = tmp_path / "trace.csv"
    write_trace(path, res.traces())
    samples = read_trace(path)
    assert len(samples) == len(res.traces())
    summ = trace_summary(samples)
    assert summ["n_cavs"] == res.metrics.n_cavs
    assert summ["avg_half_u2"] == pytest.approx(res.metrics.avg_half_u2, rel=1e-6)
    assert summ["avg_travel_time"] == pytest.approx(res.metrics.avg_travel_time, rel=1e-9)
    assert [s.status for s in samples].count("Exit") == 5


def test_summary_files(tmp_path):
    res = run(SimConfig(cav_count=2, rng_seed=1))
    rows = [summary_row("time_driven", 1, res.metrics)]
    csv_path, json_path = write_summary(tmp_path, rows)
    data = json.loads(json_path.read_text())["runs"][0]
    assert data["qp_solved"] == res.metrics.qp_solved and data["seed"] == 1
    header = csv_path.read_text().splitlines()[0].split(",")
    assert header[:3] == ["mode", "seed", "avg_travel_time"]


def test_report_lists_energy_and_fuel():
    a = run(SimConfig(mode="time_driven", cav_count=3, rng_seed=0)).metrics
    b = run(SimConfig(mode="event_triggered", cav_count=3, rng_seed=0)).metrics
    text = comparison_report([(0, a, b)])
    assert "QP-count ratio" in text and "avg fuel" in text and "avg 1/2 u^2" in text
    with pytest.raises(ValueError):
        comparison_report([])


def test_cli_event_runs(tmp_path):
    out = tmp_path / "r"
    rc = main(["--mode", "event", "--alpha", "0.25", "--s-x", "2", "--s-v", "0.5",
               "--runs", "3", "--seed", "7", "--cav-count", "4", "--out", str(out)])
    assert rc == 0
    traces = sorted(p.name for p in out.glob("trace_*.csv"))
    assert traces == [f"trace_event_seed{s}.csv" for s in (7, 8, 9)]
    rows = json.loads((out / "summary.json").read_text())["runs"]
    assert [r["seed"] for r in rows] == [7, 8, 9]
    assert load_config(out / "config.yaml").s_default == (2.0, 0.5)


def test_cli_both_writes_report(tmp_path, capsys):
    rc = main(["--mode", "both", "--cav-count", "3", "--seed", "1", "--out", str(tmp_path),
               "--min-mode", "joint", "--noise"])
    assert rc == 0
    assert "QP-count ratio" in (tmp_path / "report.txt").read_text()
    assert "QP-count ratio" in capsys.readouterr().out
    assert load_config(tmp_path / "config.yaml").noise is not None


def test_cli_missing_config(tmp_path, capsys):
    with pytest.raises(SystemExit) as err:
        main(["--config", str(tmp_path / "nope.yaml"), "--out", str(tmp_path)])
    assert err.value.code != 0
    assert "usage:" in capsys.readouterr().err


def test_cli_invalid_config(tmp_path, capsys):
    cfg = tmp_path / "c.yaml"
    cfg.write_text("simulation: {dt: -0.1}\n")
    assert main(["--config", str(cfg), "--out", str(tmp_path / "o")]) != 0
    assert "invalid config" in capsys.readouterr().err


def test_cli_partial_run_writes_no_summary(tmp_path, monkeypatch):
    import ocbf_merge.cli as cli

    calls = {"n": 0}
    real = cli.run

    def flaky(cfg):
        calls["n"] += 1
        if calls["n"] == 2:
            raise RuntimeError("boom")
        return real(cfg)

    monkeypatch.setattr(cli, "run", flaky)
    assert main(["--mode", "time", "--runs", "3", "--cav-count", "2",
                 "--out", str(tmp_path)]) == 1
    assert not (tmp_path / "summary.csv").exists()
    assert not (tmp_path / "summary.json").exists()


def test_module_entry_point(tmp_path):
    env = dict(os.environ, OCBF_MERGE_OUT=str(tmp_path / "env_out"))
    out = subprocess.run([sys.executable, "-m", "ocbf_merge", "--mode", "time",
                          "--cav-count", "2"], env=env, capture_output=True, text=True)
    assert out.returncode == 0, out.stderr
    assert (tmp_path / "env_out" / "summary.csv").exists()
