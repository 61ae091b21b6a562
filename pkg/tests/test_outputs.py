"""CSV artifacts, replay consistency, and the command-line interface."""
import csv
import dataclasses
import os
from pathlib import Path

import pytest

from qsched.cli import main
from qsched.config import ScenarioConfig
from qsched.simulation import run_scenario


def short_cfg(**over):
    base = dict(sim_time_s=6.0, nodes=4)
    base.update(over)
    return dataclasses.replace(ScenarioConfig(), **base)


def read_csv(path):
    with open(path) as fh:
        comment = fh.readline()
        assert comment.startswith("# ")
        return list(csv.DictReader(fh))


def test_summary_schema(tmp_path):
    run_scenario(short_cfg(), tmp_path)
    rows = read_csv(tmp_path / "summary.csv")
    assert list(rows[0]) == ["class", "node", "flows", "delivered", "dropped",
                             "throughput_mbps", "mean_delay_us", "mean_jitter_us"]
    assert [r["node"] for r in rows] == ["1", "2", "3", "4", "network"]
    assert all(r["class"] == "ertPS" for r in rows)


def test_trace_schema_and_dispositions(tmp_path):
    run_scenario(short_cfg(), tmp_path, emit_trace=True)
    rows = read_csv(tmp_path / "trace.csv")
    assert list(rows[0]) == ["pkt_id", "flow", "node", "class", "size_B",
                             "t_gen_us", "t_st_us", "t_rx_us", "disposition"]
    assert {r["disposition"] for r in rows} <= {"delivered", "dropped", "queued"}
    q = [r for r in rows if r["disposition"] == "queued"]
    assert all(r["t_rx_us"] == "" for r in q)
    d = [r for r in rows if r["disposition"] == "delivered"]
    assert all(int(r["t_rx_us"]) > int(r["t_gen_us"]) for r in d)
    # pkt_ids are dense and ordered
    assert [int(r["pkt_id"]) for r in rows] == list(range(len(rows)))


def test_grants_and_positions_schemas(tmp_path):
    run_scenario(short_cfg(qos_class="UGS"), tmp_path,
                 emit_grants=True, emit_positions=True)
    g = read_csv(tmp_path / "grants.csv")
    assert list(g[0]) == ["frame_idx", "cid", "class", "requested_B",
                          "granted_B", "queue_B"]
    assert all(r["class"] == "UGS" for r in g)
    p = read_csv(tmp_path / "positions.csv")
    assert list(p[0]) == ["time_us", "node", "x_m", "y_m"]
    assert p[0]["time_us"] == "0"


def test_repeat_runs_write_identical_bytes(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    run_scenario(short_cfg(), a, emit_trace=True, emit_positions=True)
    run_scenario(short_cfg(), b, emit_trace=True, emit_positions=True)
    # report.txt stays out: it prints wall time, which is allowed to vary
    for name in ("summary.csv", "trace.csv", "positions.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes(), name


def test_trace_replays_to_the_summary(tmp_path):
    """Recompute every summary number from the raw trace independently."""
    cfg = short_cfg(qos_class="rtPS")
    run_scenario(cfg, tmp_path, emit_trace=True)
    trace = read_csv(tmp_path / "trace.csv")
    summary = {r["node"]: r for r in read_csv(tmp_path / "summary.csv")}
    sim_end = int(cfg.sim_time_s * 1_000_000)
    per_node = {}
    for row in trace:
        per_node.setdefault(row["node"], []).append(row)
    for node, rows in per_node.items():
        delivered = [r for r in rows if r["disposition"] == "delivered"]
        delays = [int(r["t_rx_us"]) - int(r["t_gen_us"]) for r in delivered]
        jits = [abs(b - a) for a, b in zip(delays, delays[1:])]
        bits = sum(int(r["size_B"]) * 8 for r in delivered)
        want = summary[node]
        assert int(want["delivered"]) == len(delivered)
        assert float(want["throughput_mbps"]) == pytest.approx(bits / sim_end, abs=1e-6)
        if delays:
            assert float(want["mean_delay_us"]) == pytest.approx(
                sum(delays) / len(delays), abs=1e-3)
        if jits:
            assert float(want["mean_jitter_us"]) == pytest.approx(
                sum(jits) / len(jits), abs=1e-3)


def test_report_text_mentions_the_essentials(tmp_path):
    run_scenario(short_cfg(qos_class="BE"), tmp_path)
    text = (tmp_path / "report.txt").read_text()
    assert "class BE" in text
    assert "network throughput" in text
    assert "mean end-to-end delay" in text


# ---- CLI ----

def test_cli_run_writes_and_exits_zero(tmp_path, capsys):
    rc = main(["run", "--time", "4", "--set", "nodes=3",
               "--out", str(tmp_path), "--trace"])
    assert rc == 0
    out = capsys.readouterr().out
    assert "network throughput" in out
    assert (tmp_path / "summary.csv").exists()
    assert (tmp_path / "trace.csv").exists()


def test_cli_class_and_seed_flags(tmp_path, capsys):
    rc = main(["run", "--time", "4", "--class", "UGS", "--seed", "7",
               "--out", str(tmp_path), "--quiet"])
    assert rc == 0
    head = (tmp_path / "summary.csv").read_text().splitlines()[0]
    assert head == "# seed=7 class=UGS"


def test_cli_rejects_bad_config(tmp_path, capsys):
    assert main(["run", "--set", "nodes=0", "--out", str(tmp_path)]) == 1
    assert main(["run", "--set", "gibberish", "--out", str(tmp_path)]) == 1
    assert main(["run", "--config", str(tmp_path / "nope.conf")]) == 1
    err = capsys.readouterr().err
    assert "config error" in err


def test_cli_rejects_unknown_usage(capsys):
    assert main(["run", "--frobnicate"]) == 1
    assert main([]) == 1
    assert main(["run", "--class", "bronze"]) == 1


def test_cli_runtime_failure_is_exit_two(tmp_path, capsys):
    blocker = tmp_path / "file-not-dir"
    blocker.write_text("x")
    rc = main(["run", "--time", "1", "--out", str(blocker)])
    assert rc == 2
    assert "runtime failure" in capsys.readouterr().err


def test_cli_out_env_var(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("QSCHED_OUT", str(tmp_path / "from-env"))
    assert main(["run", "--time", "2", "--quiet"]) == 0
    assert (tmp_path / "from-env" / "summary.csv").exists()
    # explicit --out beats the environment
    assert main(["run", "--time", "2", "--quiet",
                 "--out", str(tmp_path / "explicit")]) == 0
    assert (tmp_path / "explicit" / "summary.csv").exists()


def test_cli_compare_writes_matrix(tmp_path, capsys):
    rc = main(["compare", "--time", "4", "--set", "nodes=3",
               "--seed-list", "42,43", "--out", str(tmp_path)])
    assert rc == 0
    rows = read_csv(tmp_path / "comparison.csv")
    assert list(rows[0]) == ["seed", "class", "delivered", "dropped",
                             "throughput_mbps", "mean_delay_us", "mean_jitter_us"]
    assert len(rows) == 10                  # 2 seeds x 5 classes
    assert {r["class"] for r in rows} == {"UGS", "ertPS", "rtPS", "nrtPS", "BE"}
    assert (tmp_path / "compare.txt").exists()
    out = capsys.readouterr().out
    assert "delay order" in out


def test_cli_compare_seed_list_validation(capsys):
    assert main(["compare", "--seed-list", "a,b"]) == 1
    assert main(["compare", "--seeds", "0"]) == 1
