"""Whole-scenario behavior: determinism, pairing, conservation, class timing."""
import dataclasses

import pytest

from qsched.config import ScenarioConfig, load_config
from qsched.metrics import Disposition
from qsched.scheduler import ServiceClass
from qsched.simulation import run_scenario


def short_cfg(**over):
    base = dict(sim_time_s=8.0, nodes=4)
    base.update(over)
    return dataclasses.replace(ScenarioConfig(), **base)


def test_identical_runs_are_bit_identical():
    a = run_scenario(short_cfg())
    b = run_scenario(short_cfg())
    assert a.trace_digest == b.trace_digest
    assert a.mobility_digest == b.mobility_digest
    assert a.network.mean_delay_us == b.network.mean_delay_us
    assert a.network.throughput_mbps == b.network.throughput_mbps
    assert [p for p in a.series.points] == [p for p in b.series.points]


def test_different_seed_changes_the_run():
    a = run_scenario(short_cfg())
    b = run_scenario(short_cfg(master_seed=43))
    assert a.trace_digest != b.trace_digest
    assert a.mobility_digest != b.mobility_digest


def test_classes_share_mobility_and_traffic_exactly():
    # the named substreams keep the workload identical across policies, so
    # metric differences are attributable to scheduling alone
    runs = [run_scenario(short_cfg(qos_class=c))
            for c in ("UGS", "ertPS", "rtPS", "nrtPS", "BE")]
    assert len({r.mobility_digest for r in runs}) == 1
    assert len({r.traffic_digest for r in runs}) == 1
    assert len({r.generated for r in runs}) == 1
    # while the outcomes differ
    assert len({r.trace_digest for r in runs}) == 5


def test_every_packet_is_accounted_for():
    for cls in ("UGS", "ertPS", "rtPS", "nrtPS", "BE"):
        r = run_scenario(short_cfg(qos_class=cls))
        assert r.generated == r.delivered + r.dropped + r.leftover
        assert r.generated > 0


def test_unreachable_network_delivers_nothing():
    # a 1 m radio sees nobody: grants never issue, queues overflow, and
    # every generated packet is either dropped or still queued
    r = run_scenario(short_cfg(radio_range_m=1.0, queue_capacity_pkts=50))
    assert r.delivered == 0
    assert r.dropped > 0
    assert r.generated == r.dropped + r.leftover
    assert r.network.throughput_mbps == 0.0


def test_zero_sim_time_runs_empty():
    r = run_scenario(short_cfg(sim_time_s=0.0))
    assert r.frames == 0
    assert r.generated == 0
    assert r.network.throughput_mbps == 0.0
    assert r.series.points == []


def test_frame_count_matches_horizon():
    r = run_scenario(short_cfg(sim_time_s=0.5))
    assert r.frames == 100                   # boundaries at 0..495 ms


def test_nrtps_slow_poll_count_is_exact():
    cfg = ScenarioConfig(qos_class="nrtPS")  # full 100 s defaults
    r = run_scenario(cfg)
    # 1 s cycle anchored after the 2 s application start: 98 polls each
    assert sorted(set(r.poll_counts.values())) == [98]


def test_ugs_split_burst_delay_steps_are_exact():
    # one flow, constant-size bursts: the 1500B fragment goes out on the
    # anchored frame, the 790B remainder exactly one frame later. Every
    # jitter sample is then 5000 - 1205 + 637 = 4432 us.
    cfg = short_cfg(qos_class="UGS", nodes=1, frame_bytes_cv=0.0)
    r = run_scenario(cfg, keep_records=True)
    s = r.flow_stats[0]
    assert set(s.jitter_samples) == {4432}
    assert r.dropped == 0


def test_ertps_pipeline_delay_steps_are_exact():
    # same-frame service of both fragments: offsets differ by the head
    # packet's 1510-byte slot (1208 us) minus the air-time difference
    cfg = short_cfg(qos_class="ertPS", nodes=1, frame_bytes_cv=0.0)
    r = run_scenario(cfg, keep_records=True)
    s = r.flow_stats[0]
    assert set(s.jitter_samples) == {640}


def test_arrivals_beat_same_tick_frame_boundaries():
    # a burst landing exactly on a frame boundary is eligible in that same
    # frame; with UGS the anchored grant then serves it within the frame,
    # so no delivered head packet ever waits a full extra period
    cfg = short_cfg(qos_class="UGS", nodes=1, frame_bytes_cv=0.0, sim_time_s=6.0)
    r = run_scenario(cfg, keep_records=True)
    heads = [rec for rec in r.records
             if rec.disposition is Disposition.DELIVERED and rec.size == 1500]
    assert heads, "expected delivered head fragments"
    for rec in heads:
        wait = rec.t_st - rec.t_gen
        assert 0 <= wait < 10_000   # under two frames, never a whole period


def test_mean_delay_reflects_queueing_not_just_airtime():
    cfg = short_cfg(qos_class="rtPS")
    r = run_scenario(cfg)
    net = r.network
    # air time for the fragment mix is ~920 us; queue wait dominates
    assert net.mean_tx_delay_us < 1300
    assert net.mean_delay_us > 5 * net.mean_tx_delay_us


def test_load_step_raises_offered_and_served_load():
    cfg = short_cfg(qos_class="ertPS", sim_time_s=20.0,
                    load_step_time_s=10.0, load_step_factor=1.5)
    r = run_scenario(cfg, keep_records=True)
    early = [rec.size for rec in r.records if rec.t_gen < 10_000_000]
    late = [rec.size for rec in r.records if rec.t_gen >= 10_000_000]
    # mean packet count per burst rises with the bigger bursts
    assert sum(late) / len(late) != sum(early) / len(early)
    bursts_late = {}
    for rec in r.records:
        if rec.t_gen >= 10_000_000:
            bursts_late.setdefault((rec.flow, rec.t_gen), 0)
            bursts_late[(rec.flow, rec.t_gen)] += rec.size
    mean_late_burst = sum(bursts_late.values()) / len(bursts_late)
    assert mean_late_burst == pytest.approx(2290 * 1.5, rel=0.05)


def test_ugs_grant_size_constant_through_load_step():
    cfg = short_cfg(qos_class="UGS", sim_time_s=20.0,
                    load_step_time_s=10.0, load_step_factor=1.5)
    r = run_scenario(cfg, collect_audit=True)
    sizes = {a.granted_bytes for a in r.audit if a.granted_bytes > 0}
    assert sizes == {1562}


def test_ertps_grants_adapt_within_two_periods_of_step():
    cfg = short_cfg(qos_class="ertPS", nodes=1, frame_bytes_cv=0.0,
                    sim_time_s=20.0, load_step_time_s=10.0, load_step_factor=1.5)
    r = run_scenario(cfg, collect_audit=True)
    step_frame = 10_000_000 // cfg.frame_duration_us
    period_frames = 8 * cfg.ertps_grant_period_frames  # one burst cycle
    pre = {a.granted_bytes for a in r.audit
           if a.granted_bytes > 6 and a.frame_idx < step_frame}
    adapted = [a.frame_idx for a in r.audit
               if a.granted_bytes > max(pre) and a.frame_idx >= step_frame]
    assert adapted, "no enlarged grant after the step"
    assert min(adapted) <= step_frame + 2 * period_frames


def test_positions_logged_at_every_refresh():
    cfg = short_cfg(sim_time_s=8.0, nodes=3, refresh_interval_s=2.0)
    r = run_scenario(cfg)
    times = sorted({t for t, *_ in r.position_rows})
    assert times == [0, 2_000_000, 4_000_000, 6_000_000]
    per_refresh = [n for t, n, *_ in r.position_rows if t == 0]
    assert per_refresh == [0, 1, 2, 3]       # coordinator plus each node


def test_stationary_nodes_when_speed_zero():
    cfg = short_cfg(speed_kmh=0.0, sim_time_s=6.0)
    r = run_scenario(cfg)
    by_node = {}
    for t, node, x, y in r.position_rows:
        by_node.setdefault(node, set()).add((x, y))
    assert all(len(v) == 1 for v in by_node.values())


def test_run_wallclock_is_reported():
    r = run_scenario(short_cfg(sim_time_s=2.0))
    assert r.wall_s > 0.0
    assert r.events > 0
