"""Scenario assembly: wires mobility, traffic, and the scheduler to the event loop.

One run builds N subscriber nodes (ids 1..N) around a stationary coordinator
(id 0), each carrying a single uplink flow whose connection id equals the node
id.  Every flow runs the same service class; comparisons across classes come
from separate runs sharing a master seed, which keeps mobility and traffic
draw-for-draw identical because those use dedicated named substreams.

Event choreography per tick (ties break by scheduling order): packet arrivals
land before the frame boundary they race, the boundary then builds the grant
map against the latest neighbor snapshot, serves grants, and finally processes
this frame's request regions (poll responses, contention resolution).
"""
from __future__ import annotations

import hashlib
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

from .config import ScenarioConfig
from .engine import EventKind, Event, RngStreams, SECOND, Simulator, ticks
from .metrics import (Disposition, FlowStats, PacketRecord, SummaryRow,
                      TimeSeries, summarize, throughput_series)
from .mobility import COORDINATOR_ID, Arena, MobilityModel, NeighborSnapshot
from .scheduler import (AuditRow, ServiceClass, ServiceFlow, UplinkScheduler)
from .traffic import VideoSourceConfig, frame_size, frame_time, fragment


@dataclass
class RunReport:
    """Everything a caller needs after one scenario run."""
    cfg: ScenarioConfig
    svc_class: ServiceClass
    flow_stats: list[FlowStats]
    flow_rows: list[SummaryRow]
    node_rows: list[SummaryRow]
    network: SummaryRow
    series: TimeSeries
    per_flow_mbps: dict[int, float]
    generated: int
    delivered: int
    dropped: int
    leftover: int
    frames: int
    events: int
    poll_counts: dict[int, int]
    contention_attempts: int
    contention_collisions: int
    mobility_digest: str
    traffic_digest: str
    trace_digest: str
    wall_s: float
    audit: list[AuditRow] | None = None
    # (frame_idx, polls, contention_B, data_B, region_B, used_B, capacity_B)
    frame_usage: list[tuple[int, int, int, int, int, int, int]] | None = None
    records: list[PacketRecord] | None = None
    position_rows: list[tuple[int, int, float, float]] = field(default_factory=list)
    paths: dict[str, Path] = field(default_factory=dict)


class Simulation:
    """Mutable state for one scenario run; use run_scenario() for the API."""

    def __init__(self, cfg: ScenarioConfig, collect_audit: bool = False) -> None:
        self.cfg = cfg
        self.sim_end = cfg.sim_end()
        self.params = cfg.scheduler_params()
        self.streams = RngStreams(cfg.master_seed)
        self.sim = Simulator()
        self.arena = Arena(cfg.arena_width_m, cfg.arena_height_m)
        self.node_ids = list(range(1, cfg.nodes + 1))
        node_ids = self.node_ids
        self.model = MobilityModel(self.arena, cfg.speed_mps(),
                                   self.streams.mobility, node_ids)
        self.snapshot: NeighborSnapshot | None = None
        svc = cfg.service_class()
        app_start = ticks(cfg.app_start_s)
        frame_us = cfg.frame_duration_us
        step_time = ticks(cfg.load_step_time_s) if cfg.load_step_time_s > 0 else None
        self.sources: dict[int, VideoSourceConfig] = {}
        flows: list[ServiceFlow] = []
        for i in node_ids:
            phase = int(self.streams.traffic.uniform(0, SECOND / cfg.fps))
            start = app_start + phase
            self.sources[i] = VideoSourceConfig(
                fps=cfg.fps, frame_bytes_mean=cfg.frame_bytes_mean,
                frame_bytes_cv=cfg.frame_bytes_cv, start_time=start,
                mtu=cfg.mtu_bytes, step_time=step_time,
                step_factor=cfg.load_step_factor)
            anchor = -(-start // frame_us)
            if svc in (ServiceClass.RTPS,):
                poll_anchor = anchor
            else:
                # slow poll cycle, staggered so requests spread over the cycle
                stagger = (i - 1) * cfg.nrtps_poll_interval_us // cfg.nodes
                poll_anchor = -(-(app_start + stagger) // frame_us)
            flows.append(ServiceFlow(
                cid=i, node=i, svc_class=svc,
                reserved_rate_bps=cfg.reserved_rate_bps,
                grant_anchor_frame=anchor, poll_anchor_frame=poll_anchor,
                queue_capacity=cfg.queue_capacity_pkts))
        self.audit: list[AuditRow] | None = [] if collect_audit else None
        self.frame_usage: list[tuple] | None = [] if collect_audit else None
        self.sched = UplinkScheduler(self.params, flows,
                                     contention_rng=self.streams.contention,
                                     audit=self.audit)
        self.records: list[PacketRecord] = []
        self.position_rows: list[tuple[int, int, float, float]] = []
        self.frames = 0
        self.ended = False

        self.sim.register(EventKind.WAYPOINT_REACHED, self._on_waypoint)
        self.sim.register(EventKind.NEIGHBOR_REFRESH, self._on_refresh)
        self.sim.register(EventKind.PACKET_ARRIVAL, self._on_arrival)
        self.sim.register(EventKind.FRAME_BOUNDARY, self._on_frame)
        self.sim.register(EventKind.SIM_END, self._on_end)

        # Setup order fixes same-tick ties at t=0: legs start, then the first
        # snapshot, then the first frame sees it.
        for i in node_ids:
            self.sim.schedule(0, EventKind.WAYPOINT_REACHED, i)
        self.sim.schedule(0, EventKind.NEIGHBOR_REFRESH, None)
        if self.sim_end > 0:
            self.sim.schedule(0, EventKind.FRAME_BOUNDARY, 0)
        for i in node_ids:
            t0 = frame_time(self.sources[i], 0)
            if t0 < self.sim_end:
                self.sim.schedule(t0, EventKind.PACKET_ARRIVAL, (i, 0))
        self.sim.schedule(self.sim_end, EventKind.SIM_END, None)

    # ---- handlers ----

    def _on_waypoint(self, ev: Event) -> None:
        arrival = self.model.start_leg(ev.payload, ev.fire_at)
        if arrival is not None and arrival < self.sim_end:
            self.sim.schedule(arrival, EventKind.WAYPOINT_REACHED, ev.payload)

    def _on_refresh(self, ev: Event) -> None:
        self.snapshot = self.model.refresh(ev.fire_at, self.cfg.radio_range_m)
        for node in (COORDINATOR_ID, *self.node_ids):
            pos = self.model.position_at(node, ev.fire_at)
            self.position_rows.append((ev.fire_at, node, pos.x, pos.y))
        t = ev.fire_at + ticks(self.cfg.refresh_interval_s)
        if t < self.sim_end:
            self.sim.schedule(t, EventKind.NEIGHBOR_REFRESH, None)

    def _on_arrival(self, ev: Event) -> None:
        cid, k = ev.payload
        src = self.sources[cid]
        flow = self.sched.flow_by_cid[cid]
        nbytes = frame_size(src, ev.fire_at, self.streams.traffic)
        pkts = fragment(nbytes, src.mtu, ev.fire_at, cid, len(self.records))
        for pkt in pkts:
            rec = PacketRecord(pkt.pkt_id, cid, flow.node, flow.svc_class,
                               pkt.size, pkt.t_gen)
            self.records.append(rec)
            if not flow.enqueue(pkt):
                rec.disposition = Disposition.DROPPED
        t_next = frame_time(src, k + 1)
        if t_next < self.sim_end:
            self.sim.schedule(t_next, EventKind.PACKET_ARRIVAL, (cid, k + 1))

    def _on_frame(self, ev: Event) -> None:
        idx = ev.payload
        gm = self.sched.build_grant_map(idx, self.snapshot)
        for pkt, delivered in self.sched.serve_frame(gm, self.snapshot, ev.fire_at):
            rec = self.records[pkt.pkt_id]
            rec.t_st = pkt.t_st
            if delivered:
                rec.t_rx = pkt.t_rx
                rec.disposition = Disposition.DELIVERED
            else:
                rec.disposition = Disposition.DROPPED
        self.sched.end_frame(gm, ev.fire_at, self.snapshot)
        if self.frame_usage is not None:
            self.frame_usage.append(
                (idx, len(gm.polled), gm.contention_bytes,
                 sum(e.granted_bytes for e in gm.entries),
                 gm.region_bytes, gm.used_bytes, gm.capacity_bytes))
        self.frames += 1
        t_next = (idx + 1) * self.cfg.frame_duration_us
        if t_next < self.sim_end:
            self.sim.schedule(t_next, EventKind.FRAME_BOUNDARY, idx + 1)

    def _on_end(self, ev: Event) -> None:
        self.ended = True

    # ---- reporting ----

    def run(self, keep_records: bool = False) -> RunReport:
        t0 = time.perf_counter()
        events = self.sim.run_until(self.sim_end)
        wall = time.perf_counter() - t0
        cfg = self.cfg
        by_flow: dict[int, list[PacketRecord]] = {f.cid: [] for f in self.sched.flows}
        for rec in self.records:
            by_flow[rec.flow].append(rec)
        stats = [FlowStats.from_records(f.cid, f.node, f.svc_class, by_flow[f.cid])
                 for f in self.sched.flows]
        sim_end = self.sim_end
        flow_rows = summarize(stats, sim_end, group="flow")
        node_rows = summarize(stats, sim_end, group="node")
        network = summarize(stats, sim_end, group="network")[0]
        series = throughput_series(self.records, sim_end)
        per_flow = {s.flow: (s.delivered_bits / sim_end if sim_end else 0.0)
                    for s in stats}
        mob = hashlib.sha256()
        for t, node, x, y in self.position_rows:
            mob.update(f"{t},{node},{x:.6f},{y:.6f};".encode())
        tra = hashlib.sha256()
        trc = hashlib.sha256()
        for rec in self.records:
            tra.update(f"{rec.pkt_id},{rec.flow},{rec.size},{rec.t_gen};".encode())
            trc.update(f"{rec.pkt_id},{rec.flow},{rec.size},{rec.t_gen},"
                       f"{rec.t_st},{rec.t_rx},{rec.disposition.value};".encode())
        delivered = sum(s.delivered_packets for s in stats)
        dropped = sum(s.drops for s in stats)
        leftover = sum(s.leftover for s in stats)
        return RunReport(
            cfg=cfg, svc_class=cfg.service_class(), flow_stats=stats,
            flow_rows=flow_rows, node_rows=node_rows, network=network,
            series=series, per_flow_mbps=per_flow,
            generated=len(self.records), delivered=delivered, dropped=dropped,
            leftover=leftover, frames=self.frames, events=events,
            poll_counts=dict(self.sched.poll_counts),
            contention_attempts=self.sched.contention_attempts,
            contention_collisions=self.sched.contention_collisions,
            mobility_digest=mob.hexdigest(), traffic_digest=tra.hexdigest(),
            trace_digest=trc.hexdigest(), wall_s=wall, audit=self.audit,
            frame_usage=self.frame_usage,
            records=self.records if keep_records else None,
            position_rows=self.position_rows)


def run_scenario(cfg: ScenarioConfig, out_dir: Path | str | None = None, *,
                 emit_trace: bool = False, emit_grants: bool = False,
                 emit_positions: bool = False, keep_records: bool = False,
                 collect_audit: bool = False) -> RunReport:
    """Run one scenario end to end, optionally writing CSV artifacts."""
    simu = Simulation(cfg, collect_audit=collect_audit or emit_grants)
    report = simu.run(keep_records=keep_records or emit_trace)
    if out_dir is not None:
        from . import outputs
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        comment = f"seed={cfg.master_seed} class={report.svc_class.display}"
        report.paths["summary"] = outputs.write_summary(
            out / "summary.csv", report.node_rows + [report.network], comment)
        report.paths["report"] = outputs.write_report_text(
            out / "report.txt", report)
        if emit_trace:
            report.paths["trace"] = outputs.write_trace(
                out / "trace.csv", report.records or simu.records, comment)
        if emit_grants and report.audit is not None:
            report.paths["grants"] = outputs.write_grants(
                out / "grants.csv", report.audit, comment)
        if emit_positions:
            report.paths["positions"] = outputs.write_positions(
                out / "positions.csv", report.position_rows, comment)
    if not keep_records and not emit_trace:
        report.records = None
    return report
