"""Per-packet accounting and the derived performance measures.

Timestamps are integer ticks.  Three delays matter:

* transmission delay: t_rx - t_st, the air time of one packet (serialization
  at the channel rate plus propagation and any fixed crypto delay).  It is
  size-dependent but queue-independent.
* end-to-end delay: t_rx - t_gen, which adds the time spent waiting in the
  uplink queue for a grant.  This is what separates the service classes, so
  summaries report it as the headline delay.
* jitter: absolute difference between the end-to-end delays of consecutively
  delivered packets of the same flow.

Throughput is reported both in Mb/s (payload bits only; overhead bytes do not
count) and packets/s.  Time series use fixed bins; a delivery stamped after
the horizon (a grant issued in the final frame) folds into the last bin so
cumulative series end at the true total.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

from .engine import SECOND, SimTime
from .scheduler import ServiceClass


class NotDelivered(Exception):
    """Raised when a delay is requested for a packet that never arrived."""


class InvalidWindow(Exception):
    """Raised for throughput over a non-positive time window."""


class Disposition(Enum):
    DELIVERED = "delivered"
    DROPPED = "dropped"
    QUEUED = "queued"


@dataclass
class PacketRecord:
    """Lifecycle record of one packet, from generation to its final fate."""
    pkt_id: int
    flow: int
    node: int
    svc_class: ServiceClass
    size: int
    t_gen: SimTime
    t_st: SimTime | None = None
    t_rx: SimTime | None = None
    disposition: Disposition = Disposition.QUEUED


def transmission_delay(rec: PacketRecord) -> int:
    if rec.disposition is not Disposition.DELIVERED or rec.t_rx is None or rec.t_st is None:
        raise NotDelivered(f"packet {rec.pkt_id} was not delivered")
    return rec.t_rx - rec.t_st


def end_to_end_delay(rec: PacketRecord) -> int:
    if rec.disposition is not Disposition.DELIVERED or rec.t_rx is None:
        raise NotDelivered(f"packet {rec.pkt_id} was not delivered")
    return rec.t_rx - rec.t_gen


def jitter(delay: int, prev_delay: int) -> int:
    """Absolute delay variation between two consecutive deliveries."""
    return abs(delay - prev_delay)


@dataclass
class FlowStats:
    """Aggregates over one flow's packet records, in delivery order."""
    flow: int
    node: int
    svc_class: ServiceClass
    generated: int = 0
    delivered_packets: int = 0
    delivered_bits: int = 0
    drops: int = 0
    leftover: int = 0            # still queued at the horizon
    delays: list[int] = field(default_factory=list)
    jitter_samples: list[int] = field(default_factory=list)
    tx_delay_total: int = 0

    @classmethod
    def from_records(cls, flow: int, node: int, svc_class: ServiceClass,
                     records: list[PacketRecord]) -> "FlowStats":
        stats = cls(flow=flow, node=node, svc_class=svc_class)
        prev: int | None = None
        for rec in records:
            stats.generated += 1
            if rec.disposition is Disposition.DELIVERED:
                d = end_to_end_delay(rec)
                stats.delivered_packets += 1
                stats.delivered_bits += rec.size * 8
                stats.delays.append(d)
                stats.tx_delay_total += transmission_delay(rec)
                if prev is not None:
                    stats.jitter_samples.append(jitter(d, prev))
                prev = d
            elif rec.disposition is Disposition.DROPPED:
                stats.drops += 1
            else:
                stats.leftover += 1
        return stats

    def mean_delay_us(self) -> float:
        return sum(self.delays) / len(self.delays) if self.delays else 0.0

    def mean_jitter_us(self) -> float:
        if not self.jitter_samples:
            return 0.0
        return sum(self.jitter_samples) / len(self.jitter_samples)

    def mean_tx_delay_us(self) -> float:
        if not self.delivered_packets:
            return 0.0
        return self.tx_delay_total / self.delivered_packets


def throughput(stats: FlowStats, elapsed_s: float) -> tuple[float, float]:
    """(Mb/s, packets/s) of delivered traffic over an elapsed window."""
    if elapsed_s <= 0:
        raise InvalidWindow(f"elapsed window must be positive, got {elapsed_s}")
    return (stats.delivered_bits / elapsed_s / 1e6,
            stats.delivered_packets / elapsed_s)


@dataclass
class TimeSeries:
    bin_us: int
    mode: str                       # "cumulative" or "per_bin"
    points: list[tuple[int, float]]  # (bin end tick, Mb/s)


def throughput_series(records: list[PacketRecord], sim_end: SimTime,
                      bin_us: int = 100_000, mode: str = "cumulative") -> TimeSeries:
    """Delivered-throughput series over fixed bins ending at sim_end.

    Cumulative points divide total bits so far by the bin-end time; per-bin
    points divide each bin's bits by the bin span.  Deliveries stamped past
    sim_end count in the final bin.
    """
    if mode not in ("cumulative", "per_bin"):
        raise ValueError(f"unknown series mode {mode!r}")
    if bin_us <= 0:
        raise InvalidWindow(f"bin width must be positive, got {bin_us}")
    nbins = max(0, math.ceil(sim_end / bin_us))
    bits = [0] * nbins
    if nbins:
        for rec in records:
            if rec.disposition is not Disposition.DELIVERED:
                continue
            idx = min((rec.t_rx - 1) // bin_us, nbins - 1)
            bits[max(idx, 0)] += rec.size * 8
    points: list[tuple[int, float]] = []
    running = 0
    for i in range(nbins):
        start = i * bin_us
        end = min((i + 1) * bin_us, sim_end)
        running += bits[i]
        if mode == "cumulative":
            points.append((end, running / end))   # bits/us == Mb/s
        else:
            points.append((end, bits[i] / (end - start)))
    return TimeSeries(bin_us=bin_us, mode=mode, points=points)


@dataclass
class SummaryRow:
    svc_class: str
    node: str                 # a node id, or "network"
    flows: int
    delivered: int
    dropped: int
    throughput_mbps: float
    throughput_pps: float
    mean_delay_us: float
    mean_jitter_us: float
    mean_tx_delay_us: float
    delivered_bits: int


def _pool(svc_class: str, node: str, group: list[FlowStats], sim_end: SimTime) -> SummaryRow:
    delivered = sum(s.delivered_packets for s in group)
    bits = sum(s.delivered_bits for s in group)
    dropped = sum(s.drops for s in group)
    delay_sum = sum(sum(s.delays) for s in group)
    delay_n = sum(len(s.delays) for s in group)
    jit_sum = sum(sum(s.jitter_samples) for s in group)
    jit_n = sum(len(s.jitter_samples) for s in group)
    tx_sum = sum(s.tx_delay_total for s in group)
    return SummaryRow(
        svc_class=svc_class,
        node=node,
        flows=len(group),
        delivered=delivered,
        dropped=dropped,
        throughput_mbps=bits / sim_end if sim_end > 0 else 0.0,
        throughput_pps=delivered * SECOND / sim_end if sim_end > 0 else 0.0,
        mean_delay_us=delay_sum / delay_n if delay_n else 0.0,
        mean_jitter_us=jit_sum / jit_n if jit_n else 0.0,
        mean_tx_delay_us=tx_sum / delivered if delivered else 0.0,
        delivered_bits=bits,
    )


def summarize(stats: list[FlowStats], sim_end: SimTime,
              group: str = "node") -> list[SummaryRow]:
    """Summary rows per flow, per node, or one pooled network row.

    Pooled means are packet-weighted.  A zero-length run yields zeroed rows
    rather than a division error.
    """
    if group == "network":
        cls = stats[0].svc_class.display if stats else "-"
        if any(s.svc_class is not stats[0].svc_class for s in stats):
            cls = "mixed"
        return [_pool(cls, "network", list(stats), sim_end)]
    if group == "node":
        keys = sorted({s.node for s in stats})
        return [_pool(_class_label([s for s in stats if s.node == k]), str(k),
                      [s for s in stats if s.node == k], sim_end) for k in keys]
    if group == "flow":
        return [_pool(s.svc_class.display, str(s.flow), [s], sim_end)
                for s in sorted(stats, key=lambda s: s.flow)]
    raise ValueError(f"unknown grouping {group!r}")


def _class_label(group: list[FlowStats]) -> str:
    first = group[0].svc_class
    if any(s.svc_class is not first for s in group):
        return "mixed"
    return first.display
