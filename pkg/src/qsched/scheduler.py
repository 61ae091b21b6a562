"""Frame-based uplink scheduling: five service classes sharing one channel.

Every frame the coordinator builds a grant map in strict class priority order
(UGS > ertPS > rtPS > nrtPS > BE), FIFO by connection id within a class:

* UGS gets fixed-size grants at its negotiated period, aligned to the flow's
  source phase.  If backlog remains after a grant (a burst outgrew the fixed
  allocation), the same fixed-size grant repeats on following frames until the
  queue drains; grant size never varies.
* ertPS gets an unsolicited grant each period whose size tracks the backlog
  reported by the piggyback field of the previous grant, clamped to
  [0, max_burst].  A size change therefore takes effect one grant later.
* rtPS is polled with a unicast request opportunity every poll interval; the
  reported backlog is granted starting the next frame, partially if capacity
  is short, with the remainder carried in pending_request.
* nrtPS is polled on a slow cycle (and may optionally contend like BE); its
  allocations are served ahead of BE.
* BE contends: a backlogged flow without a pending request draws a backoff in
  contention slots from a truncated binary exponential window.  Each frame
  carries a few request slots; a slot with exactly one transmitter registers a
  request, two or more in the same slot collide and double every loser's
  window before it redraws.

Grants are expressed in gross bytes (payload capacity plus the per-grant
overhead).  Request regions and grants together never exceed the frame's
uplink capacity; capacity exhaustion defers lower-priority flows.  Packets
leave a queue whole: there is no MAC-level fragmentation, so a grant smaller
than the head packet serves nothing (head-of-line blocking is accepted), and
unused grant bytes are wasted.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple

from .engine import RngStream, SECOND, SimTime
from .mobility import NeighborSnapshot
from .traffic import Packet


class ServiceClass(Enum):
    """Uplink service classes, in strict priority order (UGS served first)."""
    UGS = 0
    ERTPS = 1
    RTPS = 2
    NRTPS = 3
    BE = 4

    @property
    def rank(self) -> int:
        return self.value

    @property
    def display(self) -> str:
        return _DISPLAY[self]

    @classmethod
    def parse(cls, text: str) -> "ServiceClass":
        key = text.strip().lower()
        for member, name in _DISPLAY.items():
            if key == name.lower():
                return member
        raise ValueError(f"unknown service class {text!r}; expected one of "
                         f"{', '.join(n for n in _DISPLAY.values())}")


_DISPLAY = {
    ServiceClass.UGS: "UGS",
    ServiceClass.ERTPS: "ertPS",
    ServiceClass.RTPS: "rtPS",
    ServiceClass.NRTPS: "nrtPS",
    ServiceClass.BE: "BE",
}

PRIORITY_ORDER = (ServiceClass.UGS, ServiceClass.ERTPS, ServiceClass.RTPS,
                  ServiceClass.NRTPS, ServiceClass.BE)


@dataclass
class SchedulerParams:
    frame_duration_us: int = 5000
    channel_rate_bps: int = 10_000_000
    mtu: int = 1500
    packet_overhead: int = 10
    request_overhead: int = 6
    grant_overhead: int = 6
    queue_capacity: int = 500
    ugs_period_frames: int = 8
    ertps_period_frames: int = 1
    ertps_max_burst: int = 6000
    rtps_poll_frames: int = 5
    nrtps_poll_frames: int = 200
    nrtps_contention: bool = False
    contention_slots: int = 4
    cw_init: int = 16
    cw_cap: int = 1024
    propagation_us: int = 5
    aes_us: int = 0

    def frame_capacity_bytes(self) -> int:
        """Bytes the uplink carries in one frame at the channel bit rate."""
        return self.channel_rate_bps * self.frame_duration_us // (8 * SECOND)


@dataclass
class ServiceFlow:
    """One uplink connection: its class, queue, and per-policy state."""
    cid: int
    node: int
    svc_class: ServiceClass
    reserved_rate_bps: int = 0
    grant_anchor_frame: int = 0
    poll_anchor_frame: int = 0
    queue_capacity: int = 500
    queue: deque[Packet] = field(default_factory=deque)
    queued_bytes: int = 0
    pending_request: int = 0
    ertps_next_size: int = 0
    ugs_carry: bool = False
    backoff: int | None = None
    cw: int = 16
    drops: int = 0
    enqueued: int = 0

    def enqueue(self, pkt: Packet) -> bool:
        """Append to the FIFO; a full queue drops the newest packet."""
        if len(self.queue) >= self.queue_capacity:
            self.drops += 1
            return False
        self.queue.append(pkt)
        self.queued_bytes += pkt.size
        self.enqueued += 1
        return True


class GrantEntry(NamedTuple):
    cid: int
    granted_bytes: int  # gross: payload capacity + per-grant overhead


class BandwidthRequestVia(Enum):
    UNICAST_POLL = "unicast_poll"
    PIGGYBACK = "piggyback"
    CONTENTION = "contention"


@dataclass(frozen=True)
class BandwidthRequest:
    cid: int
    bytes: int          # the flow's queued bytes at issue time
    issued_at: SimTime
    via: BandwidthRequestVia


@dataclass
class GrantMap:
    """One frame's uplink allocation: request regions first, then data grants."""
    frame_idx: int
    capacity_bytes: int
    entries: list[GrantEntry]
    polled: list[int]            # cids given a unicast request opportunity
    contention_bytes: int        # bytes reserved for the contention region
    region_bytes: int            # total request-region bytes (polls + contention)
    used_bytes: int              # regions + all gross grants


@dataclass
class AuditRow:
    """One allocator decision, for the grant audit trail."""
    frame_idx: int
    cid: int
    svc_class: ServiceClass
    requested_bytes: int
    granted_bytes: int
    queue_bytes: int


class UplinkScheduler:
    """Coordinator-side allocator plus per-frame service and request handling."""

    def __init__(self, params: SchedulerParams, flows: list[ServiceFlow],
                 contention_rng: RngStream | None = None,
                 audit: list[AuditRow] | None = None) -> None:
        self.params = params
        self.flows = sorted(flows, key=lambda f: f.cid)
        self.flow_by_cid = {f.cid: f for f in self.flows}
        if len(self.flow_by_cid) != len(self.flows):
            raise ValueError("connection ids must be unique")
        self.by_class = {cls: [f for f in self.flows if f.svc_class is cls]
                         for cls in PRIORITY_ORDER}
        self.capacity = params.frame_capacity_bytes()
        self.rng = contention_rng
        self.audit = audit
        self.poll_counts: dict[int, int] = {f.cid: 0 for f in self.flows}
        self.requests_log: list[BandwidthRequest] = []
        self.contention_attempts = 0
        self.contention_collisions = 0
        self.contention_pool = self._contention_flows()
        if self.contention_pool and self.rng is None:
            raise ValueError("contention-capable flows need a contention rng")
        for f in self.flows:
            f.cw = params.cw_init

    # ---- sizing helpers ----

    def rate_grant_usable(self, flow: ServiceFlow, period_frames: int) -> int:
        """ceil(reserved_rate * frame_duration * period / 8) in bytes."""
        bits = flow.reserved_rate_bps * self.params.frame_duration_us * period_frames
        return -(-bits // (8 * SECOND))

    def ugs_grant(self, flow: ServiceFlow, frame_idx: int) -> int:
        """Gross bytes of the periodic fixed grant; 0 off the period boundary."""
        if (frame_idx - flow.grant_anchor_frame) % self.params.ugs_period_frames != 0:
            return 0
        return self.rate_grant_usable(flow, self.params.ugs_period_frames) \
            + self.params.grant_overhead

    def _drain_cost(self, flow: ServiceFlow) -> int:
        """Grant bytes needed to empty the queue (payload + per-packet overhead)."""
        return flow.queued_bytes + self.params.packet_overhead * len(flow.queue)

    def _request_allowance(self, requested: int) -> int:
        """Per-packet overhead allowance added when turning a request into a grant."""
        if requested <= 0:
            return 0
        return self.params.packet_overhead * math.ceil(requested / self.params.mtu)

    def _contention_flows(self) -> list[ServiceFlow]:
        flows = list(self.by_class[ServiceClass.BE])
        if self.params.nrtps_contention:
            flows += self.by_class[ServiceClass.NRTPS]
        return sorted(flows, key=lambda f: f.cid)

    # ---- per-frame pipeline ----

    def build_grant_map(self, frame_idx: int, snapshot: NeighborSnapshot | None) -> GrantMap:
        p = self.params
        reach = snapshot.reachable if snapshot is not None else frozenset()
        used = 0
        polled: list[int] = []

        # Unicast request opportunities come first in the frame.
        for cls, interval in ((ServiceClass.RTPS, p.rtps_poll_frames),
                              (ServiceClass.NRTPS, p.nrtps_poll_frames)):
            for f in self.by_class[cls]:
                if f.node not in reach:
                    continue
                if frame_idx >= f.poll_anchor_frame and \
                        (frame_idx - f.poll_anchor_frame) % interval == 0 and \
                        used + p.request_overhead <= self.capacity:
                    used += p.request_overhead
                    polled.append(f.cid)
                    self.poll_counts[f.cid] += 1

        contention_bytes = 0
        if self.contention_pool:
            want = p.contention_slots * p.request_overhead
            if used + want <= self.capacity:
                contention_bytes = want
                used += contention_bytes
        region_bytes = used

        entries: list[GrantEntry] = []
        for cls in PRIORITY_ORDER:
            for f in self.by_class[cls]:
                if f.node not in reach:
                    if cls is ServiceClass.UGS and self._ugs_due(f, frame_idx):
                        f.ugs_carry = True
                    continue
                if cls is ServiceClass.UGS:
                    used = self._alloc_ugs(f, frame_idx, used, entries)
                elif cls is ServiceClass.ERTPS:
                    used = self._alloc_ertps(f, frame_idx, used, entries)
                else:
                    used = self._alloc_requested(f, frame_idx, used, entries)

        if used > self.capacity:
            raise AssertionError(
                f"frame {frame_idx} oversubscribed: {used} > {self.capacity}")
        return GrantMap(frame_idx=frame_idx, capacity_bytes=self.capacity,
                        entries=entries, polled=polled,
                        contention_bytes=contention_bytes,
                        region_bytes=region_bytes, used_bytes=used)

    def _ugs_due(self, f: ServiceFlow, frame_idx: int) -> bool:
        return (frame_idx - f.grant_anchor_frame) % self.params.ugs_period_frames == 0

    def _alloc_ugs(self, f: ServiceFlow, frame_idx: int, used: int,
                   entries: list[GrantEntry]) -> int:
        if not (self._ugs_due(f, frame_idx) or f.ugs_carry):
            return used
        gross = self.rate_grant_usable(f, self.params.ugs_period_frames) \
            + self.params.grant_overhead
        if used + gross <= self.capacity:
            entries.append(GrantEntry(f.cid, gross))
            self._audit(frame_idx, f, gross, gross)
            f.ugs_carry = False
            return used + gross
        # No room this frame: retry on the next one, size unchanged.
        f.ugs_carry = True
        self._audit(frame_idx, f, gross, 0)
        return used

    def _alloc_ertps(self, f: ServiceFlow, frame_idx: int, used: int,
                     entries: list[GrantEntry]) -> int:
        p = self.params
        if (frame_idx - f.grant_anchor_frame) % p.ertps_period_frames != 0:
            return used
        need = min(max(f.ertps_next_size, 0), p.ertps_max_burst)
        avail = self.capacity - used
        if avail < p.grant_overhead:
            return used
        usable = min(need, avail - p.grant_overhead)
        gross = usable + p.grant_overhead
        # A zero-need grant still goes out: it carries the piggyback field.
        entries.append(GrantEntry(f.cid, gross))
        self._audit(frame_idx, f, need, gross)
        return used + gross

    def _alloc_requested(self, f: ServiceFlow, frame_idx: int, used: int,
                         entries: list[GrantEntry]) -> int:
        p = self.params
        if f.pending_request <= 0:
            return used
        want = f.pending_request + self._request_allowance(f.pending_request)
        avail = self.capacity - used
        if avail <= p.grant_overhead:
            self._audit(frame_idx, f, f.pending_request, 0)
            return used
        usable = min(want, avail - p.grant_overhead)
        gross = usable + p.grant_overhead
        entries.append(GrantEntry(f.cid, gross))
        self._audit(frame_idx, f, f.pending_request, gross)
        return used + gross

    def _audit(self, frame_idx: int, f: ServiceFlow, requested: int, granted: int) -> None:
        if self.audit is not None:
            self.audit.append(AuditRow(frame_idx, f.cid, f.svc_class,
                                       requested, granted, f.queued_bytes))

    # ---- service ----

    def tx_us(self, nbytes: int) -> int:
        """Serialization time of nbytes at the channel bit rate, in ticks."""
        return round(nbytes * 8 * SECOND / self.params.channel_rate_bps)

    def serve_grant(self, flow: ServiceFlow, usable: int, frame_start: SimTime,
                    region_start_bytes: int) -> list[Packet]:
        """Drain whole packets from the FIFO head into a grant region.

        Each packet costs size + per-packet overhead against the usable grant
        bytes and stamps t_st at its serialization offset within the frame.
        """
        p = self.params
        served: list[Packet] = []
        spent = 0
        while flow.queue and spent + flow.queue[0].size + p.packet_overhead <= usable:
            pkt = flow.queue.popleft()
            pkt.t_st = frame_start + self.tx_us(region_start_bytes + spent)
            spent += pkt.size + p.packet_overhead
            flow.queued_bytes -= pkt.size
            served.append(pkt)
        return served

    def transmit(self, pkts: list[Packet], node: int,
                 snapshot: NeighborSnapshot | None) -> list[tuple[Packet, bool]]:
        """Deliver packets if the node is in the current snapshot, else drop.

        Delivery is gated by the (possibly stale) snapshot, not true position.
        Delivered packets get t_rx = t_st + serialization + propagation (+ the
        optional fixed crypto delay); the downlink hop to the sink is treated
        as instantaneous.
        """
        p = self.params
        reachable = snapshot is not None and node in snapshot.reachable
        out: list[tuple[Packet, bool]] = []
        for pkt in pkts:
            if reachable:
                pkt.t_rx = pkt.t_st + self.tx_us(pkt.size) + p.propagation_us + p.aes_us
                out.append((pkt, True))
            else:
                out.append((pkt, False))
        return out

    def serve_frame(self, gm: GrantMap, snapshot: NeighborSnapshot | None,
                    frame_start: SimTime) -> list[tuple[Packet, bool]]:
        """Serve every grant entry in map order and return (packet, delivered)."""
        p = self.params
        results: list[tuple[Packet, bool]] = []
        cursor = gm.region_bytes
        for entry in gm.entries:
            f = self.flow_by_cid[entry.cid]
            usable = max(0, entry.granted_bytes - p.grant_overhead)
            served = self.serve_grant(f, usable, frame_start, cursor)
            cursor += entry.granted_bytes
            results.extend(self.transmit(served, f.node, snapshot))
            if f.svc_class in (ServiceClass.RTPS, ServiceClass.NRTPS, ServiceClass.BE):
                payload = sum(pkt.size for pkt in served)
                f.pending_request = max(0, f.pending_request - payload)
            if f.svc_class is ServiceClass.ERTPS:
                # Piggyback: report the grant bytes needed to drain what is
                # queued right now; takes effect at the next grant.
                f.ertps_next_size = self._drain_cost(f)
            elif f.svc_class is ServiceClass.UGS:
                f.ugs_carry = len(f.queue) > 0
        return results

    def end_frame(self, gm: GrantMap, frame_start: SimTime,
                  snapshot: NeighborSnapshot | None) -> None:
        """Process this frame's request regions: poll responses, then contention."""
        for cid in gm.polled:
            f = self.flow_by_cid[cid]
            f.pending_request = f.queued_bytes
            self.requests_log.append(BandwidthRequest(
                cid, f.queued_bytes, frame_start, BandwidthRequestVia.UNICAST_POLL))
        if gm.contention_bytes > 0:
            reach = snapshot.reachable if snapshot is not None else frozenset()
            self._contention_step(reach, frame_start)

    def _contention_step(self, reach: frozenset[int], now: SimTime) -> None:
        """Resolve one frame's contention slots.

        Backoff counts request slots; a flow whose counter lands inside this
        frame's slot range transmits in that slot.  A slot with one transmitter
        registers the request; with two or more every transmitter doubles its
        window (up to the cap) and redraws.  Everyone else counts down by the
        frame's slot count; newly backlogged flows draw a fresh backoff.
        Unreachable nodes freeze: they neither transmit nor count down.
        """
        p = self.params
        eligible = self.contention_pool
        # A queued request becomes moot if the queue drained or a poll already
        # registered the backlog.
        for f in eligible:
            if f.backoff is not None and (f.queued_bytes == 0 or f.pending_request > 0):
                f.backoff = None
        slots: dict[int, list[ServiceFlow]] = {}
        for f in eligible:
            if f.backoff is not None and f.backoff < p.contention_slots \
                    and f.node in reach:
                slots.setdefault(f.backoff, []).append(f)
        resolved: set[int] = set()
        for slot in sorted(slots):
            group = slots[slot]
            resolved.update(f.cid for f in group)
            self.contention_attempts += len(group)
            if len(group) == 1:
                f = group[0]
                f.pending_request = f.queued_bytes
                f.backoff = None
                f.cw = p.cw_init
                self.requests_log.append(BandwidthRequest(
                    f.cid, f.queued_bytes, now, BandwidthRequestVia.CONTENTION))
            else:
                self.contention_collisions += len(group)
                for f in group:
                    f.cw = min(f.cw * 2, p.cw_cap)
                    f.backoff = self.rng.randrange(f.cw)
        for f in eligible:
            if f.cid in resolved:
                continue
            if f.backoff is not None and f.backoff >= p.contention_slots \
                    and f.node in reach:
                f.backoff -= p.contention_slots
        for f in eligible:
            if f.backoff is None and f.pending_request == 0 and f.queued_bytes > 0:
                f.backoff = self.rng.randrange(f.cw)
