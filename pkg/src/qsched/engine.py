"""Discrete-event core: integer-microsecond clock, ordered event queue, seeded RNG streams."""
from __future__ import annotations

import hashlib
import heapq
import random
from dataclasses import dataclass
from enum import Enum, auto
from typing import Any, Callable

# ---- Virtual time ----
# All simulation timestamps are integer microsecond ticks.  Using ints keeps
# event ordering exact and output files byte-stable across platforms.
SimTime = int

US = 1
MS = 1_000
SECOND = 1_000_000


def ticks(seconds: float) -> SimTime:
    """Convert seconds to integer microsecond ticks (round half to even)."""
    return round(seconds * SECOND)


class SchedulingInPast(Exception):
    """An event was scheduled with fire_at earlier than the current clock."""


class InvalidRange(Exception):
    """A random draw was requested over an empty interval (lo > hi)."""


class EventKind(Enum):
    FRAME_BOUNDARY = auto()
    PACKET_ARRIVAL = auto()
    WAYPOINT_REACHED = auto()
    NEIGHBOR_REFRESH = auto()
    POLL_DUE = auto()
    CONTENTION_SLOT = auto()
    SIM_END = auto()


@dataclass
class Event:
    """A scheduled occurrence.  seq breaks fire_at ties in insertion order."""
    fire_at: SimTime
    seq: int
    kind: EventKind
    payload: Any = None


class Simulator:
    """Event queue plus clock.  Events fire in (fire_at, seq) order.

    Handlers are registered per EventKind; events of a kind with no handler
    are popped and counted but otherwise ignored, which keeps the core usable
    on its own in tests.
    """

    def __init__(self) -> None:
        self.now: SimTime = 0
        self._heap: list[tuple[SimTime, int, Event]] = []
        self._seq = 0
        self._handlers: dict[EventKind, Callable[[Event], None]] = {}

    def register(self, kind: EventKind, handler: Callable[[Event], None]) -> None:
        self._handlers[kind] = handler

    def schedule(self, fire_at: SimTime, kind: EventKind, payload: Any = None) -> Event:
        if fire_at < self.now:
            raise SchedulingInPast(
                f"cannot schedule {kind.name} at {fire_at} (clock is {self.now})")
        ev = Event(fire_at, self._seq, kind, payload)
        self._seq += 1
        heapq.heappush(self._heap, (fire_at, ev.seq, ev))
        return ev

    def pending(self) -> int:
        return len(self._heap)

    def run_until(self, end: SimTime) -> int:
        """Process every event with fire_at <= end; leave later events queued.

        The clock finishes exactly at end even when the queue drains early.
        Returns the number of events processed by this call.
        """
        if end < self.now:
            raise SchedulingInPast(f"cannot run backwards to {end} (clock is {self.now})")
        processed = 0
        heap = self._heap
        while heap and heap[0][0] <= end:
            fire_at, _, ev = heapq.heappop(heap)
            self.now = fire_at
            handler = self._handlers.get(ev.kind)
            if handler is not None:
                handler(ev)
            processed += 1
        self.now = end
        return processed


class RngStream:
    """Named deterministic random substream.

    The underlying generator is seeded from a digest of (master_seed, name),
    so each named stream is independent and reproducible: draws on one stream
    never perturb another, which is what makes paired-seed runs comparable.
    """

    def __init__(self, master_seed: int, name: str) -> None:
        self.name = name
        digest = hashlib.sha256(f"{master_seed}:{name}".encode()).digest()
        self._rng = random.Random(int.from_bytes(digest[:8], "big"))

    def uniform(self, lo: float, hi: float) -> float:
        """Draw from [lo, hi).  A degenerate interval lo == hi returns lo."""
        if lo > hi:
            raise InvalidRange(f"uniform bounds reversed: lo={lo} hi={hi}")
        return lo + self._rng.random() * (hi - lo)

    def normal(self, mean: float, sigma: float) -> float:
        return self._rng.normalvariate(mean, sigma)

    def randrange(self, n: int) -> int:
        """Integer in [0, n)."""
        return self._rng.randrange(n)


class RngStreams:
    """The three substreams a scenario uses, all derived from one master seed."""

    def __init__(self, master_seed: int) -> None:
        self.master_seed = master_seed
        self.mobility = RngStream(master_seed, "mobility")
        self.traffic = RngStream(master_seed, "traffic")
        self.contention = RngStream(master_seed, "contention")
