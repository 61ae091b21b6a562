"""Random-waypoint motion in a bounded arena, with snapshot-based reachability.

Subscriber nodes move between uniformly drawn waypoints at constant speed with
zero pause time.  The coordinator (node 0) sits still at the arena centre and
periodically refreshes a neighbor snapshot; between refreshes the snapshot is
deliberately stale, so reachability changes only become visible at refresh
boundaries.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from .engine import RngStream, SECOND, SimTime

COORDINATOR_ID = 0


class Position(NamedTuple):
    x: float
    y: float


def distance(a: Position, b: Position) -> float:
    return math.hypot(a.x - b.x, a.y - b.y)


def in_range(a: Position, b: Position, radius_m: float) -> bool:
    """Euclidean reachability test, inclusive at exactly radius_m."""
    if radius_m < 0:
        raise ValueError(f"radius must be >= 0, got {radius_m}")
    return distance(a, b) <= radius_m


@dataclass
class Arena:
    width_m: float
    height_m: float

    def center(self) -> Position:
        return Position(self.width_m / 2.0, self.height_m / 2.0)


def pick_waypoint(arena: Arena, rng: RngStream) -> Position:
    """Uniform waypoint inside the arena; x is drawn before y."""
    x = rng.uniform(0.0, arena.width_m)
    y = rng.uniform(0.0, arena.height_m)
    return Position(x, y)


@dataclass
class MobilityState:
    """One node's current leg: straight line from start toward waypoint."""
    node: int
    start: Position
    waypoint: Position
    speed_mps: float
    depart_time: SimTime

    def travel_time(self) -> SimTime | None:
        """Leg duration in ticks (ceiling), or None for a stationary node."""
        if self.speed_mps <= 0.0:
            return None
        dist = distance(self.start, self.waypoint)
        return max(1, math.ceil(dist / self.speed_mps * SECOND))

    def arrival_time(self) -> SimTime | None:
        t = self.travel_time()
        return None if t is None else self.depart_time + t

    def position_at(self, t: SimTime) -> Position:
        """Interpolated position at time t; clamps to the leg's endpoints."""
        if self.speed_mps <= 0.0 or t <= self.depart_time:
            return self.start
        arrival = self.arrival_time()
        if arrival is not None and t >= arrival:
            return self.waypoint
        dist = distance(self.start, self.waypoint)
        if dist == 0.0:
            return self.waypoint
        frac = min(1.0, self.speed_mps * (t - self.depart_time) / SECOND / dist)
        return Position(
            self.start.x + (self.waypoint.x - self.start.x) * frac,
            self.start.y + (self.waypoint.y - self.start.y) * frac,
        )


@dataclass(frozen=True)
class NeighborSnapshot:
    """Reachability as seen at the last refresh; stale in between by design."""
    taken_at: SimTime
    reachable: frozenset[int]


class MobilityModel:
    """Holds all subscriber legs plus the fixed coordinator position."""

    def __init__(self, arena: Arena, speed_mps: float, rng: RngStream,
                 node_ids: list[int]) -> None:
        self.arena = arena
        self.speed_mps = speed_mps
        self.rng = rng
        self.coordinator_pos = arena.center()
        self.states: dict[int, MobilityState] = {}
        for node in node_ids:
            pos = pick_waypoint(arena, rng)
            # Zero-length initial leg; the first WAYPOINT_REACHED event at t=0
            # draws the real first destination.
            self.states[node] = MobilityState(node, pos, pos, speed_mps, 0)

    def start_leg(self, node: int, now: SimTime) -> SimTime | None:
        """Begin a new leg from the current waypoint; returns its arrival time."""
        st = self.states[node]
        st.start = st.waypoint
        st.waypoint = pick_waypoint(self.arena, self.rng)
        st.depart_time = now
        return st.arrival_time()

    def position_at(self, node: int, t: SimTime) -> Position:
        if node == COORDINATOR_ID:
            return self.coordinator_pos
        return self.states[node].position_at(t)

    def refresh(self, now: SimTime, radius_m: float) -> NeighborSnapshot:
        """Rebuild the coordinator's neighbor set from true positions at now."""
        reachable = frozenset(
            node for node, st in self.states.items()
            if in_range(st.position_at(now), self.coordinator_pos, radius_m)
        )
        return NeighborSnapshot(taken_at=now, reachable=reachable)
