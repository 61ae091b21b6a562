"""Constant-bitrate video sources: periodic frames, fragmented to MTU-sized packets.

Each source emits one application frame every 1/fps seconds starting at its
start time.  Frame sizes are either exactly the configured mean (cv = 0) or
drawn from a normal distribution truncated to [1, 2*mean], which keeps the
offered load centred on fps * mean * 8 bits/s.  Frames larger than the MTU are
fragmented; transport is fire-and-forget, so packets carry no sequencing state
beyond their ids.
"""
from __future__ import annotations

from dataclasses import dataclass

from .engine import RngStream, SECOND, SimTime


@dataclass
class VideoSourceConfig:
    fps: int = 25
    frame_bytes_mean: int = 2290
    frame_bytes_cv: float = 0.0
    start_time: SimTime = 2 * SECOND
    mtu: int = 1500
    # Optional step change in offered load: frames emitted at or after
    # step_time use mean * step_factor.  step_time None disables the step.
    step_time: SimTime | None = None
    step_factor: float = 1.0

    def offered_rate_bps(self) -> float:
        return self.fps * self.frame_bytes_mean * 8.0


@dataclass
class Packet:
    pkt_id: int
    flow: int
    size: int
    t_gen: SimTime
    t_st: SimTime | None = None
    t_rx: SimTime | None = None


def frame_time(cfg: VideoSourceConfig, k: int) -> SimTime:
    """Emission time of the k-th frame (k >= 0)."""
    return cfg.start_time + round(k * SECOND / cfg.fps)


def frame_size(cfg: VideoSourceConfig, at: SimTime, rng: RngStream) -> int:
    """Frame size in bytes for a frame emitted at time `at`."""
    mean = cfg.frame_bytes_mean
    if cfg.step_time is not None and at >= cfg.step_time:
        mean = max(1, round(mean * cfg.step_factor))
    if cfg.frame_bytes_cv <= 0.0:
        return mean
    drawn = rng.normal(mean, cfg.frame_bytes_cv * mean)
    return min(max(1, round(drawn)), 2 * mean)


def fragment(frame_bytes: int, mtu: int, t_gen: SimTime, flow: int,
             first_pkt_id: int) -> list[Packet]:
    """Split one application frame into ceil(frame/mtu) packets.

    Every fragment except the last has size == mtu; an exact multiple yields
    all-mtu fragments.  All fragments share the frame's generation time.
    """
    if frame_bytes < 1:
        raise ValueError(f"frame size must be >= 1 byte, got {frame_bytes}")
    if mtu < 1:
        raise ValueError(f"mtu must be >= 1 byte, got {mtu}")
    pkts = []
    remaining = frame_bytes
    pkt_id = first_pkt_id
    while remaining > 0:
        size = min(mtu, remaining)
        pkts.append(Packet(pkt_id=pkt_id, flow=flow, size=size, t_gen=t_gen))
        remaining -= size
        pkt_id += 1
    return pkts
