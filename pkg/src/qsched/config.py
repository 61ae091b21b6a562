"""Scenario configuration: defaults, file loading, and CLI overrides.

Precedence is defaults < config file < command-line overrides.  Files may be
JSON (a single object) or flat ``key = value`` lines with ``#`` comments.
Keys match the ScenarioConfig field names exactly; unknown keys are rejected
rather than ignored so typos fail loudly.
"""
from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path

from .engine import SECOND, ticks
from .scheduler import SchedulerParams, ServiceClass


class ConfigError(Exception):
    """Base class for configuration problems."""


class ParseError(ConfigError):
    """A config file or override string could not be parsed."""


class ValidationError(ConfigError):
    """A parsed value is out of range, mistyped, or the key is unknown."""


@dataclass
class ScenarioConfig:
    # topology / mobility
    nodes: int = 10
    arena_width_m: float = 1000.0
    arena_height_m: float = 1000.0
    speed_kmh: float = 50.0
    radio_range_m: float = 750.0
    refresh_interval_s: float = 2.0
    # run control
    sim_time_s: float = 100.0
    master_seed: int = 42
    qos_class: str = "ertPS"
    # application traffic
    fps: int = 25
    frame_bytes_mean: int = 2290
    frame_bytes_cv: float = 0.1
    app_start_s: float = 2.0
    mtu_bytes: int = 1500
    load_step_time_s: float = 0.0       # 0 disables the step
    load_step_factor: float = 1.0
    # channel / MAC
    channel_rate_bps: int = 10_000_000
    frame_duration_us: int = 5000
    packet_overhead_bytes: int = 10
    request_overhead_bytes: int = 6
    grant_overhead_bytes: int = 6
    queue_capacity_pkts: int = 500
    propagation_delay_us: int = 5
    aes_delay_us: int = 0
    # per-class policy knobs
    reserved_rate_bps: int = 311_200
    ugs_grant_period_frames: int = 8
    ertps_grant_period_frames: int = 1
    ertps_max_burst_bytes: int = 6000
    rtps_poll_interval_us: int = 25_000
    nrtps_poll_interval_us: int = 1_000_000
    nrtps_contention: bool = False
    contention_slots_per_frame: int = 4
    contention_window_slots: int = 16
    contention_window_cap_slots: int = 1024

    # ---- derived views ----

    def sim_end(self) -> int:
        return ticks(self.sim_time_s)

    def speed_mps(self) -> float:
        return self.speed_kmh / 3.6

    def offered_rate_bps(self) -> float:
        """Per-flow application rate before overhead: fps * mean frame bits."""
        return self.fps * self.frame_bytes_mean * 8

    def service_class(self) -> ServiceClass:
        return ServiceClass.parse(self.qos_class)

    def scheduler_params(self) -> SchedulerParams:
        return SchedulerParams(
            frame_duration_us=self.frame_duration_us,
            channel_rate_bps=self.channel_rate_bps,
            mtu=self.mtu_bytes,
            packet_overhead=self.packet_overhead_bytes,
            request_overhead=self.request_overhead_bytes,
            grant_overhead=self.grant_overhead_bytes,
            queue_capacity=self.queue_capacity_pkts,
            ugs_period_frames=self.ugs_grant_period_frames,
            ertps_period_frames=self.ertps_grant_period_frames,
            ertps_max_burst=self.ertps_max_burst_bytes,
            rtps_poll_frames=self.rtps_poll_interval_us // self.frame_duration_us,
            nrtps_poll_frames=self.nrtps_poll_interval_us // self.frame_duration_us,
            nrtps_contention=self.nrtps_contention,
            contention_slots=self.contention_slots_per_frame,
            cw_init=self.contention_window_slots,
            cw_cap=self.contention_window_cap_slots,
            propagation_us=self.propagation_delay_us,
            aes_us=self.aes_delay_us,
        )

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


_FIELDS = {f.name: f for f in dataclasses.fields(ScenarioConfig)}
_BOOL_WORDS = {"true": True, "yes": True, "on": True, "1": True,
               "false": False, "no": False, "off": False, "0": False}


def _coerce(key: str, raw: object) -> object:
    """Coerce a raw value (string or JSON scalar) to the field's type."""
    f = _FIELDS[key]
    want = f.type if isinstance(f.type, type) else {"int": int, "float": float,
                                                    "str": str, "bool": bool}[f.type]
    if want is bool:
        if isinstance(raw, bool):
            return raw
        if isinstance(raw, str) and raw.strip().lower() in _BOOL_WORDS:
            return _BOOL_WORDS[raw.strip().lower()]
        raise ValidationError(f"{key}: expected a boolean, got {raw!r}")
    if want is int:
        if isinstance(raw, bool):
            raise ValidationError(f"{key}: expected an integer, got {raw!r}")
        if isinstance(raw, int):
            return raw
        if isinstance(raw, float) and raw.is_integer():
            return int(raw)
        if isinstance(raw, str):
            try:
                return int(raw.strip().replace("_", ""), 0)
            except ValueError:
                raise ValidationError(f"{key}: expected an integer, got {raw!r}") from None
        raise ValidationError(f"{key}: expected an integer, got {raw!r}")
    if want is float:
        if isinstance(raw, bool):
            raise ValidationError(f"{key}: expected a number, got {raw!r}")
        if isinstance(raw, (int, float)):
            return float(raw)
        if isinstance(raw, str):
            try:
                return float(raw.strip())
            except ValueError:
                raise ValidationError(f"{key}: expected a number, got {raw!r}") from None
        raise ValidationError(f"{key}: expected a number, got {raw!r}")
    if want is str:
        if isinstance(raw, str):
            return raw.strip()
        raise ValidationError(f"{key}: expected a string, got {raw!r}")
    raise ValidationError(f"{key}: unsupported field type {want}")


def validate(cfg: ScenarioConfig) -> ScenarioConfig:
    """Range-check every field; raises ValidationError on the first problem."""
    def positive(name: str, value, strict: bool = True) -> None:
        if (value <= 0) if strict else (value < 0):
            bound = "positive" if strict else "non-negative"
            raise ValidationError(f"{name} must be {bound}, got {value}")

    positive("nodes", cfg.nodes)
    positive("arena_width_m", cfg.arena_width_m)
    positive("arena_height_m", cfg.arena_height_m)
    positive("speed_kmh", cfg.speed_kmh, strict=False)
    positive("radio_range_m", cfg.radio_range_m, strict=False)
    positive("refresh_interval_s", cfg.refresh_interval_s)
    positive("sim_time_s", cfg.sim_time_s, strict=False)
    positive("fps", cfg.fps)
    positive("frame_bytes_mean", cfg.frame_bytes_mean)
    if not 0.0 <= cfg.frame_bytes_cv <= 1.0:
        raise ValidationError(
            f"frame_bytes_cv must be in [0, 1], got {cfg.frame_bytes_cv}")
    positive("app_start_s", cfg.app_start_s, strict=False)
    positive("mtu_bytes", cfg.mtu_bytes)
    positive("load_step_time_s", cfg.load_step_time_s, strict=False)
    positive("load_step_factor", cfg.load_step_factor)
    positive("channel_rate_bps", cfg.channel_rate_bps)
    positive("frame_duration_us", cfg.frame_duration_us)
    positive("packet_overhead_bytes", cfg.packet_overhead_bytes, strict=False)
    positive("request_overhead_bytes", cfg.request_overhead_bytes, strict=False)
    positive("grant_overhead_bytes", cfg.grant_overhead_bytes, strict=False)
    positive("queue_capacity_pkts", cfg.queue_capacity_pkts)
    positive("propagation_delay_us", cfg.propagation_delay_us, strict=False)
    positive("aes_delay_us", cfg.aes_delay_us, strict=False)
    positive("reserved_rate_bps", cfg.reserved_rate_bps, strict=False)
    positive("ugs_grant_period_frames", cfg.ugs_grant_period_frames)
    positive("ertps_grant_period_frames", cfg.ertps_grant_period_frames)
    positive("ertps_max_burst_bytes", cfg.ertps_max_burst_bytes, strict=False)
    positive("contention_slots_per_frame", cfg.contention_slots_per_frame)
    positive("contention_window_slots", cfg.contention_window_slots)
    if cfg.contention_window_cap_slots < cfg.contention_window_slots:
        raise ValidationError(
            "contention_window_cap_slots must be >= contention_window_slots")
    for name in ("rtps_poll_interval_us", "nrtps_poll_interval_us"):
        interval = getattr(cfg, name)
        if interval < cfg.frame_duration_us or interval % cfg.frame_duration_us:
            raise ValidationError(
                f"{name} must be a positive multiple of frame_duration_us "
                f"({cfg.frame_duration_us}), got {interval}")
    try:
        cfg.service_class()
    except ValueError as exc:
        raise ValidationError(str(exc)) from None
    cap = cfg.channel_rate_bps * cfg.frame_duration_us // (8 * SECOND)
    if cap < cfg.mtu_bytes + cfg.packet_overhead_bytes + cfg.grant_overhead_bytes:
        raise ValidationError(
            f"frame capacity {cap}B cannot carry one MTU packet plus overhead")
    return cfg


def parse_override(text: str) -> tuple[str, str]:
    """Split one ``key=value`` override string."""
    if "=" not in text:
        raise ParseError(f"override {text!r} is not of the form key=value")
    key, _, value = text.partition("=")
    key, value = key.strip(), value.strip()
    if not key or not value:
        raise ParseError(f"override {text!r} is not of the form key=value")
    return key, value


def _parse_kv_file(text: str, path: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ParseError(f"{path}:{lineno}: expected key = value, got {line!r}")
        key, _, value = stripped.partition("=")
        out[key.strip()] = value.strip()
    return out


def load_config(path: str | Path | None = None,
                overrides: list[str] | None = None) -> ScenarioConfig:
    """Build a validated config from defaults, an optional file, and overrides."""
    merged: dict[str, object] = {}
    if path is not None:
        p = Path(path)
        try:
            text = p.read_text()
        except OSError as exc:
            raise ParseError(f"cannot read config file {p}: {exc}") from None
        if text.lstrip().startswith("{"):
            try:
                data = json.loads(text)
            except json.JSONDecodeError as exc:
                raise ParseError(f"{p}: invalid JSON: {exc}") from None
            if not isinstance(data, dict):
                raise ParseError(f"{p}: top-level JSON value must be an object")
            merged.update(data)
        else:
            merged.update(_parse_kv_file(text, str(p)))
    for item in overrides or []:
        key, value = parse_override(item)
        merged[key] = value
    cfg = ScenarioConfig()
    for key, raw in merged.items():
        if key not in _FIELDS:
            raise ValidationError(f"unknown config key {key!r}")
        setattr(cfg, key, _coerce(key, raw))
    return validate(cfg)
