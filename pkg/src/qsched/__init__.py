"""Deterministic discrete-event simulator of frame-based uplink QoS scheduling.

Mobile nodes stream synthetic video to a stationary coordinator over a shared
frame-structured uplink; five service classes (UGS, ertPS, rtPS, nrtPS, BE)
arbitrate the bandwidth.  See README.md for the model and the CLI.
"""
from .config import ConfigError, ParseError, ScenarioConfig, ValidationError, load_config
from .compare import CompareReport, compare_classes
from .engine import (EventKind, RngStream, RngStreams, SECOND, SimTime, Simulator,
                     ticks)
from .metrics import (Disposition, FlowStats, PacketRecord, SummaryRow, TimeSeries,
                      end_to_end_delay, jitter, summarize, throughput,
                      throughput_series, transmission_delay)
from .mobility import Arena, MobilityModel, NeighborSnapshot, Position
from .scheduler import (GrantMap, SchedulerParams, ServiceClass, ServiceFlow,
                        UplinkScheduler)
from .simulation import RunReport, Simulation, run_scenario
from .traffic import Packet, VideoSourceConfig, fragment, frame_size, frame_time

__version__ = "0.1.0"

__all__ = [
    "Arena", "CompareReport", "ConfigError", "Disposition", "EventKind",
    "FlowStats", "GrantMap", "MobilityModel", "NeighborSnapshot", "Packet",
    "PacketRecord", "ParseError", "Position", "RngStream", "RngStreams",
    "RunReport", "ScenarioConfig", "SchedulerParams", "SECOND", "ServiceClass",
    "ServiceFlow", "SimTime", "Simulation", "Simulator", "SummaryRow",
    "TimeSeries", "UplinkScheduler", "ValidationError", "VideoSourceConfig",
    "compare_classes", "end_to_end_delay", "fragment", "frame_size",
    "frame_time", "jitter", "load_config", "run_scenario", "summarize",
    "throughput", "throughput_series", "ticks", "transmission_delay",
]
