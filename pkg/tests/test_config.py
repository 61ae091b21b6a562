"""Config loading, precedence, and validation."""
import pytest

from qsched.config import (ParseError, ScenarioConfig, ValidationError,
                           load_config, parse_override, validate)
from qsched.scheduler import ServiceClass


def test_defaults_are_valid_and_stable():
    cfg = load_config(None, [])
    assert cfg == ScenarioConfig()
    assert cfg.nodes == 10
    assert cfg.sim_time_s == 100.0
    assert cfg.service_class() is ServiceClass.ERTPS
    assert cfg.offered_rate_bps() == 458_000
    assert cfg.sim_end() == 100_000_000


def test_kv_file_with_comments(tmp_path):
    p = tmp_path / "scen.conf"
    p.write_text("""
# five nodes only
nodes = 5
qos_class = rtPS
speed_kmh = 30
nrtps_contention = yes
""")
    cfg = load_config(p)
    assert cfg.nodes == 5
    assert cfg.service_class() is ServiceClass.RTPS
    assert cfg.speed_kmh == 30.0
    assert cfg.nrtps_contention is True


def test_json_file(tmp_path):
    p = tmp_path / "scen.json"
    p.write_text('{"nodes": 4, "frame_bytes_cv": 0.2, "qos_class": "BE"}')
    cfg = load_config(p)
    assert cfg.nodes == 4
    assert cfg.frame_bytes_cv == 0.2
    assert cfg.service_class() is ServiceClass.BE


def test_override_precedence_file_then_cli(tmp_path):
    p = tmp_path / "scen.conf"
    p.write_text("nodes = 5\nspeed_kmh = 30\n")
    cfg = load_config(p, ["nodes=7"])
    assert cfg.nodes == 7          # CLI wins over file
    assert cfg.speed_kmh == 30.0   # file wins over default


def test_unknown_key_rejected(tmp_path):
    with pytest.raises(ValidationError, match="unknown config key"):
        load_config(None, ["node_count=5"])
    p = tmp_path / "bad.conf"
    p.write_text("warp_factor = 9\n")
    with pytest.raises(ValidationError):
        load_config(p)


def test_malformed_inputs_are_parse_errors(tmp_path):
    p = tmp_path / "bad.conf"
    p.write_text("nodes 5\n")
    with pytest.raises(ParseError):
        load_config(p)
    q = tmp_path / "bad.json"
    q.write_text("{nodes: 5")
    with pytest.raises(ParseError):
        load_config(q)
    with pytest.raises(ParseError):
        parse_override("no-equals-sign")
    with pytest.raises(ParseError):
        load_config(tmp_path / "missing.conf")


def test_type_errors_are_loud():
    with pytest.raises(ValidationError, match="nodes"):
        load_config(None, ["nodes=many"])
    with pytest.raises(ValidationError, match="frame_bytes_cv"):
        load_config(None, ["frame_bytes_cv=llama"])
    with pytest.raises(ValidationError, match="nrtps_contention"):
        load_config(None, ["nrtps_contention=maybe"])


@pytest.mark.parametrize("override", [
    "nodes=0",
    "fps=0",
    "frame_bytes_cv=1.5",
    "frame_bytes_cv=-0.1",
    "sim_time_s=-1",
    "channel_rate_bps=0",
    "qos_class=turbo",
    "rtps_poll_interval_us=7777",        # not a multiple of the frame
    "nrtps_poll_interval_us=2500",       # shorter than one frame
    "contention_window_cap_slots=8",     # below the initial window
    "load_step_factor=0",
    "queue_capacity_pkts=0",
])
def test_out_of_range_values_rejected(override):
    with pytest.raises(ValidationError):
        load_config(None, [override])


def test_frame_must_fit_one_mtu_packet():
    # 1 ms at 1 Mb/s is 125 B: no MTU-sized packet could ever leave
    with pytest.raises(ValidationError, match="capacity"):
        load_config(None, ["channel_rate_bps=1000000", "frame_duration_us=1000"])


def test_class_names_parse_case_insensitively():
    for text, want in [("ugs", ServiceClass.UGS), ("ErtPS", ServiceClass.ERTPS),
                       ("RTPS", ServiceClass.RTPS), ("nrtps", ServiceClass.NRTPS),
                       ("be", ServiceClass.BE)]:
        assert ServiceClass.parse(text) is want
    with pytest.raises(ValueError):
        ServiceClass.parse("gold-tier")


def test_scheduler_params_view():
    cfg = load_config(None, ["rtps_poll_interval_us=25000"])
    p = cfg.scheduler_params()
    assert p.rtps_poll_frames == 5
    assert p.nrtps_poll_frames == 200
    assert p.frame_capacity_bytes() == 6250


def test_boolean_words(tmp_path):
    for word, want in [("true", True), ("off", False), ("1", True), ("no", False)]:
        cfg = load_config(None, [f"nrtps_contention={word}"])
        assert cfg.nrtps_contention is want


def test_to_dict_round_trips():
    cfg = load_config(None, ["nodes=3", "qos_class=UGS"])
    d = cfg.to_dict()
    rebuilt = load_config(None, [f"{k}={v}" for k, v in d.items()])
    assert rebuilt == cfg
