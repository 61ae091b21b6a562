"""Video source timing, size draws, and packetization."""
import pytest
from hypothesis import given, strategies as st

from qsched.engine import RngStream, SECOND
from qsched.traffic import VideoSourceConfig, fragment, frame_size, frame_time


def cfg(**kw):
    base = dict(fps=25, frame_bytes_mean=2290, frame_bytes_cv=0.0,
                start_time=2 * SECOND, mtu=1500)
    base.update(kw)
    return VideoSourceConfig(**base)


def test_burst_timing_at_25fps():
    c = cfg()
    assert frame_time(c, 0) == 2_000_000
    assert frame_time(c, 1) == 2_040_000
    assert frame_time(c, 25) == 3_000_000


def test_offered_rate():
    assert cfg().offered_rate_bps() == 458_000  # 25 * 2290 * 8


def test_constant_size_when_cv_zero():
    c = cfg()
    rng = RngStream(1, "traffic")
    assert [frame_size(c, frame_time(c, k), rng) for k in range(8)] == [2290] * 8


@given(st.integers(min_value=0, max_value=2**31),
       st.floats(min_value=0.01, max_value=1.0))
def test_size_draws_are_clamped(seed, cv):
    c = cfg(frame_bytes_cv=cv)
    rng = RngStream(seed, "traffic")
    for _ in range(40):
        s = frame_size(c, c.start_time, rng)
        assert 1 <= s <= 2 * 2290


def test_load_step_scales_mean():
    c = cfg(step_time=50 * SECOND, step_factor=1.5)
    rng = RngStream(1, "traffic")
    assert frame_size(c, 49 * SECOND, rng) == 2290
    assert frame_size(c, 50 * SECOND, rng) == 3435   # step boundary included
    assert frame_size(c, 80 * SECOND, rng) == 3435


def test_fragment_splits_at_mtu():
    pkts = fragment(2290, 1500, t_gen=7, flow=3, first_pkt_id=100)
    assert [p.size for p in pkts] == [1500, 790]
    assert [p.pkt_id for p in pkts] == [100, 101]
    assert all(p.t_gen == 7 and p.flow == 3 for p in pkts)


def test_fragment_exact_and_barely_over():
    assert [p.size for p in fragment(1500, 1500, 0, 1, 0)] == [1500]
    assert [p.size for p in fragment(1501, 1500, 0, 1, 0)] == [1500, 1]
    assert [p.size for p in fragment(4500, 1500, 0, 1, 0)] == [1500, 1500, 1500]


def test_fragment_rejects_nonsense():
    with pytest.raises(ValueError):
        fragment(0, 1500, 0, 1, 0)
    with pytest.raises(ValueError):
        fragment(100, 0, 0, 1, 0)


@given(st.integers(min_value=1, max_value=20_000),
       st.integers(min_value=1, max_value=3000))
def test_fragment_conserves_bytes(total, mtu):
    pkts = fragment(total, mtu, 0, 1, 0)
    assert sum(p.size for p in pkts) == total
    assert all(p.size <= mtu for p in pkts)
    assert all(p.size == mtu for p in pkts[:-1])  # only the tail may be short
    assert [p.pkt_id for p in pkts] == list(range(len(pkts)))
