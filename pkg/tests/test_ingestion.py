import io
from datetime import time

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from wismc.errors import EmptyInput, MalformedRow, NonMonotoneTime, NonPositivePrice
from wismc.ingestion import (
    TickSeries,
    compute_returns,
    parse_ticks,
    resample,
    returns_from_ticks,
    sessions_from_schedule,
)


def ticks(ts, px, sessions=None):
    return TickSeries(np.asarray(ts, dtype=np.int64), np.asarray(px, dtype=float), sessions)


def test_parse_minimal():
    t = parse_ticks(io.StringIO("timestamp,price\n1167730860,7.125\n1167730920,7.130"))
    assert len(t) == 2
    assert t.timestamps.tolist() == [1167730860, 1167730920]
    assert t.prices.tolist() == [7.125, 7.130]


def test_parse_iso_timestamps_are_utc():
    t = parse_ticks(["timestamp,price", "2007-01-02T09:01:00,7.1", "2007-01-02T09:02:00Z,7.2"])
    assert t.timestamps.tolist() == [1167728460, 1167728520]


def test_parse_errors_carry_line_numbers():
    with pytest.raises(NonMonotoneTime) as e:
        parse_ticks(["timestamp,price", "20,1.0", "10,1.0"])
    assert e.value.line == 3
    with pytest.raises(NonPositivePrice):
        parse_ticks(["timestamp,price", "0,0"])
    with pytest.raises(MalformedRow) as e:
        parse_ticks(["timestamp,price", "0,1", "x,y"])
    assert e.value.line == 3
    with pytest.raises(MalformedRow):
        parse_ticks(["time,value", "0,1"])
    with pytest.raises(EmptyInput):
        parse_ticks([])


def test_parse_sessions_column():
    t = parse_ticks(["timestamp,price,session", "0,1,a", "60,2,a", "120,3,b"])
    assert [len(s) for s in t.split_sessions()] == [2, 1]


def test_resample_previous_tick():
    g = resample(ticks([0, 90], [10, 11]), 60)
    assert g.times.tolist() == [0, 60, 120]
    assert g.prices.tolist() == [10, 10, 11]


def test_resample_single_tick():
    g = resample(ticks([120], [5.0]), 60)
    assert g.prices.tolist() == [5.0]


@given(st.lists(st.floats(1, 100), min_size=1, max_size=20))
def test_resample_identity_on_grid(prices):
    t = ticks(np.arange(len(prices)) * 60, prices)
    assert resample(t, 60).prices.tolist() == prices


@given(st.lists(st.integers(0, 5000), min_size=1, max_size=30, unique=True),
       st.integers(1, 300))
def test_resample_matches_linear_scan(times, step):
    times = sorted(times)
    px = [1.0 + k for k in range(len(times))]
    g = resample(ticks(times, px), step)
    for gt, p in zip(g.times.tolist(), g.prices.tolist()):
        prior = [q for t, q in zip(times, px) if t <= gt]
        assert p == prior[-1]


def test_returns_examples():
    assert compute_returns(np.array([100.0, 101.0])).values.tolist() == [0.01]
    assert compute_returns(np.full(5, 3.0)).values.tolist() == [0.0] * 4
    r = compute_returns(np.array([100.0, 101.0, 99.99])).values
    assert r == pytest.approx([0.01, -0.01], abs=1e-12)


def test_returns_never_cross_sessions():
    t = ticks([0, 60, 120, 100_000, 100_060], [10, 11, 12, 50, 55], ("a", "a", "a", "b", "b"))
    r = returns_from_ticks(t, 60)
    assert r.values == pytest.approx([0.1, 1 / 11, 0.1])


def test_sessions_from_schedule():
    day = 86400
    t = ticks([day + 8 * 3600, day + 10 * 3600, 2 * day + 10 * 3600], [1, 2, 3])
    s = sessions_from_schedule(t, time(9), time(17, 30))
    assert s.timestamps.tolist() == [day + 10 * 3600, 2 * day + 10 * 3600]
    assert len(set(s.sessions)) == 2
