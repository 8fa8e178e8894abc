import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import naive_index
from wismc.errors import EmptyTrajectory, TimeBeforeOrigin
from wismc.index import IndexEvaluator, index_at_time, index_at_transitions
from wismc.model import IndexConfig

REPS = {1: 0.1, 2: 0.2}


@st.composite
def trajectories(draw, max_len=30):
    n = draw(st.integers(1, max_len))
    values = draw(st.lists(st.floats(-0.05, 0.05, allow_nan=False), min_size=n, max_size=n))
    durs = draw(st.lists(st.integers(1, 12), min_size=n, max_size=n))
    times = np.concatenate([[0], np.cumsum(durs)]).tolist()
    return list(range(n + 1)), {k: v for k, v in enumerate(values + [0.0])}, times


lams = st.sampled_from([0.5, 0.9, 0.97, 1.0])
memories = st.sampled_from([None, 1, 2, 3, 7])


def test_worked_example():
    u = index_at_transitions([1, 2, 1], [0, 2, 3], IndexConfig(0.5), REPS)
    assert u[2] == pytest.approx(0.027142857142857142, rel=1e-14)
    assert u[2] == pytest.approx((0.125 * 0.01 + 0.25 * 0.01 + 0.5 * 0.04) / 0.875, rel=1e-14)


def test_memory_one_keeps_only_the_last_sojourn():
    u = index_at_transitions([1, 2, 1], [0, 2, 3], IndexConfig(0.5, memory=1), REPS)
    assert u[2] == pytest.approx(0.04, rel=1e-14)


def test_single_sojourn_is_its_square():
    for lam in (0.3, 0.9, 1.0):
        u = index_at_transitions([1, 2], [0, 3], IndexConfig(lam), REPS)
        assert u[1] == pytest.approx(0.01, rel=1e-14)


def test_unit_lambda_is_plain_average():
    times = [0, 2, 7, 8]
    u = index_at_transitions([1, 2, 1, 2], times, IndexConfig(1.0), REPS)
    minutes = [0.01] * 2 + [0.04] * 5 + [0.01]
    assert u[3] == pytest.approx(sum(minutes) / len(minutes), rel=1e-14)


def test_initial_index():
    cfg = IndexConfig(0.5, initial_index=0.3)
    assert index_at_transitions([1, 2], [0, 1], cfg, REPS)[0] == 0.3
    assert index_at_time([1, 2], [0, 1], 0, cfg, REPS) == 0.3


def test_index_at_time_mid_sojourn():
    states, times = [1, 2, 1], [0, 2, 5]
    for memory in (None, 1, 2):
        cfg = IndexConfig(0.5, memory=memory)
        got = index_at_time(states, times, 4, cfg, REPS)
        want = naive_index([0.1, 0.2, 0.1], times, 4, 0.5, memory)
        assert got == pytest.approx(want, rel=1e-13)


def test_index_errors():
    with pytest.raises(EmptyTrajectory):
        index_at_transitions([], [], IndexConfig(0.5), REPS)
    with pytest.raises(TimeBeforeOrigin):
        index_at_time([1], [5], 4, IndexConfig(0.5), REPS)


def test_geometric_sum_matches_loop():
    for lam in (0.5, 0.97, 1.0):
        ev = IndexEvaluator(IndexConfig(lam))
        for dur in (1, 2, 17, 400):
            assert ev.geometric_sum(dur) == pytest.approx(sum(lam ** d for d in range(1, dur + 1)), rel=1e-13)


@given(trajectories(), lams, memories)
def test_transitions_match_oracle(traj, lam, memory):
    states, reps, times = traj
    vals = [reps[s] for s in states]
    u = index_at_transitions(states, times, IndexConfig(lam, memory), reps)
    for n in range(1, len(states)):
        want = naive_index(vals, times, times[n], lam, memory)
        assert math.isclose(u[n], want, rel_tol=1e-12, abs_tol=1e-300)


@given(trajectories(max_len=12), lams, memories, st.data())
def test_index_at_time_matches_oracle(traj, lam, memory, data):
    states, reps, times = traj
    vals = [reps[s] for s in states]
    cfg = IndexConfig(lam, memory)
    t = data.draw(st.integers(times[0] + 1, times[-1] + 5))
    got = index_at_time(states, times, t, cfg, reps)
    assert math.isclose(got, naive_index(vals, times, t, lam, memory), rel_tol=1e-12, abs_tol=1e-300)


@given(trajectories(), lams, memories)
def test_jump_times_are_bit_exact(traj, lam, memory):
    states, reps, times = traj
    cfg = IndexConfig(lam, memory)
    u = index_at_transitions(states, times, cfg, reps)
    for n in range(len(states)):
        assert index_at_time(states, times, times[n], cfg, reps) == u[n]


@given(trajectories(), lams, st.integers(1, 40))
def test_short_history_equals_unbounded(traj, lam, memory):
    states, reps, times = traj
    a = index_at_transitions(states, times, IndexConfig(lam), reps)
    b = index_at_transitions(states, times, IndexConfig(lam, memory), reps)
    k = min(memory, len(states) - 1) + 1
    assert np.array_equal(a[:k], b[:k])


@given(trajectories(), lams, memories)
def test_index_is_a_convex_combination(traj, lam, memory):
    states, reps, times = traj
    u = index_at_transitions(states, times, IndexConfig(lam, memory), reps)
    r2 = [reps[s] ** 2 for s in states]
    hi = max(r2) * (1 + 1e-12)
    assert np.all(u[1:] >= 0) and np.all(u[1:] <= hi)
