import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import sorted_quantile
from wismc.discretize import discretize_series, fit_index_levels, fit_return_bins
from wismc.errors import DegenerateDistribution, EvenStateCount, TooFewSamples


def test_symmetric_returns_give_mirrored_edges():
    rng = np.random.default_rng(0)
    x = rng.standard_normal(2000)
    x = np.concatenate([x, -x])
    e = fit_return_bins(x, 5).edges
    assert e[0] == -e[3] and e[1] == -e[2]
    assert 0 < e[2] < e[3]


def test_all_zero_returns_degenerate():
    with pytest.raises(DegenerateDistribution):
        fit_return_bins(np.zeros(100), 5)


def test_return_edges_against_sort_oracle():
    k = np.arange(1, 1001) * 0.001
    r = np.concatenate([k, -k])
    bins = fit_return_bins(r, 5)
    absr = np.abs(r).tolist()
    a, b = sorted_quantile(absr, 1 / 3), sorted_quantile(absr, 2 / 3)
    assert bins.edges == (-b, -a, a, b)
    assert a == pytest.approx(0.334) and b == pytest.approx(0.667)


def test_return_bin_errors():
    with pytest.raises(EvenStateCount):
        fit_return_bins(np.arange(100.0), 4)
    with pytest.raises(TooFewSamples):
        fit_return_bins(np.arange(10.0) - 5, 5)


def test_representative_values_are_in_bin_medians():
    rng = np.random.default_rng(3)
    x = rng.laplace(size=5000)
    bins = fit_return_bins(x, 5)
    labels = bins.discretize(x)
    for lab, rep in zip(bins.state_space.labels, bins.state_space.representative_values):
        assert rep == np.median(x[labels == lab])
    assert bins.discretize([0.0]).tolist() == [3]


def test_discretize_examples():
    edges = (-0.005, -0.001, 0.001, 0.005)
    assert discretize_series([-0.01, 0, 0.01], edges).tolist() == [1, 3, 5]
    assert discretize_series([-1, 1], edges).tolist() == [1, 5]


@given(st.lists(st.floats(-1, 1, allow_nan=False), min_size=1, max_size=50))
def test_discretize_bin_rule(values):
    edges = (-0.5, -0.1, 0.1, 0.5)
    for v, k in zip(values, discretize_series(values, edges).tolist()):
        assert k == 1 + sum(v > e for e in edges)


def test_index_levels_examples():
    with pytest.raises(DegenerateDistribution):
        fit_index_levels(np.full(100, 0.3), 5)
    u = np.random.default_rng(1).uniform(size=10_000)
    edges = fit_index_levels(u, 5).edges
    assert edges == pytest.approx((0.2, 0.4, 0.6, 0.8), abs=0.02)
    ul = u.tolist()
    assert list(edges) == [sorted_quantile(ul, k / 5) for k in range(1, 5)]


def test_index_levels_two_values():
    lv = fit_index_levels([1, 1, 1, 2, 2, 2], 2, min_per_level=1)
    assert len(lv.edges) == 1 and 1 <= lv.edges[0] < 2
    assert lv.level(1) == 1 and lv.level(2) == 2


@given(st.lists(st.floats(0, 1, allow_nan=False), min_size=50, max_size=200), st.integers(2, 5))
def test_index_levels_partition(values, count):
    try:
        lv = fit_index_levels(values, count)
    except DegenerateDistribution:
        return
    levels = [lv.level(v) for v in values]
    assert min(levels) >= 1 and max(levels) <= count
    assert all(b > a for a, b in zip(lv.edges, lv.edges[1:]))
