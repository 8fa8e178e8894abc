import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import direct_acf, naive_fpt
from wismc.errors import DegenerateVariance, InvalidThreshold, LagGridMismatch, SeriesTooShort
from wismc.stats import AcfCurve, acf_raw, acf_squared, fpt_distribution, mse_acf


def test_constant_magnitude_is_degenerate():
    with pytest.raises(DegenerateVariance):
        acf_squared([0.01, -0.01] * 50, 5)
    with pytest.raises(SeriesTooShort):
        acf_raw([1.0, 2.0], 5)


def test_lag_zero_is_one():
    c = acf_squared(np.random.default_rng(0).standard_normal(200), 3, include_zero=True)
    assert c.lags[0] == 0 and c.values[0] == 1.0


def test_period_two_squares():
    c = acf_squared([1, 2, 1, 2, 1, 2], 2)
    # biased estimator: -5/6 and 4/6 instead of -1 and +1
    assert c.values[0] == pytest.approx(-5 / 6, rel=1e-12)
    assert c.values[1] == pytest.approx(4 / 6, rel=1e-12)
    x = [1, 4, 1, 4, 1, 4]
    assert c.values.tolist() == pytest.approx([direct_acf(x, 1), direct_acf(x, 2)], rel=1e-12)


def test_alternating_raw():
    c = acf_raw([1.0, -1.0] * 5000, 3)
    assert c.values[0] == pytest.approx(-1.0, abs=1e-3)


def test_iid_noise_band():
    x = np.random.default_rng(5).standard_normal(100_000)
    assert np.max(np.abs(acf_raw(x, 100).values)) <= 0.02


@given(st.lists(st.floats(-1, 1, allow_nan=False), min_size=12, max_size=60), st.floats(-5, 5))
def test_acf_against_direct_and_mean_shift(values, shift):
    x = np.asarray(values)
    if np.ptp(x) < 1e-6:
        return
    c = acf_raw(x, 5)
    assert c.values.tolist() == pytest.approx([direct_acf(values, k) for k in range(1, 6)], rel=1e-9, abs=1e-9)
    assert acf_raw(x + shift, 5).values == pytest.approx(c.values, rel=1e-6, abs=1e-6)


def test_mse_examples():
    lags = np.arange(1, 101)
    a = AcfCurve(lags, np.linspace(0, 1, 100))
    b = AcfCurve(lags, a.values + 0.1)
    assert mse_acf(a, a) == 0
    assert mse_acf(a, b) == pytest.approx(0.01, rel=1e-12)
    c = AcfCurve(np.arange(1, 4), np.array([0.5, 0.3, 0.1]))
    d = AcfCurve(np.arange(1, 4), np.array([0.4, 0.35, -0.1]))
    assert mse_acf(c, d) == pytest.approx((0.01 + 0.0025 + 0.04) / 3, rel=1e-12)
    with pytest.raises(LagGridMismatch):
        mse_acf(a, c)


def test_fpt_examples():
    f = fpt_distribution(np.full(50, 0.01), rho=1.005, max_wait=10)
    assert set(f.samples().tolist()) == {1}
    f = fpt_distribution(np.zeros(50), max_wait=10)
    assert f.counts.sum() == 0 and f.censored == f.n_starts == 41
    f = fpt_distribution(np.full(100, 0.001), rho=1.005, max_wait=20)
    assert set(f.samples().tolist()) == {5}
    assert 1.001 ** 4 < 1.005 <= 1.001 ** 5
    with pytest.raises(InvalidThreshold):
        fpt_distribution(np.zeros(5), rho=1.0)


@given(st.lists(st.floats(-0.004, 0.004, allow_nan=False), min_size=1, max_size=120), st.integers(1, 40))
def test_fpt_matches_brute_force(values, max_wait):
    f = fpt_distribution(values, rho=1.005, max_wait=max_wait)
    counts, censored = naive_fpt(values, 1.005, max_wait)
    assert f.counts.tolist() == counts and f.censored == censored


def test_fpt_pdf_cdf():
    r = np.random.default_rng(2).normal(0, 0.003, 5000)
    f = fpt_distribution(r, max_wait=200)
    assert f.pdf().sum() == pytest.approx(1.0)
    cdf = f.cdf()
    assert np.all(np.diff(cdf) >= 0) and cdf[-1] == pytest.approx(1 - f.censored / f.n_starts)
