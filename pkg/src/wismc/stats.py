"""Stylized-fact statistics: autocorrelations, ACF distance and first-passage times."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateVariance, InvalidThreshold, LagGridMismatch, SeriesTooShort

DEFAULT_TAU_MAX = 100
DEFAULT_RHO = 1.005


@dataclass(frozen=True, eq=False)
class AcfCurve:
    lags: np.ndarray
    values: np.ndarray

    def rows(self):
        return zip(self.lags.tolist(), self.values.tolist())


def _acf(x: np.ndarray, tau_max: int, include_zero: bool) -> AcfCurve:
    n = x.size
    if tau_max < 1 or n <= tau_max:
        raise SeriesTooShort(f"series of length {n} too short for tau_max={tau_max}")
    if np.all(x == x[0]):
        raise DegenerateVariance("series has zero variance")
    d = x - x.mean()
    var = np.dot(d, d) / n
    start = 0 if include_zero else 1
    lags = np.arange(start, tau_max + 1)
    vals = np.empty(lags.size)
    for k, tau in enumerate(lags):
        vals[k] = 1.0 if tau == 0 else np.dot(d[tau:], d[: n - tau]) / n / var
    return AcfCurve(lags, vals)


def acf_squared(returns, tau_max: int = DEFAULT_TAU_MAX, include_zero: bool = False) -> AcfCurve:
    """Autocorrelation of squared returns with the biased (divide-by-n) estimator."""
    z = np.asarray(returns, dtype=float)
    return _acf(z * z, tau_max, include_zero)


def acf_raw(returns, tau_max: int = DEFAULT_TAU_MAX, include_zero: bool = False) -> AcfCurve:
    return _acf(np.asarray(returns, dtype=float), tau_max, include_zero)


def mse_acf(real: AcfCurve, sim: AcfCurve) -> float:
    if real.lags.shape != sim.lags.shape or np.any(real.lags != sim.lags):
        raise LagGridMismatch("ACF curves are on different lag grids")
    diff = real.values - sim.values
    return float(np.mean(diff * diff))


@dataclass(frozen=True, eq=False)
class FptSample:
    """First-passage times for threshold ``rho``.

    ``counts[k]`` is the number of starts whose first passage took k+1 minutes;
    ``censored`` counts starts that never reached the threshold within ``max_wait``.
    """

    rho: float
    max_wait: int
    counts: np.ndarray
    censored: int

    @property
    def n_starts(self) -> int:
        return int(self.counts.sum()) + self.censored

    @property
    def taus(self) -> np.ndarray:
        return np.arange(1, self.max_wait + 1)

    def pdf(self) -> np.ndarray:
        """Histogram normalised over the uncensored starts."""
        total = self.counts.sum()
        return self.counts / total if total else np.zeros(self.max_wait)

    def cdf(self) -> np.ndarray:
        """P(passage <= tau) over all starts, censored ones included."""
        return np.cumsum(self.counts) / max(self.n_starts, 1)

    def samples(self) -> np.ndarray:
        return np.repeat(self.taus, self.counts)


def fpt_distribution(returns, rho: float = DEFAULT_RHO, max_wait: int = 1000) -> FptSample:
    """Scan every start t with ``max_wait`` later observations.

    The relative price after tau minutes is the running product of (1 + r(u))
    for u = t..t+tau-1, multiplied in time order; the first tau with a value
    >= rho is recorded.
    """
    if not rho > 1:
        raise InvalidThreshold(f"rho must exceed 1, got {rho}")
    if max_wait < 1:
        raise InvalidThreshold("max_wait must be >= 1")
    growth = 1.0 + np.asarray(returns, dtype=float)
    n_starts = growth.size - max_wait + 1
    counts = np.zeros(max_wait, dtype=np.int64)
    if n_starts <= 0:
        return FptSample(rho, max_wait, counts, 0)
    active = np.arange(n_starts)
    ratio = np.ones(n_starts)
    for tau in range(1, max_wait + 1):
        ratio *= growth[active + tau - 1]
        hit = ratio >= rho
        if hit.any():
            counts[tau - 1] = int(hit.sum())
            keep = ~hit
            active = active[keep]
            ratio = ratio[keep]
            if active.size == 0:
                break
    return FptSample(rho, max_wait, counts, int(active.size))
