"""Symmetric return-state bins and index-level bins.

Quantiles use the lower empirical rule: the q-quantile of n sorted values is
the order statistic at rank ceil(q n) (1-based).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegenerateDistribution, EvenStateCount, TooFewSamples
from .model import IndexLevels, StateSpace


def lower_quantile(sorted_values: np.ndarray, q: float) -> float:
    n = sorted_values.size
    rank = max(1, math.ceil(q * n - 1e-9))
    return float(sorted_values[min(rank, n) - 1])


@dataclass(frozen=True)
class ReturnBins:
    edges: tuple
    state_space: StateSpace

    def discretize(self, values: Sequence[float]) -> np.ndarray:
        idx = discretize_series(values, self.edges) - 1
        return np.asarray(self.state_space.labels)[idx]

    @classmethod
    def from_state_space(cls, space: StateSpace) -> "ReturnBins":
        """Bins with edges at the midpoints between representative values."""
        reps = np.asarray(space.representative_values)
        return cls(tuple((reps[:-1] + reps[1:]) / 2), space)


def fit_return_bins(returns, s: int = 5, tick: float | None = None) -> ReturnBins:
    """Fit ``s`` (odd) return states symmetric about zero.

    The (s-1)/2 positive cut points are the k/((s+1)/2) quantiles of |r|,
    mirrored to the negative side; the middle state straddles zero. With
    ``tick`` the edges are rounded to the nearest multiple of it. Each state's
    representative value is the median of the training returns in its bin.
    """
    values = np.asarray(getattr(returns, "values", returns), dtype=float)
    if s < 3 or s % 2 == 0:
        raise EvenStateCount(f"state count must be odd and >= 3, got {s}")
    if values.size < 10 * s:
        raise TooFewSamples(f"need at least {10 * s} returns, got {values.size}")
    half = (s - 1) // 2
    abs_sorted = np.sort(np.abs(values))
    pos = np.array([lower_quantile(abs_sorted, k / (half + 1)) for k in range(1, half + 1)])
    if tick is not None:
        pos = np.round(pos / tick) * tick
    if pos[0] <= 0 or np.any(np.diff(pos) <= 0):
        raise DegenerateDistribution(f"return cut points coincide: {pos.tolist()}")
    edges = np.concatenate([-pos[::-1], pos])
    labels = discretize_series(values, edges)
    reps = []
    for k in range(1, s + 1):
        members = values[labels == k]
        if members.size == 0:
            raise DegenerateDistribution(f"return bin {k} is empty")
        reps.append(float(np.median(members)))
    return ReturnBins(tuple(edges.tolist()), StateSpace.from_values(reps))


def discretize_series(values: Sequence[float], edges: Sequence[float]) -> np.ndarray:
    """Map values to 1-based bins: label k iff edge_{k-1} < value <= edge_k."""
    edges = np.asarray(edges, dtype=float)
    return np.searchsorted(edges, np.asarray(values, dtype=float), side="left") + 1


def fit_index_levels(index_values: Sequence[float], count: int = 5,
                     min_per_level: int = 10) -> IndexLevels:
    """Quantile edges at k/count, k = 1..count-1.

    Refuses to fit with fewer than ``min_per_level * count`` values.
    """
    if count < 2:
        raise ValueError("level count must be >= 2 for quantile fitting")
    values = np.sort(np.asarray(index_values, dtype=float))
    if values.size < min_per_level * count or values.size == 0:
        raise TooFewSamples(f"need at least {min_per_level * count} index values, got {values.size}")
    edges = [lower_quantile(values, k / count) for k in range(1, count)]
    if any(b <= a for a, b in zip(edges, edges[1:])) or edges[-1] >= values[-1]:
        raise DegenerateDistribution(f"index level edges coincide: {edges}")
    return IndexLevels(count, tuple(edges))
