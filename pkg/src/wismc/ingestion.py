"""Tick CSV parsing, previous-tick resampling and simple returns.

Input format: a headed CSV ``timestamp,price[,session]``. Timestamps are
epoch seconds or ISO-8601 strings (naive ones are read as UTC). Resampling and
return computation happen per session so that no return spans an overnight
gap.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from datetime import datetime, time, timezone
from typing import Iterable, TextIO

import numpy as np

from .errors import EmptyInput, MalformedRow, NonMonotoneTime, NonPositivePrice


@dataclass(frozen=True, eq=False)
class TickSeries:
    timestamps: np.ndarray  # int64 epoch seconds
    prices: np.ndarray
    sessions: tuple | None = None

    def __len__(self) -> int:
        return len(self.timestamps)

    def split_sessions(self) -> list["TickSeries"]:
        """Consecutive runs of equal session keys, in input order."""
        if self.sessions is None:
            return [self]
        out, start = [], 0
        for k in range(1, len(self) + 1):
            if k == len(self) or self.sessions[k] != self.sessions[start]:
                out.append(TickSeries(self.timestamps[start:k], self.prices[start:k]))
                start = k
        return out


@dataclass(frozen=True, eq=False)
class PriceGrid:
    start_time: int
    step: int
    prices: np.ndarray

    @property
    def times(self) -> np.ndarray:
        return self.start_time + self.step * np.arange(len(self.prices), dtype=np.int64)


@dataclass(frozen=True, eq=False)
class ReturnSeries:
    """Returns on a regular grid. ``times`` is set when sessions were concatenated."""

    start_time: int
    step: int
    values: np.ndarray
    times: np.ndarray | None = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        if values.size < 1:
            raise EmptyInput("return series is empty")
        if not np.all(np.isfinite(values)):
            raise ValueError("returns must be finite")

    def __len__(self) -> int:
        return self.values.size

    def grid_times(self) -> np.ndarray:
        if self.times is not None:
            return self.times
        return self.start_time + self.step * np.arange(self.values.size, dtype=np.int64)


def _parse_timestamp(text: str) -> int:
    text = text.strip()
    try:
        return int(text)
    except ValueError:
        pass
    try:
        f = float(text)
    except ValueError:
        dt = datetime.fromisoformat(text.replace("Z", "+00:00"))
        if dt.tzinfo is None:
            dt = dt.replace(tzinfo=timezone.utc)
        return int(dt.timestamp())
    if not math.isfinite(f):
        raise ValueError(text)
    return int(f)


def parse_ticks(source: TextIO | Iterable[str]) -> TickSeries:
    """Parse ``timestamp,price[,session]`` rows. Line numbers count the header as 1."""
    reader = csv.reader(source)
    try:
        header = [h.strip().lower() for h in next(reader)]
    except StopIteration:
        raise EmptyInput("no header row") from None
    if header[:2] != ["timestamp", "price"]:
        raise MalformedRow(1, "header must start with timestamp,price")
    has_session = len(header) > 2 and header[2] == "session"
    ts, px, sess = [], [], []
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) < 2 or (has_session and len(row) < 3):
            raise MalformedRow(lineno, "too few fields")
        try:
            t = _parse_timestamp(row[0])
            price = float(row[1])
        except ValueError:
            raise MalformedRow(lineno, f"cannot parse {row[:2]!r}") from None
        if not math.isfinite(price) or price <= 0:
            raise NonPositivePrice(lineno, f"price {row[1].strip()!r}")
        if ts and t < ts[-1]:
            raise NonMonotoneTime(lineno, f"{t} < {ts[-1]}")
        ts.append(t)
        px.append(price)
        if has_session:
            sess.append(row[2].strip())
    return TickSeries(
        np.asarray(ts, dtype=np.int64),
        np.asarray(px, dtype=float),
        tuple(sess) if has_session else None,
    )


def sessions_from_schedule(ticks: TickSeries, open_at: time, close_at: time) -> TickSeries:
    """Assign each tick to its UTC calendar day and drop ticks outside [open, close]."""
    keep, keys = [], []
    for k, t in enumerate(ticks.timestamps):
        dt = datetime.fromtimestamp(int(t), tz=timezone.utc)
        if open_at <= dt.time() <= close_at:
            keep.append(k)
            keys.append(dt.date().isoformat())
    idx = np.asarray(keep, dtype=np.int64)
    return TickSeries(ticks.timestamps[idx], ticks.prices[idx], tuple(keys))


def resample(ticks: TickSeries, step: int = 60) -> PriceGrid:
    """Previous-tick prices on the grid of multiples of ``step`` spanning the ticks.

    The grid runs from the first multiple of ``step`` at or after the first
    tick to the first multiple at or after the last tick.
    """
    if step < 1:
        raise ValueError("step must be >= 1 second")
    if len(ticks) == 0:
        raise EmptyInput("no ticks to resample")
    t = ticks.timestamps
    first = -(-int(t[0]) // step) * step
    last = -(-int(t[-1]) // step) * step
    grid = np.arange(first, last + 1, step, dtype=np.int64)
    pos = np.searchsorted(t, grid, side="right") - 1
    return PriceGrid(first, step, ticks.prices[pos])


def compute_returns(prices: PriceGrid | np.ndarray, step: int = 60, start_time: int = 0) -> ReturnSeries:
    """Simple returns (S(t+1) - S(t)) / S(t)."""
    if isinstance(prices, PriceGrid):
        step, start_time, s = prices.step, prices.start_time, prices.prices
    else:
        s = np.asarray(prices, dtype=float)
    if s.size < 2:
        raise EmptyInput("need at least two prices for a return")
    if np.any(s <= 0):
        raise ValueError("prices must be positive")
    return ReturnSeries(start_time, step, (s[1:] - s[:-1]) / s[:-1])


def returns_from_ticks(ticks: TickSeries, step: int = 60) -> ReturnSeries:
    """Resample each session separately and concatenate the within-session returns."""
    values, times = [], []
    for session in ticks.split_sessions():
        grid = resample(session, step)
        if len(grid.prices) < 2:
            continue
        r = compute_returns(grid)
        values.append(r.values)
        times.append(grid.times[:-1])
    if not values:
        raise EmptyInput("no session spans two grid points")
    times_all = np.concatenate(times)
    return ReturnSeries(int(times_all[0]), step, np.concatenate(values), times_all)
