"""Exponentially weighted index of squared returns.

At transition n the index is

    U_n = sum_a lam**(T_n - a) r(a)**2 / sum_a lam**(T_n - a)

over the minutes a of the last ``memory`` complete sojourns (all of them when
memory is unbounded), where r(a) is the representative return of the state
occupied at minute a.

Each sojourn contributes a segment ``(num, den, dur)`` with
``den = sum_{d=1..dur} lam**d`` and ``num = r**2 * den``. Segments combine
associatively (older first) as

    (A, B) -> (A.num * lam**B.dur + B.num, A.den * lam**B.dur + B.den, A.dur + B.dur)

so the unbounded index is a running fold and the finite-memory index is a
sliding-window fold kept in a two-stack queue. Nothing is ever subtracted,
which keeps the value exact to rounding even when a window collapses onto a
zero-return state.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .errors import EmptyTrajectory, TimeBeforeOrigin
from .model import IndexConfig

Segment = tuple  # (num, den, dur)

_EMPTY: Segment = (0.0, 0.0, 0)


class IndexEvaluator:
    """Incremental evaluator; push one completed sojourn at a time.

    >>> ev = IndexEvaluator(IndexConfig(0.5))
    >>> ev.push(0.01, 2); ev.push(0.04, 1)
    >>> round(ev.value(), 12)
    0.027142857143
    """

    __slots__ = ("lam", "memory", "initial", "_log_lam", "_sums", "_acc",
                 "_back", "_back_acc", "_front", "_n")

    def __init__(self, config: IndexConfig):
        self.lam = float(config.lam)
        self.memory = config.memory
        self.initial = float(config.initial_index)
        self._log_lam = math.log(self.lam)
        self._sums: dict[int, float] = {}
        self._acc: Segment = _EMPTY
        self._back: list[Segment] = []
        self._back_acc: Segment = _EMPTY
        self._front: list[Segment] = []  # suffix aggregates, oldest on top
        self._n = 0

    def copy(self) -> "IndexEvaluator":
        other = IndexEvaluator.__new__(IndexEvaluator)
        for name in self.__slots__:
            val = getattr(self, name)
            setattr(other, name, list(val) if isinstance(val, list) else val)
        return other

    def geometric_sum(self, dur: int) -> float:
        """sum_{d=1..dur} lam**d."""
        s = self._sums.get(dur)
        if s is None:
            if self.lam == 1.0:
                s = float(dur)
            else:
                s = self.lam * math.expm1(dur * self._log_lam) / math.expm1(self._log_lam)
            self._sums[dur] = s
        return s

    def segment(self, r2: float, dur: int) -> Segment:
        den = self.geometric_sum(dur)
        return (r2 * den, den, dur)

    def combine(self, older: Segment, newer: Segment) -> Segment:
        if older[2] == 0:
            return newer
        decay = self.lam ** newer[2]
        return (older[0] * decay + newer[0], older[1] * decay + newer[1], older[2] + newer[2])

    @property
    def transitions(self) -> int:
        return self._n

    def push(self, r2: float, dur: int) -> None:
        """Record a completed sojourn of ``dur`` minutes with squared return ``r2``."""
        seg = self.segment(r2, dur)
        self._n += 1
        if self.memory is None:
            self._acc = self.combine(self._acc, seg)
            return
        self._back.append(seg)
        self._back_acc = self.combine(self._back_acc, seg)
        if self._n > self.memory:
            if not self._front:
                agg = _EMPTY
                while self._back:
                    agg = self.combine(self._back.pop(), agg)
                    self._front.append(agg)
                self._back_acc = _EMPTY
            self._front.pop()

    def window(self) -> Segment:
        if self.memory is None:
            return self._acc
        if self._front:
            return self.combine(self._front[-1], self._back_acc)
        return self._back_acc

    def value(self) -> float:
        if self._n == 0:
            return self.initial
        num, den, _ = self.window()
        return num / den

    def value_with_partial(self, r2: float, dur: int) -> float:
        """Index at a time ``dur`` minutes into the current, unfinished sojourn."""
        if dur == 0:
            return self.value()
        probe = self.copy()
        probe.push(r2, dur)
        return probe.value()


def _squared_values(states: Sequence, reps) -> np.ndarray:
    if isinstance(reps, dict):
        vals = np.array([reps[s] for s in states], dtype=float)
    else:
        space = reps
        vals = space.values_of(states)
    return vals * vals


def index_at_transitions(states: Sequence, times: Sequence[int], config: IndexConfig, reps) -> np.ndarray:
    """U_0..U_N for a trajectory; ``reps`` is a StateSpace or a label -> value dict.

    U_0 is ``config.initial_index``; U_n for n >= 1 uses the sojourns before T_n.
    """
    if len(states) == 0:
        raise EmptyTrajectory("trajectory has no states")
    r2 = _squared_values(states, reps)
    durs = np.diff(np.asarray(times, dtype=np.int64))
    out = np.empty(len(states))
    ev = IndexEvaluator(config)
    out[0] = ev.value()
    for n in range(1, len(states)):
        ev.push(float(r2[n - 1]), int(durs[n - 1]))
        out[n] = ev.value()
    return out


def index_at_time(states: Sequence, times: Sequence[int], t: int, config: IndexConfig, reps) -> float:
    """U(t) at an arbitrary integer time.

    At a jump time T_n this is U_n exactly; strictly inside a sojourn the
    unfinished sojourn enters as a partial segment ending at t (weights
    lam**(t - a)) and counts towards the memory window.
    """
    if len(states) == 0:
        raise EmptyTrajectory("trajectory has no states")
    times = np.asarray(times, dtype=np.int64)
    if t < times[0]:
        raise TimeBeforeOrigin(f"t={t} precedes T_0={times[0]}")
    n = int(np.searchsorted(times, t, side="right") - 1)
    r2 = _squared_values(states[: n + 1], reps)
    ev = IndexEvaluator(config)
    if t == times[n]:
        for k in range(n):
            ev.push(float(r2[k]), int(times[k + 1] - times[k]))
        return ev.value()
    # the partial sojourn occupies one memory slot, so only m-1 complete ones stay
    start = 0 if config.memory is None else max(0, n - (config.memory - 1))
    for k in range(start, n):
        ev.push(float(r2[k]), int(times[k + 1] - times[k]))
    return ev.value_with_partial(float(r2[n]), int(t - times[n]))
