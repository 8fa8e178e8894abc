"""Monte Carlo simulation of weighted-indexed semi-Markov trajectories.

Each step draws the next state from ``p[J_n, level(U_n), :]``, then the
sojourn from ``G[J_n, J_{n+1}](level(U_n), .)`` by inverse CDF, advances the
index with the completed sojourn and stops once ``T_{n+1} >= horizon``.
Cells without observations fall back to the nearest populated level of the
same state.
"""

from __future__ import annotations

from bisect import bisect_left, bisect_right
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Hashable

import numpy as np

from .errors import HorizonBeforeOrigin, InvalidInitialState, MissingCell, ModelError
from .index import IndexEvaluator
from .model import IndexConfig, Trajectory, WismcModel
from .rng import stream

_BLOCK = 8192


@dataclass(frozen=True)
class SimConfig:
    horizon: int
    seed: int = 0
    initial_state: Hashable | None = None  # default: the middle state
    initial_index: float | None = None  # default: squared return of the middle state
    n_paths: int = 1
    burn_in: int = 0

    def __post_init__(self):
        if self.horizon < 1:
            raise ModelError("horizon must be >= 1")
        if self.n_paths < 1:
            raise ModelError("n_paths must be >= 1")
        if not 0 <= self.burn_in < self.horizon:
            raise ModelError("burn_in must lie in [0, horizon)")


@dataclass(frozen=True, eq=False)
class SimResult:
    trajectory: Trajectory
    fallback_steps: int


class _Tables:
    """Cumulative tables as plain lists; bisect on lists beats numpy per call."""

    def __init__(self, model: WismcModel):
        s, L = model.n_states, model.n_levels
        self.edges = list(model.index_levels.edges)
        reps = model.state_space.representative_values
        self.r2 = [r * r for r in reps]
        self.cum_p = [[None] * L for _ in range(s)]
        self.level = [[-1] * L for _ in range(s)]
        self.cdf = {}
        for i in range(s):
            for v in range(L):
                row = model.p[i, v]
                if row.sum() > 0:
                    cum = np.cumsum(row)
                    cum[np.flatnonzero(row)[-1]:] = 1.0
                    self.cum_p[i][v] = cum.tolist()
                try:
                    self.level[i][v] = model.resolve_level(i, v)
                except MissingCell:
                    pass
        for key in model.sojourn:
            self.cdf[key] = model.cdf(*key).tolist()


def _initial(model: WismcModel, cfg: SimConfig) -> tuple[int, float]:
    mid = model.n_states // 2
    if cfg.initial_state is None:
        i0 = mid
    else:
        try:
            i0 = model.state_space.index_of(cfg.initial_state)
        except ModelError:
            raise InvalidInitialState(cfg.initial_state) from None
    u0 = cfg.initial_index
    if u0 is None:
        u0 = model.state_space.representative_values[mid] ** 2
    return i0, float(u0)


def simulate_path(model: WismcModel, cfg: SimConfig, path: int = 0, *,
                  fallback: bool = True, _tables: _Tables | None = None) -> SimResult:
    """One trajectory on [0, horizon); path ``k`` uses stream (seed, "path", k)."""
    tab = _tables or _Tables(model)
    i, u = _initial(model, cfg)
    ic = model.index_config
    ev = IndexEvaluator(IndexConfig(ic.lam, ic.memory, u))
    rng = stream(cfg.seed, "path", path)
    edges, cum_p, level, cdfs, r2 = tab.edges, tab.cum_p, tab.level, tab.cdf, tab.r2
    horizon = cfg.horizon
    states, times, index = [i], [0], [u]
    t = 0
    used_fallback = 0
    draws: list[float] = []
    k = 0
    while True:
        v = bisect_left(edges, u)
        vv = level[i][v]
        if vv != v:
            if vv < 0 or not fallback:
                raise MissingCell(f"no kernel row for state {model.state_space.labels[i]} at level {v + 1}")
            used_fallback += 1
        if k + 2 > len(draws):
            draws = rng.random(_BLOCK).tolist()
            k = 0
        j = bisect_right(cum_p[i][vv], draws[k])
        w = bisect_right(cdfs[(i, vv, j)], draws[k + 1]) + 1
        k += 2
        t += w
        ev.push(r2[i], w)
        u = ev.value()
        states.append(j)
        times.append(t)
        index.append(u)
        i = j
        if t >= horizon:
            break
    labels = np.asarray(model.state_space.labels)
    traj = Trajectory(labels[np.asarray(states)], np.asarray(times, dtype=np.int64), np.asarray(index))
    return SimResult(traj, used_fallback)


def expand_to_minutes(traj: Trajectory, horizon: int) -> np.ndarray:
    """Z(t) = J_{N(t)} for t = 0..horizon-1."""
    if horizon < 1:
        raise HorizonBeforeOrigin(f"horizon {horizon} < 1")
    n_of_t = np.searchsorted(traj.times, np.arange(horizon), side="right") - 1
    return np.asarray(traj.states)[n_of_t]


def simulate_returns(model: WismcModel, cfg: SimConfig, path: int = 0) -> np.ndarray:
    """Per-minute representative returns of one path, burn-in removed."""
    traj = simulate_path(model, cfg, path).trajectory
    z = expand_to_minutes(traj, cfg.horizon)
    return model.state_space.values_of(z)[cfg.burn_in:]


def _run_path(args) -> SimResult:
    model, cfg, path = args
    return simulate_path(model, cfg, path)


def simulate_paths(model: WismcModel, cfg: SimConfig, threads: int = 1) -> list[SimResult]:
    """``cfg.n_paths`` trajectories ordered by path id.

    Results do not depend on ``threads``: each path owns its random stream.
    """
    if threads <= 1 or cfg.n_paths == 1:
        tab = _Tables(model)
        return [simulate_path(model, cfg, k, _tables=tab) for k in range(cfg.n_paths)]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(_run_path, [(model, cfg, k) for k in range(cfg.n_paths)]))


def with_horizon(cfg: SimConfig, horizon: int) -> SimConfig:
    return replace(cfg, horizon=horizon)
