"""Fit a weighted-indexed semi-Markov kernel from a per-minute state sequence."""

from __future__ import annotations

import logging
from typing import Sequence

import numpy as np

from .discretize import fit_index_levels
from .errors import EmptyInput, TooFewSamples
from .index import index_at_transitions
from .model import (
    IndexConfig,
    IndexLevels,
    StateSpace,
    Trajectory,
    WismcModel,
    probabilities_from_counts,
)

log = logging.getLogger(__name__)

MIN_TRANSITIONS = 1000


def build_trajectory(states: Sequence) -> Trajectory:
    """Run-length encode a per-minute label sequence into (J_n, T_n)."""
    labels = np.asarray(states)
    if labels.size == 0:
        raise EmptyInput("empty state sequence")
    change = np.flatnonzero(labels[1:] != labels[:-1]) + 1
    starts = np.concatenate([[0], change]).astype(np.int64)
    return Trajectory(labels[starts], starts)


def fit(
    states: Sequence,
    state_space: StateSpace,
    index_config: IndexConfig,
    level_count: int = 5,
    *,
    index_levels: IndexLevels | None = None,
    min_transitions: int = MIN_TRANSITIONS,
    return_edges: Sequence[float] | None = None,
) -> WismcModel:
    """Estimate p and the conditional sojourn histograms.

    Transition n (n = 0..N-1) is counted in cell (J_n, level(U_n), J_{n+1})
    with sojourn T_{n+1} - T_n. The final run is censored by the end of the
    data and contributes no transition. Index levels are fitted on the U_n
    that condition a counted transition unless ``index_levels`` is given.
    """
    traj = build_trajectory(states)
    n_trans = len(traj) - 1
    if n_trans < min_transitions:
        raise TooFewSamples(f"{n_trans} transitions, need {min_transitions}")
    idx = state_space.indices(traj.states)
    u = index_at_transitions(traj.states, traj.times, index_config, state_space)
    u_cond = u[:-1]
    if index_levels is None:
        if level_count == 1:
            index_levels = IndexLevels(1, ())
        else:
            index_levels = fit_index_levels(u_cond, level_count)
    lv = np.searchsorted(np.asarray(index_levels.edges), u_cond, side="left")
    s, L = state_space.size, index_levels.count
    src, dst = idx[:-1], idx[1:]
    soj = np.diff(traj.times)
    counts = np.zeros((s, L, s), dtype=np.int64)
    np.add.at(counts, (src, lv, dst), 1)
    sojourn = {}
    cell_id = (src * L + lv) * s + dst
    order = np.argsort(cell_id, kind="stable")
    sorted_ids = cell_id[order]
    bounds = np.flatnonzero(np.diff(sorted_ids)) + 1
    for group in np.split(order, bounds):
        if group.size == 0:
            continue
        c = int(cell_id[group[0]])
        key = (c // (L * s), (c // s) % L, c % s)
        sojourn[key] = np.bincount(soj[group] - 1).astype(float)
    model = WismcModel(
        state_space=state_space,
        index_levels=index_levels,
        index_config=index_config,
        p=probabilities_from_counts(counts),
        sojourn=sojourn,
        counts=counts,
        return_edges=None if return_edges is None else tuple(return_edges),
    )
    empty = int((~model.populated).sum())
    if empty:
        log.info("%d of %d (state, level) cells have no observations", empty, s * L)
    return model


def occupancy_report(model: WismcModel) -> str:
    """Plain-text table of observation counts per (state, level)."""
    counts = model.cell_counts
    if counts is None:
        counts = model.populated.astype(int)
    head = "state".ljust(8) + "".join(f"{'v' + str(v + 1):>10}" for v in range(model.n_levels))
    lines = [head]
    for i, lab in enumerate(model.state_space.labels):
        lines.append(str(lab).ljust(8) + "".join(f"{int(c):>10}" for c in counts[i]))
    return "\n".join(lines)
