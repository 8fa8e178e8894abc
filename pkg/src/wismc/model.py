"""Core domain types: state spaces, index configuration, trajectories and the
fitted weighted-indexed semi-Markov kernel.

The kernel is stored as the factor pair (p, G): embedded transition
probabilities ``p[i, v, j]`` and, for every cell with ``p > 0``, a histogram of
integer sojourn times whose normalised cumulative sum is ``G_ij(v; t)``.
Internally states and levels are 0-based array indices; the public lookup
functions take state labels and 1-based level numbers.
"""

from __future__ import annotations

import json
import math
from bisect import bisect_left
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Hashable, Sequence

import numpy as np

from .errors import (
    DegenerateDistribution,
    MissingCell,
    ModelError,
    UnknownLevel,
    UnknownState,
)

FORMAT_VERSION = 1
ROW_TOL = 1e-12


@dataclass(frozen=True)
class StateSpace:
    labels: tuple
    representative_values: tuple

    def __post_init__(self):
        labels = tuple(self.labels)
        reps = tuple(float(x) for x in self.representative_values)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "representative_values", reps)
        if len(labels) < 2:
            raise ModelError("state space needs at least two states")
        if len(set(labels)) != len(labels):
            raise ModelError("state labels must be distinct")
        if len(reps) != len(labels):
            raise ModelError("one representative value per label required")
        if any(b <= a for a, b in zip(reps, reps[1:])):
            raise ModelError("representative values must be strictly increasing")
        object.__setattr__(self, "_lookup", {lab: k for k, lab in enumerate(labels)})

    @classmethod
    def from_values(cls, values: Sequence[float]) -> "StateSpace":
        """Label states 1..s in order of their representative values."""
        return cls(tuple(range(1, len(values) + 1)), tuple(values))

    @property
    def size(self) -> int:
        return len(self.labels)

    def index_of(self, label: Hashable) -> int:
        try:
            return self._lookup[label]
        except (KeyError, TypeError):
            raise UnknownState(label) from None

    def indices(self, labels: Sequence) -> np.ndarray:
        return np.fromiter((self.index_of(x) for x in labels), dtype=np.int64,
                           count=len(labels))

    def values_of(self, labels: Sequence) -> np.ndarray:
        reps = np.asarray(self.representative_values)
        return reps[self.indices(labels)]


@dataclass(frozen=True)
class IndexLevels:
    """Cut points splitting index values into ``count`` ordered levels.

    Level k (1-based) holds values in ``(edges[k-2], edges[k-1]]``; a value on
    an edge belongs to the lower level.
    """

    count: int
    edges: tuple = ()

    def __post_init__(self):
        edges = tuple(float(e) for e in self.edges)
        object.__setattr__(self, "edges", edges)
        if self.count < 1:
            raise ModelError("level count must be positive")
        if len(edges) != self.count - 1:
            raise ModelError(f"{self.count} levels need {self.count - 1} edges, got {len(edges)}")
        if any(b <= a for a, b in zip(edges, edges[1:])):
            raise DegenerateDistribution("index level edges must be strictly increasing")

    def level(self, value: float) -> int:
        return bisect_left(self.edges, value) + 1

    def level_index(self, value: float) -> int:
        return bisect_left(self.edges, value)


@dataclass(frozen=True)
class IndexConfig:
    """EWMA index parameters. ``memory=None`` means unbounded memory."""

    lam: float
    memory: int | None = None
    initial_index: float = 0.0

    def __post_init__(self):
        if not (0.0 < self.lam <= 1.0):
            raise ModelError(f"lambda must lie in (0, 1], got {self.lam}")
        if self.memory is not None and (int(self.memory) != self.memory or self.memory < 1):
            raise ModelError(f"memory must be a positive integer, got {self.memory}")
        if self.initial_index < 0 or not math.isfinite(self.initial_index):
            raise ModelError("initial index must be a finite non-negative number")


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Visited states ``J_n``, jump times ``T_n`` and (optionally) index values ``U_n``."""

    states: np.ndarray
    times: np.ndarray
    index_values: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "states", np.asarray(self.states))
        object.__setattr__(self, "times", np.asarray(self.times, dtype=np.int64))
        if self.index_values is not None:
            object.__setattr__(self, "index_values", np.asarray(self.index_values, dtype=float))

    def __len__(self) -> int:
        return len(self.states)

    @property
    def sojourns(self) -> np.ndarray:
        return np.diff(self.times)

    def validate(self) -> None:
        n = len(self.states)
        if n == 0:
            raise ModelError("empty trajectory")
        if len(self.times) != n:
            raise ModelError("states and times differ in length")
        if self.times[0] != 0:
            raise ModelError("trajectory must start at T_0 = 0")
        if np.any(np.diff(self.times) <= 0):
            raise ModelError("transition times must be strictly increasing")
        if n > 1 and np.any(self.states[1:] == self.states[:-1]):
            raise ModelError("self-transition in embedded chain")
        if self.index_values is not None:
            if len(self.index_values) != n:
                raise ModelError("index values differ in length")
            if np.any(self.index_values < 0):
                raise ModelError("negative index value")


def _cdf_from_weights(weights: np.ndarray) -> np.ndarray:
    cdf = np.cumsum(weights) / weights.sum()
    cdf[-1] = 1.0
    return cdf


@dataclass(frozen=True, eq=False)
class WismcModel:
    """Fitted (or synthetic) weighted-indexed semi-Markov kernel.

    ``sojourn[(i, v, j)]`` holds non-negative weights for sojourn times
    1..len(weights); for fitted models these are raw integer counts.
    ``counts`` holds the transition counts behind ``p`` when the model was
    estimated from data, and is ``None`` for synthetic models.
    ``return_edges`` are the return-bin cut points used to discretize the
    training data, if known.
    """

    state_space: StateSpace
    index_levels: IndexLevels
    index_config: IndexConfig
    p: np.ndarray
    sojourn: dict = field(repr=False)
    counts: np.ndarray | None = None
    return_edges: tuple | None = None
    _cdfs: dict = field(default_factory=dict, init=False, repr=False)

    def __post_init__(self):
        p = np.array(self.p, dtype=float)
        p.setflags(write=False)
        object.__setattr__(self, "p", p)
        soj = {}
        for key, w in self.sojourn.items():
            arr = np.array(w, dtype=float)
            arr.setflags(write=False)
            soj[tuple(int(k) for k in key)] = arr
        object.__setattr__(self, "sojourn", soj)
        if self.return_edges is not None:
            object.__setattr__(self, "return_edges", tuple(float(e) for e in self.return_edges))
        if self.counts is not None:
            c = np.array(self.counts, dtype=np.int64)
            c.setflags(write=False)
            object.__setattr__(self, "counts", c)
        self.validate()
        for key, w in soj.items():
            cdf = _cdf_from_weights(w)
            cdf.setflags(write=False)
            self._cdfs[key] = cdf

    # -- shape -----------------------------------------------------------
    @property
    def n_states(self) -> int:
        return self.state_space.size

    @property
    def n_levels(self) -> int:
        return self.index_levels.count

    @property
    def cell_counts(self) -> np.ndarray | None:
        return None if self.counts is None else self.counts.sum(axis=2)

    @property
    def populated(self) -> np.ndarray:
        """Boolean (state, level) mask of rows that carry a distribution."""
        return self.p.sum(axis=2) > 0

    def validate(self) -> None:
        s, L = self.n_states, self.n_levels
        p = self.p
        if p.shape != (s, L, s):
            raise ModelError(f"p has shape {p.shape}, expected {(s, L, s)}")
        if np.any(~np.isfinite(p)) or np.any(p < 0) or np.any(p > 1):
            raise ModelError("p entries must lie in [0, 1]")
        if np.any(p[np.arange(s), :, np.arange(s)] != 0):
            raise ModelError("p must have a zero diagonal")
        sums = p.sum(axis=2)
        bad = (sums > 0) & (np.abs(sums - 1.0) > ROW_TOL)
        if np.any(bad):
            raise ModelError(f"rows not stochastic at {np.argwhere(bad).tolist()}")
        for i, v, j in zip(*np.nonzero(p)):
            w = self.sojourn.get((i, v, j))
            if w is None or w.size == 0 or w.sum() <= 0:
                raise ModelError(f"missing sojourn distribution for cell {(i, v, j)}")
        for key, w in self.sojourn.items():
            if np.any(w < 0) or not np.all(np.isfinite(w)):
                raise ModelError(f"invalid sojourn weights in cell {key}")
        if self.counts is not None and self.counts.shape != (s, L, s):
            raise ModelError("counts shape mismatch")
        if self.return_edges is not None and len(self.return_edges) != s - 1:
            raise ModelError("need one return edge fewer than states")

    # -- kernel access (0-based) ----------------------------------------
    def cdf(self, i: int, v: int, j: int) -> np.ndarray:
        """G_ij(v; t) for t = 1..len; equals 1 beyond the stored support."""
        return self._cdfs[(i, v, j)]

    def resolve_level(self, i: int, v: int) -> int:
        """Nearest populated level for state ``i``; ties go to the lower level."""
        row = self.populated[i]
        if row[v]:
            return v
        for d in range(1, self.n_levels):
            if v - d >= 0 and row[v - d]:
                return v - d
            if v + d < self.n_levels and row[v + d]:
                return v + d
        raise MissingCell(f"state {self.state_space.labels[i]} has no populated level")

    def q(self, i: int, v: int, j: int, t: int) -> float:
        """Kernel Q_ij(v; t) = p_ij(v) G_ij(v; t)."""
        pij = self.p[i, v, j]
        if pij == 0:
            return 0.0
        return float(pij * _cdf_at(self.cdf(i, v, j), t))

    def collapse_levels(self) -> "WismcModel":
        """Merge all index levels into one (ordinary semi-Markov estimator).

        Only defined for fitted models, which carry raw counts.
        """
        if self.counts is None:
            raise ModelError("collapsing requires a fitted model with counts")
        counts = self.counts.sum(axis=1, keepdims=True)
        soj: dict = {}
        for (i, _v, j), w in self.sojourn.items():
            prev = soj.get((i, 0, j))
            if prev is None:
                soj[(i, 0, j)] = w.copy()
            else:
                size = max(prev.size, w.size)
                acc = np.zeros(size)
                acc[: prev.size] += prev
                acc[: w.size] += w
                soj[(i, 0, j)] = acc
        return WismcModel(
            state_space=self.state_space,
            index_levels=IndexLevels(1, ()),
            index_config=self.index_config,
            p=probabilities_from_counts(counts),
            sojourn=soj,
            counts=counts,
            return_edges=self.return_edges,
        )

    # -- serialisation ---------------------------------------------------
    def to_dict(self) -> dict[str, Any]:
        labels = list(self.state_space.labels)
        cells = []
        for (i, v, j), w in sorted(self.sojourn.items()):
            weights = [int(x) for x in w] if np.all(w == np.round(w)) else [float(x) for x in w]
            cells.append({"from": labels[i], "level": v + 1, "to": labels[j], "weights": weights})
        return {
            "format_version": FORMAT_VERSION,
            "state_space": {
                "labels": labels,
                "representative_values": list(self.state_space.representative_values),
            },
            "return_edges": None if self.return_edges is None else list(self.return_edges),
            "index_levels": {"count": self.n_levels, "edges": list(self.index_levels.edges)},
            "index_config": {
                "lambda": self.index_config.lam,
                "memory": self.index_config.memory,
                "initial_index": self.index_config.initial_index,
            },
            "p": self.p.tolist(),
            "counts": None if self.counts is None else self.counts.tolist(),
            "sojourn": cells,
        }

    @classmethod
    def from_dict(cls, doc: dict[str, Any]) -> "WismcModel":
        version = doc.get("format_version")
        if version != FORMAT_VERSION:
            raise ModelError(f"unsupported model format_version {version!r}")
        ss = doc["state_space"]
        space = StateSpace(tuple(ss["labels"]), tuple(ss["representative_values"]))
        lv = doc["index_levels"]
        cfg = doc["index_config"]
        sojourn = {}
        for cell in doc["sojourn"]:
            key = (space.index_of(cell["from"]), int(cell["level"]) - 1, space.index_of(cell["to"]))
            sojourn[key] = cell["weights"]
        return cls(
            state_space=space,
            index_levels=IndexLevels(int(lv["count"]), tuple(lv["edges"])),
            index_config=IndexConfig(float(cfg["lambda"]), cfg["memory"], float(cfg["initial_index"])),
            p=np.array(doc["p"], dtype=float),
            sojourn=sojourn,
            counts=None if doc.get("counts") is None else np.array(doc["counts"]),
            return_edges=doc.get("return_edges"),
        )

    def save(self, path: str | Path) -> None:
        from .io import atomic_write_text

        atomic_write_text(path, json.dumps(self.to_dict(), indent=1) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "WismcModel":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def probabilities_from_counts(counts: np.ndarray) -> np.ndarray:
    """Row-normalise transition counts; rows without observations stay zero."""
    counts = np.asarray(counts, dtype=float)
    totals = counts.sum(axis=-1, keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore"):
        p = np.where(totals > 0, counts / totals, 0.0)
    return p


def _cdf_at(cdf: np.ndarray, t: int) -> float:
    if t < 1:
        return 0.0
    if t > cdf.size:
        return 1.0
    return float(cdf[t - 1])


def _level_index(model: WismcModel, v: int) -> int:
    if isinstance(v, bool) or not isinstance(v, (int, np.integer)) or not 1 <= v <= model.n_levels:
        raise UnknownLevel(v)
    return int(v) - 1


def sojourn_cdf_lookup(model: WismcModel, i: Hashable, j: Hashable, v: int, t: int) -> float:
    """G_ij(v; t): probability the sojourn is <= t given the move i -> j at level v.

    Returns 1 when ``p_ij(v) = 0``.
    """
    ii = model.state_space.index_of(i)
    jj = model.state_space.index_of(j)
    vv = _level_index(model, v)
    if ii == jj:
        raise ModelError("sojourn distribution undefined for i == j")
    if t < 1:
        raise ModelError("sojourn time must be >= 1")
    if model.p[ii, vv, jj] == 0:
        return 1.0
    return _cdf_at(model.cdf(ii, vv, jj), t)


def sojourn_marginal(model: WismcModel, i: Hashable, v: int, t: int) -> float:
    """H_i(v; t) = sum_j p_ij(v) G_ij(v; t)."""
    ii = model.state_space.index_of(i)
    vv = _level_index(model, v)
    if t < 1:
        raise ModelError("sojourn time must be >= 1")
    return float(sum(model.q(ii, vv, jj, t) for jj in range(model.n_states)))
