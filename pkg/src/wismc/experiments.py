"""Validation experiments: synthetic ground truth, lambda/memory sweeps and
model-versus-data comparison reports."""

from __future__ import annotations

import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .discretize import ReturnBins, fit_index_levels, fit_return_bins
from .errors import WismcError
from .estimation import fit
from .index import index_at_transitions
from .io import atomic_write_text, write_csv
from .model import IndexConfig, IndexLevels, StateSpace, WismcModel
from .rng import derive_seed, stream
from .simulate import SimConfig, expand_to_minutes, simulate_path, simulate_returns
from .stats import (
    DEFAULT_RHO,
    DEFAULT_TAU_MAX,
    acf_raw,
    acf_squared,
    fpt_distribution,
    mse_acf,
)

log = logging.getLogger(__name__)

DEFAULT_LAMBDAS = (0.90, 0.92, 0.94, 0.96, 0.98, 1.00)
DEFAULT_MEMORIES = (10, 50, 100, 500, None)


# -- synthetic ground truth ------------------------------------------------

@dataclass(frozen=True)
class TruthSpec:
    """Shape of a synthetic model.

    ``dependence`` scales how strongly the kernel reacts to the index level;
    0 gives identical rows on every level. Returns are ``scale`` times evenly
    spaced values in [-1, 1], so the middle state has return 0.
    """

    n_states: int = 5
    n_levels: int = 5
    lam: float = 0.97
    memory: int | None = None
    dependence: float = 0.75
    scale: float = 1e-3
    quiet_mean: float = 4.0
    quiet_tilt: float = 1.0
    exit_tilt: float = 3.0
    mirror_tilt: float = -2.0
    calibration_minutes: int = 300_000
    calibration_rounds: int = 8
    refine_minutes: int = 1_000_000
    refine_rounds: int = 4


def _geometric_mixture(means: Sequence[float], weights: Sequence[float]) -> np.ndarray:
    """Weights on t = 1.. of a mixture of geometric laws, truncated at 1e-12 survival."""
    probs = [1.0 / m for m in means]
    tail = max(math.ceil(math.log(1e-12) / math.log1p(-q)) if q < 1 else 1 for q in probs)
    t = np.arange(1, tail + 1)
    pmf = np.zeros(tail)
    for q, w in zip(probs, weights):
        pmf += w * (q * (1 - q) ** (t - 1) if q < 1 else (t == 1))
    return pmf


def _sigmoid(x: float) -> float:
    return 1.0 / (1.0 + math.exp(-x))


def _logit(p: float) -> float:
    return math.log(p / (1 - p))


def _truth_kernel(spec: TruthSpec, rng: np.random.Generator, levels: IndexLevels):
    s, L, d = spec.n_states, spec.n_levels, spec.dependence
    mid, half = s // 2, s // 2
    mag = np.abs(np.arange(s) - mid)
    tilt = np.linspace(-1.0, 1.0, L) if L > 1 else np.zeros(1)
    # level-free ingredients drawn once from the kernel seed
    jump_w = rng.dirichlet(np.full(half, 2.0), size=s)
    to_mid_base = rng.uniform(0.35, 0.6, size=s)
    mirror_base = rng.uniform(0.3, 0.6, size=s)
    mix_w = rng.dirichlet([2.0, 2.0])
    mix_scale = rng.uniform(0.4, 0.7)

    p = np.zeros((s, L, s))
    sojourn = {}
    for i in range(s):
        for v in range(L):
            b = d * tilt[v]
            w = jump_w[i] * np.exp(2.0 * b * np.arange(1, half + 1) / half)
            row = np.zeros(s)
            if i == mid:
                for j in range(s):
                    if j != mid:
                        row[j] = 0.5 * w[mag[j] - 1]
                row /= row.sum()
                mean = 1.0 + (spec.quiet_mean - 1.0) * math.exp(-spec.quiet_tilt * b)
                means = (1.0 + mix_scale * (mean - 1.0), 1.0 + (mean - 1.0) / mix_scale)
                weights = _geometric_mixture(means, mix_w)
            else:
                mirror = _sigmoid(_logit(mirror_base[i]) + spec.mirror_tilt * b)
                to_mid = _sigmoid(_logit(to_mid_base[i]) - spec.exit_tilt * b)
                w[mag[i] - 1] = 0.0
                for j in range(s):
                    if j != mid and mag[j] != mag[i]:
                        row[j] = 0.5 * w[mag[j] - 1]
                rest = 1.0 - mirror
                if row.sum() > 0:
                    row *= rest * (1 - to_mid) / row.sum()
                    row[mid] = rest * to_mid
                else:
                    row[mid] = rest
                row[s - 1 - i] = mirror
                row /= row.sum()
                # keep = (1 - keep) * mirror makes the next return a fair coin given the past
                keep = mirror / (1.0 + mirror)
                weights = _geometric_mixture((1.0 / (1.0 - keep),), (1.0,))
            p[i, v] = row
            for j in np.flatnonzero(row):
                sojourn[(i, v, int(j))] = weights
    return p, sojourn


def make_synthetic_truth(spec: TruthSpec = TruthSpec(), kernel_seed: int = 0) -> WismcModel:
    """A random valid model whose returns are uncorrelated but clustered.

    A nonzero state stays each further minute with probability ``keep`` and
    on leaving jumps to its mirror state with probability ``mirror``, else to
    the middle state or to another magnitude with a fair sign. Choosing
    ``keep = (1 - keep) * mirror`` makes every return a fair coin given the
    past, so raw returns are uncorrelated at all lags, while magnitudes
    persist. Higher index levels favour larger magnitudes, fewer returns to
    the middle state and shorter quiet spells; ``dependence`` controls by how
    much. Level edges are calibrated towards the index quantiles of the
    model's own pilot paths by a damped fixed-point iteration, so that a
    quantile-level fit on simulated data partitions the index the same way.
    """
    if spec.n_states < 3 or spec.n_states % 2 == 0:
        raise ValueError("synthetic truth needs an odd state count >= 3")
    reps = spec.scale * np.linspace(-1.0, 1.0, spec.n_states)
    reps[spec.n_states // 2] = 0.0
    space = StateSpace.from_values(reps.tolist())
    mid_r2 = 0.0
    config = IndexConfig(spec.lam, spec.memory, mid_r2)
    L = spec.n_levels
    if L == 1:
        p, sojourn = _truth_kernel(spec, stream(kernel_seed, "truth"), IndexLevels(1, ()))
        return WismcModel(space, IndexLevels(1, ()), config, p, sojourn)

    def pilot_quantiles(edges: np.ndarray, minutes: int, rnd: int) -> np.ndarray:
        levels = IndexLevels(L, tuple(edges.tolist()))
        p, sojourn = _truth_kernel(spec, stream(kernel_seed, "truth"), levels)
        model = WismcModel(space, levels, config, p, sojourn)
        cfg = SimConfig(horizon=minutes, seed=derive_seed(kernel_seed, "calibrate", rnd))
        traj = simulate_path(model, cfg).trajectory
        u = index_at_transitions(traj.states, traj.times, config, space)[1:-1]
        return np.asarray(fit_index_levels(u, L).edges)

    # placeholder edges spanning the attainable index range
    top = float(reps[-1] ** 2)
    edges = top * np.arange(1, L) / L
    # Coarse phase: half steps. The edge-to-quantile map has a slope near -3,
    # so half steps settle into a period-2 swing around the fixed point and
    # the mean of the last iterates sits close to it.
    history = []
    for rnd in range(max(1, spec.calibration_rounds)):
        q = pilot_quantiles(edges, spec.calibration_minutes, rnd)
        edges = q if rnd == 0 else 0.5 * (edges + q)
        history.append(edges)
    edges = np.mean(history[-4:], axis=0)
    # fine phase: quarter steps contract at that slope, on longer pilots
    for rnd in range(spec.refine_rounds):
        q = pilot_quantiles(edges, spec.refine_minutes, 1000 + rnd)
        edges = 0.75 * edges + 0.25 * q
    levels = IndexLevels(L, tuple(edges.tolist()))
    rng = stream(kernel_seed, "truth")
    p, sojourn = _truth_kernel(spec, rng, levels)
    return WismcModel(space, levels, config, p, sojourn)


def default_initial_index(space: StateSpace) -> float:
    return space.representative_values[space.size // 2] ** 2


# -- sweeps ----------------------------------------------------------------

@dataclass(frozen=True)
class SweepRow:
    lam: float
    memory: int | None
    mse: float
    error: str | None = None


@dataclass(frozen=True)
class SweepResult:
    rows: tuple
    replicates: int = 1

    @property
    def best(self) -> SweepRow | None:
        ok = [r for r in self.rows if r.error is None and math.isfinite(r.mse)]
        return min(ok, key=lambda r: r.mse) if ok else None

    def csv_rows(self):
        for r in self.rows:
            yield (r.lam, "inf" if r.memory is None else r.memory,
                   r.mse if r.error is None else "nan")

    def summary(self) -> dict:
        best = self.best
        return {
            "format_version": 1,
            "replicates": self.replicates,
            "argmin": None if best is None else {"lambda": best.lam, "m": best.memory, "mse": best.mse},
            "errors": [{"lambda": r.lam, "m": r.memory, "error": r.error} for r in self.rows if r.error],
        }


@dataclass(frozen=True)
class _Cell:
    data: np.ndarray
    bins: ReturnBins
    lam: float
    memory: int | None
    n_levels: int
    seed: int
    tau_max: int
    replicates: int
    target: np.ndarray = field(repr=False)


def _sweep_cell(cell: _Cell) -> SweepRow:
    try:
        space = cell.bins.state_space
        labels = cell.bins.discretize(cell.data)
        config = IndexConfig(cell.lam, cell.memory, default_initial_index(space))
        model = fit(labels, space, config, cell.n_levels)
        errs = []
        for rep in range(cell.replicates):
            seed = derive_seed(cell.seed, "sweep", cell.lam, cell.memory, rep)
            sim = simulate_returns(model, SimConfig(horizon=cell.data.size, seed=seed))
            errs.append(mse_acf_values(cell.target, acf_squared(sim, cell.tau_max).values))
        return SweepRow(cell.lam, cell.memory, float(np.mean(errs)))
    except WismcError as exc:
        return SweepRow(cell.lam, cell.memory, math.nan, f"{type(exc).__name__}: {exc}")


def mse_acf_values(a: np.ndarray, b: np.ndarray) -> float:
    d = np.asarray(a) - np.asarray(b)
    return float(np.mean(d * d))


def sweep(
    data,
    lambdas: Sequence[float] = DEFAULT_LAMBDAS,
    memories: Sequence[int | None] = (None,),
    *,
    seed: int = 0,
    n_states: int = 5,
    n_levels: int = 5,
    tau_max: int = DEFAULT_TAU_MAX,
    bins: ReturnBins | None = None,
    replicates: int = 1,
    threads: int = 1,
) -> SweepResult:
    """Fit, simulate a series as long as the data and score the squared-return
    ACF distance for every (lambda, memory) pair.

    Failures in one cell are recorded in that row and do not stop the sweep.
    """
    values = np.asarray(getattr(data, "values", data), dtype=float)
    if not lambdas or not memories:
        raise ValueError("sweep grids must be non-empty")
    if bins is None:
        bins = fit_return_bins(values, n_states)
    target = acf_squared(values, tau_max).values
    cells = [
        _Cell(values, bins, float(lam), m, n_levels, seed, tau_max, replicates, target)
        for lam in lambdas for m in memories
    ]
    if threads > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(_sweep_cell, cells))
    else:
        rows = [_sweep_cell(c) for c in cells]
    return SweepResult(tuple(rows), replicates)


def noise_floor(model: WismcModel, horizon: int, seed: int = 0, tau_max: int = DEFAULT_TAU_MAX,
                pairs: int = 4) -> float:
    """Mean squared-ACF MSE between independent resimulations of one model."""
    errs = []
    for k in range(pairs):
        a = simulate_returns(model, SimConfig(horizon, seed=derive_seed(seed, "floor", k, 0)))
        b = simulate_returns(model, SimConfig(horizon, seed=derive_seed(seed, "floor", k, 1)))
        errs.append(mse_acf(acf_squared(a, tau_max), acf_squared(b, tau_max)))
    return float(np.mean(errs))


# -- comparison report -----------------------------------------------------

@dataclass(frozen=True, eq=False)
class Report:
    summary: dict
    tables: dict  # file name -> (header, rows)

    def write(self, out_dir: str | Path) -> None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for name, (header, rows) in self.tables.items():
            write_csv(out / name, header, rows)
        atomic_write_text(out / "report.json", json.dumps(self.summary, indent=1, sort_keys=True) + "\n")


def compare_report(data, model: WismcModel, cfg: SimConfig, tau_max: int = DEFAULT_TAU_MAX,
                   rho: float = DEFAULT_RHO, max_wait: int = 1000) -> Report:
    """ACF, squared-ACF and first-passage comparison of data against one simulated path.

    The simulated path has the data's length unless ``cfg.horizon`` says otherwise.
    """
    values = np.asarray(getattr(data, "values", data), dtype=float)
    res = simulate_path(model, cfg)
    sim = model.state_space.values_of(expand_to_minutes(res.trajectory, cfg.horizon))[cfg.burn_in:]
    raw_d, raw_s = acf_raw(values, tau_max), acf_raw(sim, tau_max)
    sq_d, sq_s = acf_squared(values, tau_max), acf_squared(sim, tau_max)
    wait = min(max_wait, values.size, sim.size)
    fpt_d = fpt_distribution(values, rho, wait)
    fpt_s = fpt_distribution(sim, rho, wait)

    def fpt_rows(f):
        return zip(f.taus.tolist(), f.counts.tolist(), f.pdf().tolist(), f.cdf().tolist())

    summary = {
        "format_version": 1,
        "n_data": int(values.size),
        "n_sim": int(sim.size),
        "seed": cfg.seed,
        "lambda": model.index_config.lam,
        "memory": model.index_config.memory,
        "tau_max": tau_max,
        "mse_acf_squared": mse_acf(sq_d, sq_s),
        "mse_acf_raw": mse_acf(raw_d, raw_s),
        "fpt": {
            "rho": rho,
            "max_wait": wait,
            "data": {"starts": fpt_d.n_starts, "censored": fpt_d.censored},
            "sim": {"starts": fpt_s.n_starts, "censored": fpt_s.censored},
        },
        "fallback": {"steps": res.fallback_steps, "transitions": len(res.trajectory) - 1},
    }
    acf_header = ("lag", "data", "sim")
    fpt_header = ("tau", "count", "pdf", "cdf")
    tables = {
        "acf_raw.csv": (acf_header, list(zip(raw_d.lags.tolist(), raw_d.values.tolist(), raw_s.values.tolist()))),
        "acf_squared.csv": (acf_header, list(zip(sq_d.lags.tolist(), sq_d.values.tolist(), sq_s.values.tolist()))),
        "fpt_data.csv": (fpt_header, list(fpt_rows(fpt_d))),
        "fpt_sim.csv": (fpt_header, list(fpt_rows(fpt_s))),
    }
    return Report(summary, tables)
