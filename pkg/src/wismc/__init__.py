"""Weighted-indexed semi-Markov chain models for high-frequency returns."""

__version__ = "0.1.0"

from .discretize import ReturnBins, discretize_series, fit_index_levels, fit_return_bins
from .estimation import build_trajectory, fit
from .index import IndexEvaluator, index_at_time, index_at_transitions
from .model import (
    IndexConfig,
    IndexLevels,
    StateSpace,
    Trajectory,
    WismcModel,
    sojourn_cdf_lookup,
    sojourn_marginal,
)
from .simulate import SimConfig, expand_to_minutes, simulate_path, simulate_paths, simulate_returns
from .stats import AcfCurve, FptSample, acf_raw, acf_squared, fpt_distribution, mse_acf

__all__ = [
    "AcfCurve",
    "FptSample",
    "IndexConfig",
    "IndexEvaluator",
    "IndexLevels",
    "ReturnBins",
    "SimConfig",
    "StateSpace",
    "Trajectory",
    "WismcModel",
    "acf_raw",
    "acf_squared",
    "build_trajectory",
    "discretize_series",
    "expand_to_minutes",
    "fit",
    "fit_index_levels",
    "fit_return_bins",
    "fpt_distribution",
    "index_at_time",
    "index_at_transitions",
    "mse_acf",
    "simulate_path",
    "simulate_paths",
    "simulate_returns",
    "sojourn_cdf_lookup",
    "sojourn_marginal",
]
