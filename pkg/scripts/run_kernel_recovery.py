"""Fit a model on data simulated from a known kernel and compare cell by cell.

    python scripts/run_kernel_recovery.py --minutes 500000
"""

from __future__ import annotations

import argparse

import numpy as np

from wismc.estimation import fit, occupancy_report
from wismc.experiments import TruthSpec, make_synthetic_truth
from wismc.simulate import SimConfig, expand_to_minutes, simulate_path


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--minutes", type=int, default=500_000)
    ap.add_argument("--kernel-seed", type=int, default=11)
    ap.add_argument("--seed", type=int, default=2024)
    args = ap.parse_args()

    truth = make_synthetic_truth(TruthSpec(lam=0.97), args.kernel_seed)
    traj = simulate_path(truth, SimConfig(args.minutes, seed=args.seed)).trajectory
    labels = expand_to_minutes(traj, args.minutes)
    model = fit(labels, truth.state_space, truth.index_config, index_levels=truth.index_levels)
    print(occupancy_report(model))
    n = model.counts.sum(axis=2, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.abs(model.p - truth.p) / np.sqrt(truth.p * (1 - truth.p) / n)
    z = z[(truth.p > 0) & (n >= 200)]
    print(f"{z.size} p entries in cells with >= 200 observations")
    print("|z| quantiles 50/90/99/max: " + " ".join(f"{q:.2f}" for q in np.quantile(z, [0.5, 0.9, 0.99, 1.0])))
    print(f"entries beyond 3 sigma: {int((z > 3).sum())} (about {0.0027 * z.size:.2f} expected by chance)")


if __name__ == "__main__":
    main()
