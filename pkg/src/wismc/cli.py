"""Command-line entry point: ingest, fit, simulate, analyze, sweep, report, synth.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric/model error.
``--config FILE`` reads ``key = value`` lines (``#`` starts a comment) whose
keys are long flag names; flags given on the command line win.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from datetime import time
from pathlib import Path

import numpy as np

from . import __version__
from .discretize import ReturnBins, fit_return_bins
from .errors import ConflictingFlags, DataError, UnknownSubcommand, UsageError, WismcError
from .estimation import MIN_TRANSITIONS, build_trajectory, fit, occupancy_report
from .experiments import (
    DEFAULT_LAMBDAS,
    TruthSpec,
    compare_report,
    default_initial_index,
    make_synthetic_truth,
    sweep,
)
from .index import index_at_transitions
from .ingestion import parse_ticks, returns_from_ticks, sessions_from_schedule
from .io import atomic_write_text, format_csv, read_column, write_csv
from .model import IndexConfig, WismcModel
from .simulate import SimConfig, expand_to_minutes, simulate_paths, simulate_returns
from .stats import acf_raw, acf_squared, fpt_distribution

log = logging.getLogger("wismc")

SUBCOMMANDS = ("ingest", "fit", "simulate", "analyze", "sweep", "report", "synth")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _memory(text: str) -> int | None:
    if text.strip().lower() in ("inf", "none", "unbounded"):
        return None
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("memory must be >= 1 or 'inf'")
    return value


def _float_list(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _memory_list(text: str) -> list[int | None]:
    return [_memory(x) for x in text.split(",") if x.strip()]


def _schedule(text: str) -> tuple[time, time]:
    try:
        a, b = text.split("-")
        return time.fromisoformat(a.strip()), time.fromisoformat(b.strip())
    except ValueError:
        raise argparse.ArgumentTypeError("schedule must look like 09:00-17:30") from None


def _common(p: argparse.ArgumentParser, seed: bool = True, threads: bool = False) -> None:
    p.add_argument("--config", metavar="FILE", help="key = value file; command-line flags win")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    if seed:
        p.add_argument("--seed", type=int, default=0, help="master random seed")
    if threads:
        p.add_argument("--threads", type=int, default=os.cpu_count() or 1,
                       help="worker processes; results do not depend on it")


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = _Parser(prog="wismc", description="Weighted-indexed semi-Markov models for returns.")
    parser.add_argument("--version", action="version", version=f"wismc {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)

    p = sub.add_parser("ingest", help="tick CSV -> per-step returns CSV", formatter_class=fmt)
    p.add_argument("--ticks", required=True, help="CSV with timestamp,price[,session]")
    p.add_argument("--step", type=int, default=60, help="grid step in seconds")
    p.add_argument("--schedule", type=_schedule, default=None,
                   help="daily UTC session window HH:MM-HH:MM (overrides a session column)")
    p.add_argument("--out", required=True, help="output CSV t,return")
    _common(p, seed=False)

    p = sub.add_parser("fit", help="fit a model to a returns CSV", formatter_class=fmt)
    p.add_argument("--returns", required=True, help="CSV with a 'return' column")
    p.add_argument("--states", type=int, default=5, help="number of return states (odd)")
    p.add_argument("--levels", type=int, default=5, help="number of index levels")
    p.add_argument("--lambda", dest="lam", type=float, default=0.97, help="EWMA weight in (0, 1]")
    p.add_argument("--memory", type=_memory, default=None, help="memory in transitions or 'inf'")
    p.add_argument("--initial-index", type=float, default=None,
                   help="U_0; default is the squared return of the middle state")
    p.add_argument("--tick", type=float, default=None, help="round return edges to this step")
    p.add_argument("--bins-from", default=None, help="reuse the return states of this model JSON")
    p.add_argument("--min-transitions", type=int, default=MIN_TRANSITIONS,
                   help="refuse to fit on fewer transitions")
    p.add_argument("--out", required=True, help="output model JSON")
    _common(p, seed=False)

    p = sub.add_parser("simulate", help="simulate paths from a model", formatter_class=fmt)
    p.add_argument("--model", required=True, help="model JSON")
    p.add_argument("--horizon", type=int, required=True, help="path length in minutes")
    p.add_argument("--paths", type=int, default=1, help="number of paths")
    p.add_argument("--initial-state", default=None, help="label of J_0; default middle state")
    p.add_argument("--initial-index", type=float, default=None, help="U_0; default as in fit")
    p.add_argument("--burn-in", type=int, default=0, help="minutes dropped from each path")
    p.add_argument("--out", required=True, help="output directory, one path_NNN.csv per path")
    _common(p, threads=True)

    p = sub.add_parser("analyze", help="ACF and first-passage statistics of a returns CSV",
                       formatter_class=fmt)
    p.add_argument("--returns", required=True, help="CSV with a 'return' column")
    p.add_argument("--tau-max", type=int, default=100, help="largest ACF lag in minutes")
    p.add_argument("--rho", type=float, default=1.005, help="first-passage threshold")
    p.add_argument("--max-wait", type=int, default=1000, help="first-passage censoring horizon")
    p.add_argument("--model", default=None,
                   help="model JSON; if given also dump the index series n,T_n,U_n")
    p.add_argument("--out", required=True, help="output directory")
    _common(p, seed=False)

    p = sub.add_parser("sweep", help="lambda/memory sweep minimising squared-ACF MSE",
                       formatter_class=fmt)
    p.add_argument("--returns", required=True, help="CSV with a 'return' column")
    p.add_argument("--lambdas", type=_float_list, default=list(DEFAULT_LAMBDAS),
                   help="comma-separated lambda grid")
    p.add_argument("--memories", type=_memory_list, default=[None],
                   help="comma-separated memory grid, 'inf' for unbounded")
    p.add_argument("--states", type=int, default=5, help="number of return states (odd)")
    p.add_argument("--levels", type=int, default=5, help="number of index levels")
    p.add_argument("--tau-max", type=int, default=100, help="largest ACF lag in minutes")
    p.add_argument("--replicates", type=int, default=1, help="simulations averaged per cell")
    p.add_argument("--bins-from", default=None, help="reuse the return states of this model JSON")
    p.add_argument("--out", required=True, help="output CSV lambda,m,mse (summary next to it)")
    _common(p, threads=True)

    p = sub.add_parser("report", help="compare data with a simulation of a model",
                       formatter_class=fmt)
    p.add_argument("--returns", required=True, help="CSV with a 'return' column")
    p.add_argument("--model", required=True, help="model JSON")
    p.add_argument("--horizon", type=int, default=None, help="simulated minutes; default data length")
    p.add_argument("--tau-max", type=int, default=100, help="largest ACF lag in minutes")
    p.add_argument("--rho", type=float, default=1.005, help="first-passage threshold")
    p.add_argument("--max-wait", type=int, default=1000, help="first-passage censoring horizon")
    p.add_argument("--out", required=True, help="output directory")
    _common(p)

    p = sub.add_parser("synth", help="write a synthetic ground-truth model", formatter_class=fmt)
    p.add_argument("--states", type=int, default=5, help="number of return states (odd)")
    p.add_argument("--levels", type=int, default=5, help="number of index levels")
    p.add_argument("--lambda", dest="lam", type=float, default=0.97, help="EWMA weight in (0, 1]")
    p.add_argument("--memory", type=_memory, default=None, help="memory in transitions or 'inf'")
    p.add_argument("--dependence", type=float, default=TruthSpec.dependence,
                   help="strength of the index-level dependence (0 = plain semi-Markov)")
    p.add_argument("--kernel-seed", type=int, default=0, help="seed of the random kernel")
    p.add_argument("--calibration-minutes", type=int, default=TruthSpec.calibration_minutes,
                   help="pilot path length for level calibration")
    p.add_argument("--refine-rounds", type=int, default=TruthSpec.refine_rounds,
                   help="extra calibration rounds on long pilots (0 skips them)")
    p.add_argument("--out", required=True, help="output model JSON")
    p.add_argument("--returns-out", default=None, help="also write a simulated returns CSV here")
    p.add_argument("--horizon", type=int, default=100_000, help="length of --returns-out in minutes")
    _common(p)
    return parser


def _load_config(path: str) -> dict[str, str]:
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key = value")
            key, value = (x.strip() for x in line.split("=", 1))
            out[key.replace("-", "_").lstrip("_")] = value
    return out


def _subparser(parser: argparse.ArgumentParser, name: str) -> argparse.ArgumentParser:
    for action in parser._subparsers._group_actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices[name]
    raise UnknownSubcommand(name)


def _config_path(argv: list[str]) -> str | None:
    for k, tok in enumerate(argv):
        if tok == "--config" and k + 1 < len(argv):
            return argv[k + 1]
        if tok.startswith("--config="):
            return tok.split("=", 1)[1]
    return None


def _apply_config(sp: argparse.ArgumentParser, command: str, path: str) -> None:
    dests = {a.dest: a for a in sp._actions}
    defaults = {}
    for key, raw in _load_config(path).items():
        dest = "lam" if key == "lambda" else key
        action = dests.get(dest)
        if action is None or dest in ("config", "help"):
            raise UsageError(f"unknown config key {key!r} for {command}")
        if isinstance(action, argparse._StoreTrueAction):
            defaults[dest] = raw.lower() in ("1", "true", "yes", "on")
        elif action.type is not None:
            try:
                defaults[dest] = action.type(raw)
            except (ValueError, argparse.ArgumentTypeError) as exc:
                raise UsageError(f"config key {key!r}: {exc}") from None
        else:
            defaults[dest] = raw
        action.required = False
    sp.set_defaults(**defaults)


def parse_args(argv: list[str]) -> argparse.Namespace:
    parser = build_parser()
    if argv and not argv[0].startswith("-") and argv[0] not in SUBCOMMANDS:
        raise UnknownSubcommand(f"unknown subcommand {argv[0]!r}; choose from {', '.join(SUBCOMMANDS)}")
    config = _config_path(argv)
    if config and argv and argv[0] in SUBCOMMANDS:
        try:
            _apply_config(_subparser(parser, argv[0]), argv[0], config)
        except OSError as exc:
            raise UsageError(f"cannot read config: {exc}") from None
    args = parser.parse_args(argv)
    if args.command is None:
        raise UsageError("a subcommand is required: " + ", ".join(SUBCOMMANDS))
    return args


# -- subcommands -----------------------------------------------------------

def _bins_for(args, values: np.ndarray) -> ReturnBins:
    if args.bins_from:
        if getattr(args, "tick", None) is not None:
            raise ConflictingFlags("--tick cannot be combined with --bins-from")
        ref = WismcModel.load(args.bins_from)
        if ref.return_edges is not None:
            return ReturnBins(ref.return_edges, ref.state_space)
        return ReturnBins.from_state_space(ref.state_space)
    return fit_return_bins(values, args.states, getattr(args, "tick", None))


def cmd_ingest(args) -> int:
    with open(args.ticks, newline="") as fh:
        ticks = parse_ticks(fh)
    if args.schedule is not None:
        ticks = sessions_from_schedule(ticks, *args.schedule)
    rets = returns_from_ticks(ticks, args.step)
    write_csv(args.out, ("t", "return"), zip(rets.grid_times().tolist(), rets.values.tolist()))
    print(f"wrote {len(rets)} returns to {args.out}")
    return 0


def cmd_fit(args) -> int:
    values = read_column(args.returns, "return")
    bins = _bins_for(args, values)
    space = bins.state_space
    u0 = default_initial_index(space) if args.initial_index is None else args.initial_index
    config = IndexConfig(args.lam, args.memory, u0)
    model = fit(bins.discretize(values), space, config, args.levels,
                min_transitions=args.min_transitions, return_edges=bins.edges)
    model.save(args.out)
    print("return states")
    print(format_csv(("state", "lower", "upper", "representative"), (
        (lab, lo, hi, rep) for lab, lo, hi, rep in zip(
            space.labels, (-np.inf,) + tuple(bins.edges), tuple(bins.edges) + (np.inf,),
            space.representative_values))), end="")
    print("index levels")
    print(format_csv(("level", "upper_edge"), (
        (k + 1, e) for k, e in enumerate(model.index_levels.edges + (float("inf"),)))), end="")
    print("cell occupancy (transitions per state and level)")
    print(occupancy_report(model))
    return 0


def cmd_simulate(args) -> int:
    model = WismcModel.load(args.model)
    initial_state = args.initial_state
    if initial_state is not None:
        # labels in JSON keep their type; CLI text may stand for an integer label
        if initial_state not in model.state_space.labels:
            try:
                initial_state = int(initial_state)
            except ValueError:
                pass
    cfg = SimConfig(args.horizon, args.seed, initial_state, args.initial_index, args.paths, args.burn_in)
    results = simulate_paths(model, cfg, args.threads)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    width = max(3, len(str(cfg.n_paths - 1)))
    for k, res in enumerate(results):
        z = expand_to_minutes(res.trajectory, cfg.horizon)[cfg.burn_in:]
        r = model.state_space.values_of(z)
        t = np.arange(cfg.burn_in, cfg.horizon)
        write_csv(out / f"path_{k:0{width}d}.csv", ("t", "state", "return"),
                  zip(t.tolist(), z.tolist(), r.tolist()))
        if res.fallback_steps:
            log.info("path %d used level fallback on %d steps", k, res.fallback_steps)
    print(f"wrote {len(results)} path(s) of {cfg.horizon - cfg.burn_in} minutes to {out}")
    return 0


def cmd_analyze(args) -> int:
    values = read_column(args.returns, "return")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "acf_raw.csv", ("lag", "acf"), acf_raw(values, args.tau_max).rows())
    write_csv(out / "acf_squared.csv", ("lag", "acf"), acf_squared(values, args.tau_max).rows())
    fpt = fpt_distribution(values, args.rho, args.max_wait)
    write_csv(out / "fpt.csv", ("tau", "count", "censored", "pdf", "cdf"), zip(
        fpt.taus.tolist(), fpt.counts.tolist(), [fpt.censored] * fpt.max_wait,
        fpt.pdf().tolist(), fpt.cdf().tolist()))
    if args.model:
        model = WismcModel.load(args.model)
        bins = (ReturnBins(model.return_edges, model.state_space) if model.return_edges is not None
                else ReturnBins.from_state_space(model.state_space))
        traj = build_trajectory(bins.discretize(values))
        u = index_at_transitions(traj.states, traj.times, model.index_config, model.state_space)
        write_csv(out / "index.csv", ("n", "T_n", "U_n"),
                  zip(range(len(u)), traj.times.tolist(), u.tolist()))
    print(f"wrote analysis of {values.size} returns to {out}")
    return 0


def cmd_sweep(args) -> int:
    values = read_column(args.returns, "return")
    bins = _bins_for(args, values)
    result = sweep(values, args.lambdas, args.memories, seed=args.seed, n_states=args.states,
                   n_levels=args.levels, tau_max=args.tau_max, bins=bins,
                   replicates=args.replicates, threads=args.threads)
    write_csv(args.out, ("lambda", "m", "mse"), result.csv_rows())
    summary_path = Path(args.out).with_suffix(".json")
    atomic_write_text(summary_path, json.dumps(result.summary(), indent=1) + "\n")
    best = result.best
    for row in result.rows:
        mark = " *" if row is best else ""
        m = "inf" if row.memory is None else row.memory
        print(f"lambda={row.lam:<6g} m={m!s:<5} mse={row.mse:.6g}{mark}" + (f"  {row.error}" if row.error else ""))
    return 0 if best is not None else 3


def cmd_report(args) -> int:
    values = read_column(args.returns, "return")
    model = WismcModel.load(args.model)
    horizon = args.horizon or values.size
    report = compare_report(values, model, SimConfig(horizon, args.seed), args.tau_max,
                            args.rho, args.max_wait)
    report.write(args.out)
    print(f"mse(acf squared) = {report.summary['mse_acf_squared']:.6g}; report in {args.out}")
    return 0


def cmd_synth(args) -> int:
    spec = TruthSpec(n_states=args.states, n_levels=args.levels, lam=args.lam, memory=args.memory,
                     dependence=args.dependence, calibration_minutes=args.calibration_minutes,
                     refine_rounds=args.refine_rounds)
    model = make_synthetic_truth(spec, args.kernel_seed)
    model = WismcModel(model.state_space, model.index_levels, model.index_config, model.p,
                       model.sojourn, return_edges=ReturnBins.from_state_space(model.state_space).edges)
    model.save(args.out)
    if args.returns_out:
        r = simulate_returns(model, SimConfig(args.horizon, args.seed))
        write_csv(args.returns_out, ("t", "return"), zip(range(r.size), r.tolist()))
    print(f"wrote synthetic model to {args.out}")
    return 0


COMMANDS = {
    "ingest": cmd_ingest,
    "fit": cmd_fit,
    "simulate": cmd_simulate,
    "analyze": cmd_analyze,
    "sweep": cmd_sweep,
    "report": cmd_report,
    "synth": cmd_synth,
}


def run(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except WismcError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DataError.exit_code


def main() -> None:
    sys.exit(run())
