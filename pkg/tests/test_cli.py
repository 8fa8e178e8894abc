import json

import numpy as np
import pytest

from wismc.cli import run
from wismc.io import read_column, write_csv
from wismc.model import WismcModel


@pytest.fixture(scope="module")
def synth_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    code = run(["synth", "--out", str(d / "truth.json"), "--returns-out", str(d / "r.csv"),
                "--horizon", "60000", "--calibration-minutes", "40000", "--refine-rounds", "0", "--kernel-seed", "2", "--seed", "1"])
    assert code == 0
    r = read_column(d / "r.csv", "return")
    r = r + np.random.default_rng(0).uniform(-2e-4, 2e-4, r.size)
    write_csv(d / "noisy.csv", ("t", "return"), zip(range(r.size), r.tolist()))
    return d


def test_unknown_subcommand_is_usage_error(capsys):
    assert run(["frobnicate"]) == 1
    assert run([]) == 1
    assert run(["fit", "--returns", "x.csv"]) == 1


def test_missing_file_is_data_error(tmp_path):
    assert run(["analyze", "--returns", str(tmp_path / "nope.csv"), "--out", str(tmp_path)]) == 2


def test_bad_ticks_are_data_errors(tmp_path):
    ticks = tmp_path / "t.csv"
    ticks.write_text("timestamp,price\n60,1.0\n0,1.0\n")
    assert run(["ingest", "--ticks", str(ticks), "--out", str(tmp_path / "r.csv")]) == 2


def test_ingest(tmp_path):
    ticks = tmp_path / "t.csv"
    ticks.write_text("timestamp,price\n0,10\n90,11\n")
    assert run(["ingest", "--ticks", str(ticks), "--out", str(tmp_path / "r.csv")]) == 0
    assert (tmp_path / "r.csv").read_text() == "t,return\n0,0.0\n60,0.1\n"


def test_fit_prints_tables(synth_dir, capsys):
    out = synth_dir / "m.json"
    code = run(["fit", "--returns", str(synth_dir / "noisy.csv"), "--states", "5", "--levels", "5",
                "--lambda", "0.97", "--out", str(out)])
    assert code == 0
    text = capsys.readouterr().out
    assert "cell occupancy" in text and "v5" in text
    m = WismcModel.load(out)
    assert m.n_states == 5 and m.n_levels == 5 and m.index_config.lam == 0.97


def test_fit_with_conflicting_flags(synth_dir):
    code = run(["fit", "--returns", str(synth_dir / "r.csv"), "--bins-from", str(synth_dir / "truth.json"),
                "--tick", "0.001", "--out", str(synth_dir / "x.json")])
    assert code == 1


def test_config_file_and_flag_precedence(synth_dir):
    cfg = synth_dir / "fit.conf"
    cfg.write_text(f"returns = {synth_dir / 'noisy.csv'}\nlambda = 0.9\nlevels = 3  # comment\n"
                   f"out = {synth_dir / 'c.json'}\n")
    assert run(["fit", "--config", str(cfg), "--lambda", "0.95"]) == 0
    m = WismcModel.load(synth_dir / "c.json")
    assert m.index_config.lam == 0.95 and m.n_levels == 3
    cfg.write_text("bogus = 1\n")
    assert run(["fit", "--config", str(cfg)]) == 1


def test_simulate_is_reproducible(synth_dir):
    model = synth_dir / "truth.json"
    a, b = synth_dir / "sa", synth_dir / "sb"
    for out in (a, b):
        assert run(["simulate", "--model", str(model), "--horizon", "5000", "--seed", "42",
                    "--paths", "2", "--out", str(out)]) == 0
    for name in ("path_000.csv", "path_001.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    assert (a / "path_000.csv").read_bytes() != (a / "path_001.csv").read_bytes()
    assert (a / "path_000.csv").read_text().splitlines()[0] == "t,state,return"


def test_analyze_outputs(synth_dir):
    out = synth_dir / "an"
    assert run(["analyze", "--returns", str(synth_dir / "r.csv"), "--tau-max", "20",
                "--model", str(synth_dir / "truth.json"), "--out", str(out)]) == 0
    assert read_column(out / "acf_squared.csv", "acf").size == 20
    assert (out / "fpt.csv").read_text().splitlines()[0] == "tau,count,censored,pdf,cdf"
    u = read_column(out / "index.csv", "U_n")
    assert np.all(u >= 0)


def test_sweep_and_report(synth_dir):
    csv = synth_dir / "sweep.csv"
    assert run(["sweep", "--returns", str(synth_dir / "r.csv"), "--lambdas", "0.9,1.0",
                "--bins-from", str(synth_dir / "truth.json"), "--tau-max", "20",
                "--out", str(csv), "--threads", "1"]) == 0
    lines = csv.read_text().splitlines()
    assert lines[0] == "lambda,m,mse" and len(lines) == 3
    summary = json.loads(csv.with_suffix(".json").read_text())
    assert summary["argmin"]["lambda"] in (0.9, 1.0)
    out = synth_dir / "rep"
    assert run(["report", "--returns", str(synth_dir / "r.csv"), "--model", str(synth_dir / "truth.json"),
                "--tau-max", "20", "--max-wait", "100", "--out", str(out)]) == 0
    assert json.loads((out / "report.json").read_text())["format_version"] == 1
