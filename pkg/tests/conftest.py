import os
import sys

import numpy as np
import pytest
from hypothesis import settings

from wismc.model import IndexConfig, IndexLevels, StateSpace, WismcModel

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


def make_model(p, sojourn, reps=None, edges=(), lam=0.97, memory=None, counts=None):
    """Build a model from a dense p array and a {(i, v, j): weights} dict (0-based)."""
    p = np.asarray(p, dtype=float)
    s, L = p.shape[0], p.shape[1]
    if reps is None:
        reps = np.linspace(-1e-3, 1e-3, s).tolist()
    return WismcModel(
        StateSpace.from_values(reps),
        IndexLevels(L, tuple(edges)),
        IndexConfig(lam, memory),
        p,
        sojourn,
        counts=counts,
    )


@pytest.fixture
def flipflop():
    """Two states alternating deterministically with sojourns of exactly 2 minutes."""
    p = np.zeros((2, 1, 2))
    p[0, 0, 1] = p[1, 0, 0] = 1.0
    soj = {(0, 0, 1): [0, 1], (1, 0, 0): [0, 1]}
    return make_model(p, soj, reps=[-0.001, 0.001])


@pytest.fixture(scope="session")
def clustered_truth():
    from wismc.experiments import TruthSpec, make_synthetic_truth

    return make_synthetic_truth(TruthSpec(lam=0.97), kernel_seed=11)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(mod.RESULTS, key=lambda s: int(s.split("criterion ")[1].split()[0])):
        terminalreporter.write_line(line)
