import numpy as np
import pytest

from ecmkdv.experiment import paper_config, run
from ecmkdv.grid import GridFunction, TwoLevelState
from ecmkdv.scheme import SchemeConfig


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_state(rng, n=16, lam=None, dx=None, dt=None, scale=1.0):
    """Random two-level state and a matching scheme config."""
    lam = rng.uniform(-1, 1) if lam is None else lam
    dx = rng.uniform(0.05, 0.5) if dx is None else dx
    dt = rng.uniform(0.005, 0.1) if dt is None else dt
    cfg = SchemeConfig(lam, dt, n, 0.0, n * dx)
    s = TwoLevelState(
        GridFunction(scale * rng.normal(size=n), cfg.delta_x),
        GridFunction(scale * rng.normal(size=n), cfg.delta_x),
        dt,
    )
    return s, cfg


@pytest.fixture(scope="session")
def paper_runs():
    """EC(0.023) and EC(-0.07) at the benchmark settings, computed once."""
    return {lam: run(paper_config(lam)) for lam in (0.023, -0.07)}


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
