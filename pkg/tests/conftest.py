"""Shared fixtures and the acceptance summary hook.

test_acceptance.py registers one line per numbered criterion; the hook
prints them after the run so the gate status is readable at a glance.
"""

import re

import numpy as np
import pytest

from sidare.analysis import REFERENCE_SCENARIOS
from sidare.model import INITIAL_STATE, ModelParams
from sidare.pmp import SweepConfig, solve
from sidare.simulate import Strategy, TimeGrid

_ACCEPTANCE = {}


def record_acceptance(label, passed: bool, detail: str) -> None:
    _ACCEPTANCE[str(label)] = (passed, detail)


def _label_key(label):
    m = re.match(r"(\d+)", label)
    return (int(m.group(1)) if m else 99, label)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(_ACCEPTANCE, key=_label_key):
        passed, detail = _ACCEPTANCE[label]
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"ACCEPTANCE {label}: {status} - {detail}")


@pytest.fixture(scope="session")
def grid():
    return TimeGrid()


@pytest.fixture(scope="session")
def params():
    return ModelParams()


@pytest.fixture(scope="session")
def reference_solutions():
    """Converged solutions for the eight reference scenarios, solved once."""
    out = {}
    for idx, scenario in enumerate(REFERENCE_SCENARIOS):
        out[idx] = solve(scenario.params(), INITIAL_STATE,
                         scenario.weights(), SweepConfig())
    return out


def random_admissible_strategies(grid: TimeGrid, count: int, u_max: float,
                                 seed: int = 2024):
    """Deterministic mix of piecewise-constant and smooth admissible controls."""
    rng = np.random.default_rng(seed)
    times = grid.times()
    out = []
    for j in range(count):
        if j % 2 == 0:
            n_seg = int(rng.integers(1, 12))
            bounds = np.sort(rng.choice(
                np.arange(1, grid.n_nodes - 1), size=n_seg - 1, replace=False)) \
                if n_seg > 1 else np.array([], dtype=int)
            levels = rng.uniform(0.0, u_max, n_seg)
            values = np.empty(grid.n_nodes)
            edges = np.concatenate(([0], bounds, [grid.n_nodes]))
            for k in range(n_seg):
                values[edges[k]:edges[k + 1]] = levels[k]
        else:
            freq = rng.uniform(0.5, 3.0)
            phase = rng.uniform(0.0, 2.0 * np.pi)
            amp = rng.uniform(0.1, 0.5)
            base = rng.uniform(0.1, u_max - 0.1)
            values = np.clip(
                base + amp * np.sin(2.0 * np.pi * freq * times / grid.horizon
                                    + phase),
                0.0, u_max)
        out.append(Strategy(grid, values))
    return out
