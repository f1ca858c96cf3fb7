from __future__ import annotations

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from fairfront.dataset import Dataset

settings.register_profile(
    "default", deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


def random_dataset(rng: np.random.Generator, n: int = 40, f: int = 3) -> Dataset:
    """Small dataset where every (group, class) cell is populated."""
    x = rng.normal(size=(n, f))
    z = rng.integers(0, 2, size=n)
    s = rng.integers(0, 2, size=n)
    # pin the first four rows to cover all four cells
    z[:4] = [0, 1, 0, 1]
    s[:4] = [0, 0, 1, 1]
    return Dataset(x, z, s)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)


@pytest.fixture
def toy() -> Dataset:
    return random_dataset(np.random.default_rng(7))


@pytest.fixture
def separable() -> Dataset:
    """Four points split by the sign of the first feature, two per group."""
    x = np.array([[2.0, 0.5], [1.5, -0.5], [-2.0, 0.3], [-1.0, -0.2]])
    return Dataset(x, np.array([1, 1, 0, 0]), np.array([0, 1, 0, 1]))


@pytest.fixture(scope="session")
def default_run(tmp_path_factory):
    """Output directory of ``fairfront sweep`` with every setting at its default.

    Shared by every test that inspects the default front; a full sweep takes
    most of a minute.
    """
    import json
    import time

    from fairfront.cli import main

    out = tmp_path_factory.mktemp("default_run")
    start = time.perf_counter()
    assert main(["sweep", "--out", str(out)]) == 0
    elapsed = time.perf_counter() - start
    (out / "timing.json").write_text(json.dumps({"sweep_seconds": elapsed}))
    return out


@pytest.fixture(scope="session")
def default_front(default_run):
    from fairfront.pareto import load_front

    return load_front(default_run / "front.json")


# Acceptance criteria register one line each here; the lines are echoed at the
# end of the run so they are visible without -s.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
