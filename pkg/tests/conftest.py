import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from pseudosym import catalog
from pseudosym import classifier as C
from pseudosym.metric import default_grid

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def melvin_entry():
    return catalog.melvin(1.0)


@pytest.fixture(scope="session")
def melvin_sampled(melvin_entry):
    grid = default_grid(melvin_entry.metric, {"B0": 1.0})
    return C.sample(melvin_entry.metric, grid, melvin_entry.fields)


@pytest.fixture(scope="session")
def melvin_at_one(melvin_entry):
    from pseudosym.metric import make_grid
    grid = make_grid(melvin_entry.metric, {"r": [1.0]}, {"B0": 1.0})
    return C.sample(melvin_entry.metric, grid, melvin_entry.fields)


@pytest.fixture(scope="session")
def minkowski_sampled():
    entry = catalog.minkowski_cylindrical()
    return C.sample(entry.metric, default_grid(entry.metric))


@pytest.fixture(scope="session")
def base_sampled():
    entry = catalog.base_3metric("ln(1+r)")
    grid = default_grid(entry.metric)
    return entry, C.sample(entry.metric, grid)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# one line per acceptance criterion, printed after the run
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
