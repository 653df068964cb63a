import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from qclab.grid import GridSpec

settings.register_profile(
    "seeded",
    max_examples=100,
    derandomize=True,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("seeded")


@pytest.fixture(scope="session")
def grid():
    """Default 1D grid: 2048 points on a box of length 40."""
    return GridSpec(1, 2048, 40.0)


@pytest.fixture(scope="session")
def small_grid():
    return GridSpec(1, 512, 20.0)


@pytest.fixture(scope="session")
def grid2d():
    return GridSpec(2, 256, 24.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_CRITERIA: dict[int, list[tuple[bool, str]]] = {}


@pytest.fixture(scope="session")
def record_criterion():
    """``record(number, passed, detail)``: collected into one line per acceptance criterion."""
    def record(number: int, passed: bool, detail: str) -> None:
        _CRITERIA.setdefault(number, []).append((bool(passed), detail))
    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        parts = _CRITERIA[number]
        verdict = "PASS" if all(ok for ok, _ in parts) else "FAIL"
        detail = "; ".join(d for _, d in parts)
        terminalreporter.write_line(f"criterion {number:2d}: {verdict}  {detail}")
