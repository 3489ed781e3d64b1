import numpy as np
import pytest

# Worked example: two workers, three items, four classes.
EXAMPLE1_MATRIX = np.array([[1, 0, 4], [1, 3, 0]])
EXAMPLE1_TENSOR = np.array([
    [[1, 0, 0, 0],
     [0, 0, 0, 0],
     [0, 0, 0, 1]],
    [[1, 0, 0, 0],
     [0, 0, 1, 0],
     [0, 0, 0, 0]],
], dtype=float)

# Noise-free variant: both workers label every item identically.
EXAMPLE2_MATRIX = np.array([[1, 3, 4], [1, 3, 4]])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def example1_matrix():
    return EXAMPLE1_MATRIX.copy()


@pytest.fixture
def example1_tensor():
    return EXAMPLE1_TENSOR.copy()


# one PASS/FAIL/SKIP line per acceptance criterion, printed after the run
_CRITERIA: dict[str, tuple[str, str]] = {}


def pytest_runtest_logreport(report):
    name = report.nodeid.rpartition("::")[2]
    if "test_acceptance.py" not in report.nodeid or not name.startswith("test_criterion_"):
        return
    number, _, label = name[len("test_criterion_"):].partition("_")
    if report.when == "call" or report.skipped or report.failed:
        outcome = "PASS" if report.passed else "SKIP" if report.skipped else "FAIL"
        if report.when == "call" or number not in _CRITERIA:
            _CRITERIA[number] = (outcome, label.replace("_", " "))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA, key=int):
        outcome, label = _CRITERIA[number]
        terminalreporter.write_line(f"[{outcome}] criterion {number}: {label}")
