import numpy as np
import pytest

# reference matrices shared across test modules
A_SMALL = 0.5 * np.array([[-1.0, 1.0], [-1.0, -1.0]])
A_FOUR = np.array([
    [0.0, 0.23, 0.56, 0.56],
    [0.51, 0.0, 0.56, 0.09],
    [-0.27, -0.12, 0.0, 0.4],
    [0.51, 0.15, 0.57, 0.0],
])
D_FOUR = np.array([0.9994, 0.585, 1.8213, 0.9629])
A_FEEDBACK = np.array([[-1.0, -1.0], [1.0, -1.0]])

_acceptance = []


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, text): exit criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is not None and report.when == "call":
        number, text = marker.args
        _acceptance.append((number, text, report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for number, text, outcome in sorted(_acceptance):
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"[{status}] criterion {number:>2}: {text}")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
