import numpy as np
import pytest

# one line per acceptance criterion, filled by test_acceptance
ACCEPTANCE_LINES: list[str] = []


def pytest_addoption(parser):
    parser.addoption("--full", action="store_true", default=False, help="run paper-scale (slow) checks")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: paper-scale runs, enabled with --full")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--full"):
        return
    skip = pytest.mark.skip(reason="paper-scale run; use --full")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_spd(rng, n, cond=10.0):
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    w = np.geomspace(1.0, cond, n)
    return (q * w) @ q.T


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
