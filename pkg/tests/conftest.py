import numpy as np
import pytest


def random_spd(n, seed, scale=1.0):
    """G^T G + n I from a seeded uniform G."""
    g = np.random.default_rng(seed).uniform(-1, 1, size=(n, n))
    return scale * (g.T @ g + n * np.eye(n))


@pytest.fixture
def spd():
    return random_spd


_CRITERIA = []


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is not None and rep.when == "call":
        num, title = marker.args
        _CRITERIA.append((num, title, rep.outcome, getattr(item, "detail", "")))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num, title, outcome, detail in sorted(_CRITERIA):
        status = "PASS" if outcome == "passed" else "FAIL"
        line = f"{status}  [{num:>2}] {title}"
        if detail:
            line += f"  ({detail})"
        terminalreporter.write_line(line)


@pytest.fixture
def detail(request):
    """Attach a one-line summary to the acceptance report."""

    def _set(text):
        request.node.detail = text

    return _set
