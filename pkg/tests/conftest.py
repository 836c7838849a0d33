import numpy as np
import pytest

from magswim.swimmer import bundled_names, bundled_swimmer, decompose


@pytest.fixture(scope="session")
def dec_a():
    return decompose(bundled_swimmer("swimmer_a"))


@pytest.fixture(scope="session")
def dec_b():
    return decompose(bundled_swimmer("swimmer_b"))


@pytest.fixture(scope="session", params=sorted(bundled_names()))
def dec_any(request):
    return decompose(bundled_swimmer(request.param))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# ---------------------------------------------------------------------------
# acceptance reporting: one pass/fail line per quantitative criterion

_ACCEPTANCE: dict[str, tuple[int, str]] = {}


def pytest_configure(config):
    config.addinivalue_line(
        "markers",
        "acceptance(num, desc): quantitative acceptance criterion, reported "
        "as one pass/fail line in the terminal summary",
    )


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("acceptance")
        if mark is not None:
            _ACCEPTANCE[item.nodeid] = (mark.args[0], mark.args[1])


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = {}
    for outcome, reps in terminalreporter.stats.items():
        for rep in reps:
            nodeid = getattr(rep, "nodeid", "")
            if nodeid not in _ACCEPTANCE:
                continue
            when = getattr(rep, "when", None)
            if when == "call" or (when is not None and outcome in ("failed", "error", "skipped")):
                results[nodeid] = outcome
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid, (num, desc) in sorted(_ACCEPTANCE.items(), key=lambda kv: kv[1][0]):
        if nodeid not in results:
            continue
        word = "PASS" if results[nodeid] == "passed" else "FAIL"
        terminalreporter.write_line(f"criterion {num:2d}: {word} — {desc}")
