import time

import numpy as np
import pytest

SUITE_BUDGET_S = 180.0

_results = pytest.StashKey[list]()
_start = pytest.StashKey[float]()


def pytest_configure(config):
    config.stash[_results] = []
    config.stash[_start] = time.perf_counter()


@pytest.fixture
def criterion(request):
    """Record one acceptance line: ``criterion(num, ok, detail)``; asserts ``ok``."""
    seen = []

    def record(num, ok, detail=""):
        seen.append(num)
        request.config.stash[_results].append((num, bool(ok), detail))
        assert ok, f"criterion {num} failed: {detail}"

    yield record
    if not seen:
        # the test raised before it could report
        request.config.stash[_results].append((request.node.name, False, "raised before reporting"))


def pytest_sessionfinish(session, exitstatus):
    cfg = session.config
    if not cfg.stash[_results]:
        return
    elapsed = time.perf_counter() - cfg.stash[_start]
    ok = elapsed <= SUITE_BUDGET_S
    cfg.stash[_results].append((12, ok, f"full suite wall clock {elapsed:.1f} s (budget {SUITE_BUDGET_S:.0f} s)"))
    if not ok:
        session.exitstatus = 1


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    rows = config.stash[_results]
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for num, ok, detail in sorted(rows, key=lambda r: (isinstance(r[0], str), r[0])):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {num}: {detail}")


@pytest.fixture
def gen():
    return np.random.default_rng(12345)
