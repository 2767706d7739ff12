from __future__ import annotations

import re

import pytest

from pondguard import DATA_DIR
from pondguard.rule_dsl import load

_CRITERION = re.compile(r"test_criterion_(\d+)_")
_results: dict[int, tuple[str, float]] = {}


@pytest.fixture(scope="session")
def data_dir():
    return DATA_DIR


@pytest.fixture(scope="session")
def baseline_rules():
    return load(DATA_DIR / "baseline.rbr")


def pytest_runtest_logreport(report):
    m = _CRITERION.search(report.nodeid)
    if not m or "test_acceptance.py" not in report.nodeid:
        return
    n = int(m.group(1))
    status, elapsed = _results.get(n, ("PASS", 0.0))
    if report.when == "call" or report.failed:
        elapsed += report.duration
    if report.failed:
        status = "FAIL"
    elif report.skipped and status != "FAIL":
        status = "SKIP"
    _results[n] = (status, elapsed)


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_results):
        status, elapsed = _results[n]
        terminalreporter.write_line(f"criterion {n:2d}: {status}  ({elapsed:.2f} s)")

