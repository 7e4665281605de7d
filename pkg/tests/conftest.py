"""Shared fixtures and the acceptance summary printed at the end of a run."""
from __future__ import annotations

import pytest

from kirillov_lab.suites import SuiteConfig, run_suite

ACCEPTANCE_LINES: list[str] = []
_REPORTS: dict = {}


def suite_report(name: str):
    """Run a suite with its default configuration once per session."""
    if name not in _REPORTS:
        _REPORTS[name] = run_suite(SuiteConfig(name))
    return _REPORTS[name]


@pytest.fixture
def record_verdict():
    def _record(line: str):
        ACCEPTANCE_LINES.append(line)
        print(line)
    return _record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
