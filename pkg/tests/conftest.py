"""Shared test configuration.

The acceptance suite registers one human-readable pass/fail line per
acceptance criterion via ``record_criterion``; the lines are printed in the
terminal summary so the outcome of each criterion is visible even when pytest
captures stdout.
"""

from __future__ import annotations

_CRITERION_LINES: list[str] = []


def record_criterion(name: str, passed: bool, detail: str = "") -> None:
    status = "PASS" if passed else "FAIL"
    line = f"[{status}] {name}"
    if detail:
        line += f" — {detail}"
    _CRITERION_LINES.append(line)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _CRITERION_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in _CRITERION_LINES:
        terminalreporter.write_line(line)
