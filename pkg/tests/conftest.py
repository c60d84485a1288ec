"""Shared pytest plumbing: the acceptance suite records one line per
criterion and this hook prints them all at the end of the run."""
from __future__ import annotations

from contextlib import contextmanager

ACCEPTANCE_LINES: list[str] = []


@contextmanager
def criterion(num: int, desc: str):
    """Record PASS/FAIL for an acceptance criterion around its asserts."""
    try:
        yield
    except BaseException:
        ACCEPTANCE_LINES.append(f"ACCEPTANCE C{num} FAIL: {desc}")
        raise
    ACCEPTANCE_LINES.append(f"ACCEPTANCE C{num} PASS: {desc}")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
