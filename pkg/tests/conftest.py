"""Shared fixtures and the acceptance summary reporter.

Acceptance tests record one line per criterion through the
acceptance_report fixture; the terminal summary prints them all in
order, including lines for criteria that are expected to fail.
"""

import numpy as np
import pytest

_LINES = {}


@pytest.fixture
def acceptance_report():
    """Record a '[A..] PASS/FAIL' line for the final summary.

    Call before asserting so expected failures still leave their line.
    """

    def record(key: str, passed: bool, detail: str):
        tag = "PASS" if passed else "FAIL"
        _LINES[key] = f"[A{key}] {tag} {detail}"

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_LINES):
        terminalreporter.write_line(_LINES[key])


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
