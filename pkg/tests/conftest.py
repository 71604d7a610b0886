"""Shared pytest hooks.

The acceptance module records one line per criterion; the terminal summary
hook replays them after the test run so the pass/fail table is visible
without -s.
"""

import pytest


def pytest_configure(config):
    config._acceptance_lines = []


@pytest.fixture(scope="session")
def acceptance_log(request):
    """Return a recorder that stores and prints one acceptance line."""
    lines = request.config._acceptance_lines

    def record(line):
        lines.append(line)
        print(line)

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
