from __future__ import annotations

import subprocess
import sys

import pytest

ACCEPTANCE_LINES: list[str] = []


def run_cli(*args, cwd=None, timeout=300):
    return subprocess.run([sys.executable, "-m", "yamabelab", *map(str, args)],
                          capture_output=True, text=True, cwd=cwd, timeout=timeout)


@pytest.fixture
def cli():
    return run_cli


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
