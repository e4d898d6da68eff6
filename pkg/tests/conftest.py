from __future__ import annotations

from pathlib import Path

import pytest

REPO = Path(__file__).resolve().parents[1]

_ACCEPTANCE: list[str] = []


@pytest.fixture
def criterion_log():
    """Collects one PASS/FAIL line per acceptance criterion for the terminal summary."""

    def record(name: str, ok: bool, detail: str = "") -> None:
        _ACCEPTANCE.append(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}".rstrip())
        print(_ACCEPTANCE[-1])

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)
