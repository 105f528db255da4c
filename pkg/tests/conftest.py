import time

import pytest

SUITE_BUDGET_S = 120.0

_results: dict[int, tuple[bool, str]] = {}
_started = [0.0]


def pytest_sessionstart(session):
    _started[0] = time.perf_counter()


@pytest.fixture
def criterion():
    """Record one acceptance line: ``criterion(number, ok, detail)``."""

    def record(number: int, ok: bool, detail: str) -> None:
        _results[number] = (bool(ok), detail)
        print(f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}")

    return record


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    elapsed = time.perf_counter() - _started[0]
    failed = len(terminalreporter.stats.get("failed", [])) + len(terminalreporter.stats.get("error", []))
    lines = dict(_results)
    if 10 in lines:
        ok, detail = lines[10]
        whole = failed == 0 and elapsed < SUITE_BUDGET_S
        lines[10] = (ok and whole, f"{detail}; suite {elapsed:.1f} s, {failed} failing test(s)")
    terminalreporter.write_sep("=", "acceptance criteria")
    for number in sorted(lines):
        ok, detail = lines[number]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}")
