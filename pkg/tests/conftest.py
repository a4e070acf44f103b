"""Collects the one-line acceptance verdicts and prints them after the run."""
import pytest

_VERDICTS = []


@pytest.fixture
def verdict():
    def record(criterion, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'}  criterion {criterion}: {detail}"
        _VERDICTS.append(line)
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in _VERDICTS:
            terminalreporter.write_line(line)
