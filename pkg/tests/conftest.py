import time

import pytest

_LINES: list[str] = []


class Criterion:
    """Runs one acceptance check against its time budget and reports it."""

    def __init__(self, capsys):
        self._capsys = capsys

    def __call__(self, number: int, title: str, budget: float, body):
        start = time.perf_counter()
        failure = None
        detail = ""
        try:
            detail = body() or ""
        except AssertionError as exc:
            failure = exc
        elapsed = time.perf_counter() - start
        if failure is None and elapsed >= budget:
            failure = AssertionError(f"took {elapsed:.2f}s, budget {budget:g}s")
        status = "PASS" if failure is None else "FAIL"
        line = f"{status} criterion {number:>2}: {title} [{elapsed:.2f}s < {budget:g}s]"
        if detail:
            line += f" {detail}"
        if failure is not None:
            line += f" -- {str(failure).splitlines()[0] if str(failure) else 'assertion failed'}"
        _LINES.append(line)
        with self._capsys.disabled():
            print("\n" + line)
        if failure is not None:
            raise failure


@pytest.fixture
def criterion(capsys):
    return Criterion(capsys)


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_LINES, key=lambda l: int(l.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
