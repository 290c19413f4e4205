import pytest

_VERDICTS: dict[int, str] = {}


@pytest.fixture
def verdict(request):
    """Record one PASS/FAIL line for an acceptance criterion.

    Call ``verdict(n, ok, detail)``; the line is printed immediately and again
    in the terminal summary.
    """

    def record(number: int, ok: bool, detail: str) -> bool:
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
        _VERDICTS[number] = line
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_VERDICTS):
        terminalreporter.write_line(_VERDICTS[n])
