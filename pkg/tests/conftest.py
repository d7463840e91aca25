import pytest

_LINES: dict[int, str] = {}


@pytest.fixture(scope="session")
def report():
    """``report(n, ok, detail)`` records one summary line for acceptance criterion n."""
    def record(n: int, ok: bool, detail: str) -> bool:
        line = f"criterion {n} {'PASS' if ok else 'FAIL'}: {detail}"
        _LINES[n] = line
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(_LINES):
            terminalreporter.write_line(_LINES[n])
