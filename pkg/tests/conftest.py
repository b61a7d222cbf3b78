import pytest

_LINES: list[str] = []


@pytest.fixture
def report():
    """Record a one-line acceptance verdict; all lines are echoed after the run."""
    def add(label: str, ok: bool | None, detail: str) -> bool | None:
        verdict = "INFO" if ok is None else ("PASS" if ok else "FAIL")
        line = f"{label} {verdict}  {detail}"
        _LINES.append(line)
        print(line)
        return ok
    return add


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in _LINES:
            terminalreporter.write_line(line)
