import pytest

_ACCEPTANCE: dict[int, str] = {}


@pytest.fixture
def record():
    """Record a one-line acceptance verdict, shown in the terminal summary."""

    def _record(number: int, passed: bool, detail: str) -> None:
        line = f"criterion {number}: {'PASS' if passed else 'FAIL'} | {detail}"
        _ACCEPTANCE[number] = line
        print(line)

    return _record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        terminalreporter.write_line(_ACCEPTANCE[n])
