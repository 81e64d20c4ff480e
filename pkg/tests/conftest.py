import pytest

ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture
def criterion_line():
    """Record the one-line verdict for an acceptance criterion (printed in the summary)."""

    def record(number: int, ok: bool, text: str) -> None:
        line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {text}"
        ACCEPTANCE_LINES[number] = line
        print(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[number])
