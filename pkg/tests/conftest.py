import pytest

ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance_line():
    """Record one PASS/FAIL line; the lines are repeated at the end of the session."""

    def record(k, ok, message):
        line = f"{'PASS' if ok else 'FAIL'} criterion {k}: {message}"
        print(line)
        ACCEPTANCE_LINES.append((k, line))
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(line)
