import pytest

ACCEPTANCE_LINES = []


@pytest.fixture
def record():
    """Record one acceptance line: record(number, passed, detail)."""
    def _record(number, passed, detail):
        line = "criterion %2d: %s  %s" % (number, "PASS" if passed else "FAIL", detail)
        ACCEPTANCE_LINES.append((number, line))
        print(line)
        return passed
    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(line)
