import pytest

ACCEPTANCE_LINES = []


@pytest.fixture
def report():
    """Record one acceptance line: ``report(number, passed, detail)``."""

    def _report(number, passed, detail):
        ACCEPTANCE_LINES.append(f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}")
        print(ACCEPTANCE_LINES[-1])
        return passed

    return _report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
