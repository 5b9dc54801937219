from pathlib import Path

import pytest

FIXTURES = Path(__file__).parent / "fixtures"

_acceptance: dict[str, str] = {}


@pytest.fixture
def fixtures() -> Path:
    return FIXTURES


def pytest_runtest_logreport(report):
    if "test_acceptance.py" in report.nodeid and (report.when == "call" or report.failed):
        name = report.nodeid.split("::")[-1]
        if report.when == "call" or name not in _acceptance:
            _acceptance[name] = "PASS" if report.passed else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in sorted(_acceptance.items()):
        terminalreporter.write_line(f"{outcome}  {name}")
