import pytest

_ACCEPTANCE_FILE = "test_acceptance.py"
_lines: list = []
_unit_outcomes: dict = {}


def pytest_collection_modifyitems(items):
    # acceptance runs last so the unit-example criterion can see this session's results
    items.sort(key=lambda it: it.path.name == _ACCEPTANCE_FILE)


def pytest_runtest_logreport(report):
    if _ACCEPTANCE_FILE in report.nodeid:
        return
    if report.when == "call" or report.failed:
        prev = _unit_outcomes.get(report.nodeid)
        if prev != "failed":
            _unit_outcomes[report.nodeid] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if _lines:
        terminalreporter.section("acceptance criteria")
        for line in _lines:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def record():
    def _record(number: int, title: str, passed: bool, detail: str) -> None:
        line = f"{'PASS' if passed else 'FAIL'}  criterion {number}: {title} -- {detail}"
        _lines.append(line)
        print(line)

    return _record


@pytest.fixture(scope="session")
def unit_outcomes():
    return _unit_outcomes
