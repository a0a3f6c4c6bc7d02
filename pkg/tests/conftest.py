import pytest

_ACCEPTANCE = []


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py" in report.nodeid:
        _ACCEPTANCE.append(report)
    elif report.when == "setup" and report.failed and "test_acceptance.py" in report.nodeid:
        _ACCEPTANCE.append(report)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for rep in _ACCEPTANCE:
        name = rep.nodeid.split("::")[-1]
        status = "PASS" if rep.passed else "FAIL"
        detail = dict(rep.user_properties).get("detail", "")
        terminalreporter.write_line(f"{status}  {name}  {detail}".rstrip())


@pytest.fixture
def detail(record_property):
    """Attach a one-line measurement to the acceptance summary."""

    def _set(text):
        record_property("detail", text)

    return _set
