import pytest

import synthetic


@pytest.fixture(scope="session")
def national_path(tmp_path_factory):
    return synthetic.national_csv(tmp_path_factory.mktemp("data") / "national.csv",
                                  date_style="compact", blank_days=50)


@pytest.fixture(scope="session")
def state_path(tmp_path_factory):
    return synthetic.state_csv(tmp_path_factory.mktemp("data") / "states.csv")


@pytest.fixture(scope="session")
def flows_path(tmp_path_factory):
    return synthetic.flows_csv(tmp_path_factory.mktemp("data") / "flows.csv")


_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    if report.skipped:
        reason = report.longrepr[2] if isinstance(report.longrepr, tuple) else str(report.longrepr)
        _CRITERIA[number] = (title, "WAIVED", reason.removeprefix("Skipped: "))
    elif report.failed:
        _CRITERIA[number] = (title, "FAIL", report.when)
    elif report.when == "call":
        _CRITERIA[number] = (title, "PASS", "")


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, status, note = _CRITERIA[number]
        line = f"criterion {number}: {status} - {title}"
        if note and status != "PASS":
            line += f" ({note})"
        terminalreporter.write_line(line)
