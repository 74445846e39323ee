"""Shared pytest configuration: per-criterion PASS/FAIL lines for the acceptance suite."""

from collections import OrderedDict

import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None)
settings.load_profile("default")

_CRITERIA: "OrderedDict[int, dict]" = OrderedDict()


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion this test checks")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    entry = _CRITERIA.setdefault(number, {"title": title, "passed": 0, "failed": [], "detail": []})
    if report.when == "call" or report.failed:
        if report.passed:
            entry["passed"] += 1
        elif report.failed:
            entry["failed"].append(item.name)
        for name, text in report.user_properties:
            if name == "detail":
                entry["detail"].append(text)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        e = _CRITERIA[number]
        status = "FAIL" if e["failed"] else "PASS"
        tr.write_line(f"[{status}] criterion {number}: {e['title']}")
        for d in e["detail"]:
            tr.write_line(f"         {d}")
        for name in e["failed"]:
            tr.write_line(f"         failing check: {name}")
