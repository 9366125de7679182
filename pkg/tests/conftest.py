import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

_CRITERIA: dict = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    number, title = mark.args
    entry = _CRITERIA.setdefault(number, {"title": title, "states": [], "notes": []})
    if report.when == "call" or (report.when == "setup" and not report.passed):
        if report.skipped:
            entry["states"].append("NOT RUN")
            reason = report.longrepr[2] if isinstance(report.longrepr, tuple) else str(report.longrepr)
            entry["notes"].append(reason.removeprefix("Skipped: "))
        else:
            entry["states"].append("PASS" if report.passed else "FAIL")


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        entry = _CRITERIA[number]
        states = entry["states"]
        if "FAIL" in states:
            status = "FAIL"
        elif states and all(s == "PASS" for s in states):
            status = "PASS"
        else:
            status = "NOT RUN"
        note = f" ({entry['notes'][0]})" if status == "NOT RUN" and entry["notes"] else ""
        terminalreporter.write_line(f"criterion {number}: {status:7} {entry['title']}{note}")
