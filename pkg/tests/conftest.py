from __future__ import annotations

import pytest

# criterion number -> {"title", "outcomes": [(nodeid, outcome, seconds)]}
_CRITERIA: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion checked by this test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or report.when not in ("setup", "call"):
        return
    if report.when == "setup" and report.passed:
        return
    number, title = mark.args
    entry = _CRITERIA.setdefault(number, {"title": title, "outcomes": []})
    entry["outcomes"].append((item.nodeid, report.outcome, report.duration))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        entry = _CRITERIA[number]
        outcomes = entry["outcomes"]
        ok = all(o == "passed" for _, o, _ in outcomes)
        seconds = sum(d for _, _, d in outcomes)
        failed = [nid.split("::")[-1] for nid, o, _ in outcomes if o != "passed"]
        tail = f"  [failing: {', '.join(failed)}]" if failed else ""
        terminalreporter.write_line(
            f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {seconds:7.2f}s  {entry['title']}{tail}"
        )
