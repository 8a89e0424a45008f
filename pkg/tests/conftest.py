import pytest

_CRITERIA = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    n, title = mark.args
    entry = _CRITERIA.setdefault(n, {"title": title, "ok": True, "ran": False, "why": ""})
    if report.when == "call" or report.failed or report.skipped:
        entry["ran"] = True
        if report.failed or report.skipped:
            entry["ok"] = False
            entry["why"] = entry["why"] or report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        e = _CRITERIA[n]
        status = "PASS" if e["ok"] and e["ran"] else "FAIL"
        extra = f" ({e['why']})" if e["why"] else ""
        terminalreporter.write_line(f"criterion {n:>2}: {status}  {e['title']}{extra}")
