import pytest

_criteria = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion the test checks")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when != "call" and not report.failed:
        return
    n, title = marker.args
    entry = _criteria.setdefault(n, {"title": title, "ok": True, "notes": []})
    if report.failed:
        entry["ok"] = False
    for key, value in item.user_properties:
        if key == "detail":
            entry["notes"].append(f"{item.name.split('[')[-1].rstrip(']') if '[' in item.name else item.name}: {value}")


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        entry = _criteria[n]
        status = "PASS" if entry["ok"] else "FAIL"
        terminalreporter.write_line(f"[{status}] criterion {n}: {entry['title']}")
        for note in entry["notes"]:
            terminalreporter.write_line(f"         {note}")
