import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

_criteria: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion this test belongs to")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        n, title = mark.args
        entry = _criteria.setdefault(n, {"title": title, "parts": []})
        entry["parts"].append((item.name, "passed" if rep.passed else rep.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(_criteria):
        entry = _criteria[n]
        failed = [name for name, outcome in entry["parts"] if outcome != "passed"]
        status = "PASS" if not failed else "FAIL"
        extra = f"  [failing: {', '.join(failed)}]" if failed else ""
        tr.write_line(f"criterion {n:2d} {status}  {entry['title']}{extra}")
