import json

import pytest

from bosemarket import validate_grid

_criteria: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or rep.when != "call" and not (rep.when == "setup" and rep.failed):
        return
    number, title = marker.args
    entry = _criteria.setdefault(number, {"title": title, "failed": [], "ran": 0})
    entry["ran"] += 1
    if rep.failed:
        entry["failed"].append(item.name)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        entry = _criteria[number]
        verdict = "FAIL" if entry["failed"] else "PASS"
        line = f"criterion {number:>2}: {verdict}  {entry['title']}"
        if entry["failed"]:
            line += f"  (failed: {', '.join(entry['failed'])})"
        terminalreporter.write_line(line)


@pytest.fixture
def grid01():
    return validate_grid([(0, 1), (1, 1)])


@pytest.fixture
def grid_g2():
    return validate_grid([(0, 2), (1, 2), (2, 2)])


@pytest.fixture
def grid_g1():
    return validate_grid([(0, 1), (1, 1), (2, 1)])


@pytest.fixture
def grid15():
    return validate_grid([(0, 1), (1, 5)])


@pytest.fixture
def write_grid(tmp_path):
    def _write(levels, name="grid.json"):
        path = tmp_path / name
        path.write_text(json.dumps({"levels": [{"epsilon": e, "g": g} for e, g in levels]}))
        return str(path)

    return _write
