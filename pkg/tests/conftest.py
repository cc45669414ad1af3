"""Collects acceptance outcomes and prints one PASS/FAIL line per criterion."""

import pytest

_CRITERIA = pytest.StashKey[dict]()


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): numbered acceptance criterion")
    config.stash[_CRITERIA] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or not (rep.when == "call" or rep.failed or rep.skipped):
        return
    n, title = mark.args
    entry = item.config.stash[_CRITERIA].setdefault(n, {"title": title, "ok": True, "detail": []})
    entry["ok"] = entry["ok"] and rep.passed
    entry["detail"] += [v for k, v in item.user_properties if k == "detail" and v not in entry["detail"]]


def pytest_terminal_summary(terminalreporter, config):
    results = config.stash[_CRITERIA]
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        r = results[n]
        detail = f" [{'; '.join(r['detail'])}]" if r["detail"] else ""
        terminalreporter.write_line(f"{'PASS' if r['ok'] else 'FAIL'} criterion {n}: {r['title']}{detail}")
