"""Shared pytest hooks: a per-criterion summary for the acceptance suite."""

import re

_CRITERION_RE = re.compile(r"test_criterion_(\d+)_([a-z0-9_]+)")
_results: dict[tuple[str, str], bool] = {}


def pytest_runtest_logreport(report):
    match = _CRITERION_RE.search(report.nodeid)
    if not match:
        return
    key = (match.group(1), match.group(2))
    if report.when == "call":
        _results[key] = report.passed
    elif report.failed:  # setup or teardown error
        _results[key] = False


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for num, slug in sorted(_results):
        status = "PASS" if _results[(num, slug)] else "FAIL"
        terminalreporter.write_line(f"[acceptance] criterion {num} {slug}: {status}")
