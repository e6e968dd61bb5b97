"""Print one status line per acceptance criterion after the test run.

The acceptance tests are named ``test_criterion_NN_<slug>``; this hook
collects their outcomes and appends an "acceptance criteria" section to
the terminal summary with a single PASS/FAIL/SKIP line for each, so the
gate can be read off any pytest run without digging through the log.
"""

import re

_CRITERION = re.compile(r"::test_criterion_(\d{2})_(\w+)")
_results = {}


def pytest_runtest_logreport(report):
    match = _CRITERION.search(report.nodeid)
    if match is None:
        return
    key = (int(match.group(1)), match.group(2).replace("_", " "))
    if report.failed:
        _results[key] = "FAIL"
    elif report.skipped:
        _results.setdefault(key, "SKIP")
    elif report.when == "call" and report.passed:
        _results.setdefault(key, "PASS")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for (number, slug), status in sorted(_results.items()):
        terminalreporter.write_line(f"[criterion {number:02d}] {slug}: {status}")
