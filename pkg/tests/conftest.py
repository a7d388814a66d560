"""Repeat the acceptance-criterion lines in the terminal summary.

The criteria print ``[PASS]`` / ``[FAIL]`` lines; pytest captures stdout, so
they are collected here and shown once at the end of every run.
"""

_LINES = []


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance" in report.nodeid:
        _LINES.extend(l for l in report.capstdout.splitlines() if l.startswith(("[PASS]", "[FAIL]")))


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in _LINES:
            terminalreporter.write_line(line)
