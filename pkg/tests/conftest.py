import re

_LINES = {}


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance" in report.nodeid:
        m = re.search(r"CRITERION \d+: .*", report.capstdout)
        if m:
            _LINES[report.nodeid] = m.group(0)


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_LINES.values(), key=lambda s: int(s.split()[1][:-1])):
            terminalreporter.write_line(line)
