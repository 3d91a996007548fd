import re

_CRITERION = re.compile(r"test_acceptance\.py::test_(p\d+)_(\w+)")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One PASS/FAIL line per acceptance criterion at the end of the run."""
    results = []
    for status, label in (("passed", "PASS"), ("failed", "FAIL"), ("error", "FAIL")):
        for report in terminalreporter.stats.get(status, []):
            match = _CRITERION.search(report.nodeid)
            if match:
                results.append((int(match.group(1)[1:]), match.group(2), label))
    if not results:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for number, name, label in sorted(results):
        terminalreporter.write_line(f"P{number} ({name}): {label}")
