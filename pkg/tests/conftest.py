import sys
from pathlib import Path

# make tests/helpers.py importable regardless of invocation directory
sys.path.insert(0, str(Path(__file__).resolve().parent))

# Verdicts for the release gate in test_acceptance.py, echoed as one line per
# criterion at the end of the run so the outcome is visible at a glance.
_ACCEPTANCE_RESULTS = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1].split("[")[0]
    criterion = name.replace("test_", "", 1).replace("_", "-")
    if report.when == "call":
        _ACCEPTANCE_RESULTS[criterion] = report.outcome
    elif report.when == "setup" and report.outcome != "passed":
        _ACCEPTANCE_RESULTS[criterion] = report.outcome


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for criterion, outcome in _ACCEPTANCE_RESULTS.items():
        verdict = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"[ACCEPTANCE] {criterion}: {verdict}")
