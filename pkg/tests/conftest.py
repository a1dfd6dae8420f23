import sys
from collections import defaultdict
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

_criteria = defaultdict(list)


def pytest_runtest_logreport(report):
    if report.when != "call":
        return
    props = dict(report.user_properties)
    if "criterion" in props:
        _criteria[props["criterion"]].append((report.passed, props.get("summary", report.nodeid)))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_criteria, key=lambda k: int(k.split()[0])):
        runs = _criteria[key]
        status = "PASS" if all(ok for ok, _ in runs) else "FAIL"
        terminalreporter.write_line(f"criterion {key}: {status} ({sum(ok for ok, _ in runs)}/{len(runs)} cases)")
        for ok, text in runs:
            if not ok:
                terminalreporter.write_line(f"    failed: {text}")
