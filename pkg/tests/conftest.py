"""Test configuration: acceptance-criterion summary reporting.

Tests named test_criterion_* in test_acceptance.py each check one release
gate; this hook prints a one-line [PASS]/[FAIL] verdict per criterion at
the end of the run so the gate status is readable without scrolling
through pytest output.
"""

_ACCEPTANCE = {}


def pytest_collection_modifyitems(items):
    for item in items:
        if (item.nodeid.split("::")[0].endswith("test_acceptance.py")
                and item.name.startswith("test_criterion_")):
            doc = (item.function.__doc__ or "").strip().splitlines()
            label = doc[0] if doc else item.name
            _ACCEPTANCE[item.nodeid] = {"label": label, "outcome": "not run"}


def pytest_runtest_logreport(report):
    entry = _ACCEPTANCE.get(report.nodeid)
    if entry is None:
        return
    if report.when == "call":
        entry["outcome"] = "passed" if report.passed else "failed"
    elif report.failed:
        entry["outcome"] = "failed"


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for nodeid in sorted(_ACCEPTANCE):
        entry = _ACCEPTANCE[nodeid]
        mark = "PASS" if entry["outcome"] == "passed" else "FAIL"
        terminalreporter.write_line(f"[{mark}] {entry['label']}")
