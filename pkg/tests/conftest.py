"""Collects acceptance outcomes and prints one PASS/FAIL line per criterion."""

from collections import defaultdict

ACCEPTANCE = defaultdict(list)
_property_outcomes = []


def record(criterion: int, ok: bool, detail: str):
    ACCEPTANCE[criterion].append((bool(ok), detail))


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_properties.py" in report.nodeid:
        _property_outcomes.append(report.passed)


def pytest_terminal_summary(terminalreporter):
    if _property_outcomes and ACCEPTANCE:
        n, ok = len(_property_outcomes), sum(_property_outcomes)
        record(8, ok == n, f"{ok}/{n} property tests passed")
    if not ACCEPTANCE:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for c in sorted(ACCEPTANCE):
        parts = ACCEPTANCE[c]
        status = "PASS" if all(ok for ok, _ in parts) else "FAIL"
        terminalreporter.write_line(f"criterion {c}: {status}  " + "; ".join(d for _, d in parts))
