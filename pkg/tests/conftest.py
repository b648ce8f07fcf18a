import pytest

_ACCEPTANCE = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py::test_criterion_" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    detail = dict(report.user_properties).get("detail", "")
    if report.when == "setup" and report.failed:
        _ACCEPTANCE[name] = ("ERROR", str(report.longrepr).splitlines()[-1])
    elif report.when == "call":
        _ACCEPTANCE[name] = ("PASS" if report.passed else "FAIL", detail)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_ACCEPTANCE, key=lambda s: int(s.split("_")[2])):
        status, detail = _ACCEPTANCE[name]
        label = name.split("_", 3)[3].replace("_", " ")
        terminalreporter.write_line(f"[{status}] criterion {name.split('_')[2]} ({label}): {detail}")
