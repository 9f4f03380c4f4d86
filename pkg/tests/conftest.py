from _helpers import ACCEPTANCE


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, passed, detail in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"criterion {criterion}: {'PASS' if passed else 'FAIL'} {detail}")
