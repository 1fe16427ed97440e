import pytest

# (criterion, passed, detail) lines collected by test_acceptance.py
ACCEPTANCE = []


@pytest.fixture
def report():
    def _report(criterion: str, ok: bool, detail: str) -> bool:
        ACCEPTANCE.append((criterion, bool(ok), detail))
        print(f"{'PASS' if ok else 'FAIL'} criterion {criterion}: {detail}")
        return bool(ok)

    return _report


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for crit, ok, detail in sorted(ACCEPTANCE, key=lambda r: r[0]):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {crit}: {detail}")
