import pytest

_RESULTS: list = []


@pytest.fixture
def acceptance():
    """Record one acceptance line: ``acceptance(label, ok, detail)``."""

    def record(label: str, ok: bool, detail: str) -> bool:
        _RESULTS.append((label, bool(ok), detail))
        return bool(ok)

    return record


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance")
    for label, ok, detail in sorted(_RESULTS, key=lambda r: int(r[0].split()[0][1:])):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} {label}: {detail}")
