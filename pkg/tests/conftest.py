import pytest

_LINES = []


@pytest.fixture
def criterion(request):
    """Record one pass/fail line per acceptance criterion for the summary."""

    def record(num, reports, note=""):
        ok = all(r.verdict for r in reports)
        body = "; ".join(r.line() for r in reports)
        _LINES.append((num, f"criterion {num:>2}: {'PASS' if ok else 'FAIL'}{' ' + note if note else ''} | {body}"))
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _LINES:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_LINES, key=lambda x: x[0]):
        terminalreporter.write_line(line)
