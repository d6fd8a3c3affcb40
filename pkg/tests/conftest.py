import pytest

_LINES: list[str] = []


@pytest.fixture(scope="session")
def acceptance_report():
    """Collects one summary line per acceptance criterion."""

    def record(number: int, title: str, failures: list[str], detail: str) -> None:
        verdict = "PASS" if not failures else "FAIL"
        _LINES.append(f"[{verdict}] criterion {number}: {title} | {detail}")
        for f in failures:
            _LINES.append(f"         - {f}")

    return record


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance summary")
        for line in _LINES:
            terminalreporter.write_line(line)
