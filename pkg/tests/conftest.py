"""Shared fixtures and the acceptance-summary reporter."""

import pytest

# Lines recorded by the acceptance tests; echoed after the run so the
# per-criterion verdicts are visible even under output capture.
_acceptance_lines = []


@pytest.fixture(scope="session")
def acceptance_log():
    def record(criterion, passed, detail):
        verdict = "PASS" if passed else "FAIL"
        _acceptance_lines.append(f"[criterion {criterion}] {verdict}: {detail}")

    return record


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_lines:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(_acceptance_lines):
        terminalreporter.write_line(line)
