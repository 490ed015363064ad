"""Shared test configuration: acceptance-criterion result reporting."""

import pytest

_RESULTS = {}


class CriterionLog:
    """Collects per-criterion verdicts; printed in the terminal summary."""

    def report(self, number: int, name: str, passed: bool, detail: str = ""):
        _RESULTS[number] = (name, passed, detail)
        assert passed, f"criterion {number} ({name}) failed: {detail}"

    def skip(self, number: int, name: str, reason: str):
        _RESULTS[number] = (name, None, reason)
        pytest.skip(reason)


@pytest.fixture(scope="session")
def criterion():
    return CriterionLog()


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_RESULTS):
        name, passed, detail = _RESULTS[number]
        verdict = "SKIP" if passed is None else ("PASS" if passed else "FAIL")
        line = f"[criterion {number:2d}] {verdict}  {name}"
        if detail:
            line += f"  ({detail})"
        terminalreporter.write_line(line)
