import pytest

ACCEPTANCE = pytest.StashKey[dict]()


@pytest.fixture
def acceptance_log(request):
    """Record one summary line per acceptance criterion."""
    log = request.config.stash.setdefault(ACCEPTANCE, {})

    def record(number: int, title: str, checks: dict):
        verdict = "PASS" if all(checks.values()) else "FAIL"
        failed = [name for name, ok in checks.items() if not ok]
        detail = f" (failed: {'; '.join(failed)})" if failed else ""
        log[number] = f"criterion {number:2d} {verdict}  {title}{detail}"
        return verdict

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    log = config.stash.get(ACCEPTANCE, {})
    if not log:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(log):
        terminalreporter.write_line(log[number])
