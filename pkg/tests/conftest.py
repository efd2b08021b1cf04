import pytest

ACCEPTANCE_LINES = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[ACCEPTANCE_LINES] = {}


@pytest.fixture
def report(request):
    """Print and record one PASS/FAIL line for an acceptance criterion."""
    lines = request.config.stash[ACCEPTANCE_LINES]

    def emit(number: int, ok: bool, detail: str):
        line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        print(line)
        lines[number] = line
        return ok

    return emit


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE_LINES, {})
    if lines:
        terminalreporter.section("acceptance criteria")
        for n in sorted(lines):
            terminalreporter.write_line(lines[n])
