import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "guts", deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("guts")

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance_line():
    """Record a one-line pass/fail summary for the acceptance report."""

    def record(text: str):
        ACCEPTANCE_LINES.append(text)
        print(text)

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
