import mpmath as mp
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "geonet", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("geonet")


@pytest.fixture(autouse=True)
def _fresh_mp_context():
    # Tests compute their own inputs; keep mpmath's global precision predictable.
    old = mp.mp.dps
    mp.mp.dps = 50
    yield
    mp.mp.dps = old


# Acceptance tests append "criterion N: PASS/FAIL ..." lines here; they are
# printed once at the end of the run whether or not output is captured.
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
