import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("repo", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("repo")


@pytest.fixture(scope="session")
def unit():
    from h2sched.fleet import ElectrolyzerParams
    return ElectrolyzerParams()


ACCEPTANCE: dict[str, str] = {}


@pytest.fixture(scope="session")
def verdict():
    """Record one PASS/FAIL line per acceptance criterion; printed after the run."""
    def record(key: str, ok: bool, detail: str) -> bool:
        ACCEPTANCE[key] = f"{key} {'PASS' if ok else 'FAIL'}  {detail}"
        print(ACCEPTANCE[key])
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[key])
