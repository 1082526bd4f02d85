import os
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

import cyclic_pdl
from cyclic_pdl.parser import parse_proof

settings.register_profile(
    "default", max_examples=100, deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.register_profile("thorough", max_examples=1000, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

FIXTURES = Path(cyclic_pdl.__file__).parent / "fixtures"


@pytest.fixture
def fixture_path():
    return lambda name: FIXTURES / name


@pytest.fixture
def load_fixture():
    return lambda name: parse_proof((FIXTURES / name).read_text())


ACCEPTANCE = {}


@pytest.fixture
def report():
    """Record one acceptance line: ``report(n, ok, detail)``."""
    def add(n, ok, detail):
        ACCEPTANCE[n] = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
        print(ACCEPTANCE[n])
    return add


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
