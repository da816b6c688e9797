from __future__ import annotations

import pytest
from hypothesis import HealthCheck, settings

from finitegap.modulation import NfamConfig, build_constellation
from finitegap.synthesis import compute_params

from invariants import GENUS_ONE, REF_GENUS2, REF_GENUS3

settings.register_profile("default", deadline=None, max_examples=30,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

# (criterion, passed, detail) rows collected by the acceptance tests
ACCEPTANCE_LINES: list[tuple[int, bool, str]] = []


@pytest.fixture(scope="session")
def table1():
    return REF_GENUS2


@pytest.fixture(scope="session")
def table2():
    return REF_GENUS3


@pytest.fixture(scope="session")
def genus_one():
    return GENUS_ONE


@pytest.fixture(scope="session")
def params1():
    return compute_params(REF_GENUS2)


@pytest.fixture(scope="session")
def params2():
    return compute_params(REF_GENUS3)


@pytest.fixture(scope="session")
def nfam_cfg():
    return NfamConfig()


@pytest.fixture(scope="session")
def constellation(nfam_cfg, tmp_path_factory):
    return build_constellation(nfam_cfg, cache_dir=tmp_path_factory.mktemp("nfam-cache"))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n, ok, detail in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
