from __future__ import annotations

import pytest

from levode import builtin_hypergeometric, eta_bound, run


@pytest.fixture(scope="session")
def fixture_spec():
    return builtin_hypergeometric()


@pytest.fixture(scope="session")
def fixture_final(fixture_spec):
    return run(fixture_spec)


@pytest.fixture(scope="session")
def fixture_eta(fixture_final):
    return eta_bound(fixture_final.residual, fixture_final.spec)
