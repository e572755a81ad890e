"""Shared fixtures.  Expensive solves are cached per session."""
import numpy as np
import pytest

from transonic.background import ASSET, asset_background, circulatory_background
from transonic.coeffs import compute_coeffs
from transonic.gas import GasParams
from transonic.potential import BoundaryPerturbation2D, prepare_annulus, solve_irrotational
from transonic.profiles import parse_profile


def asset_gas():
    p = dict(ASSET)
    p.pop("r0")
    p.pop("r1")
    return GasParams(**p)


@pytest.fixture(scope="session")
def gas():
    return asset_gas()


@pytest.fixture(scope="session")
def bg():
    return asset_background(1025)


@pytest.fixture(scope="session")
def circ():
    return circulatory_background(1025)


@pytest.fixture(scope="session")
def coeffs(bg):
    return compute_coeffs(bg)


@pytest.fixture(scope="session")
def setup2d(gas):
    """Annulus setup at desk resolution: 257 radial nodes, N = 16."""
    return prepare_annulus(gas, ASSET["r0"], ASSET["r1"], n_r=257, l0=1.0, N=16)


@pytest.fixture(scope="session")
def irrot(setup2d):
    """Irrotational solves keyed by epsilon (cos/sin boundary data)."""
    cache = {}

    def get(eps):
        if eps not in cache:
            bc = BoundaryPerturbation2D(eps, parse_profile("cos:1"), parse_profile("sin:1"))
            cache[eps] = solve_irrotational(setup2d, bc)
        return cache[eps]

    return get


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# one-line summary per acceptance criterion, filled by tests/test_acceptance.py
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
