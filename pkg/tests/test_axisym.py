import numpy as np
import pytest

from conftest import asset_gas
from transonic.axisym import (AxisymData, StripOperator, barrier_check, characteristic_feet,
                              characteristic_invariance, far_field_decay_check, prepare_strip,
                              solve_axisym, strip_poisson, tail_norm)
from transonic.profiles import parse_profile
from transonic.sonic import locate_sonic_axisym

BUMP = parse_profile("bump:0,2")
ZERO = parse_profile("zero")


def bump_data(eps):
    return AxisymData(eps, BUMP, BUMP, BUMP, BUMP, parse_profile("0.5*bump:0,2"))


@pytest.fixture(scope="module")
def strip8():
    return prepare_strip(asset_gas(), 1.2, 2.0, n_r=129, L=8.0)


@pytest.fixture(scope="module")
def strip16():
    return prepare_strip(asset_gas(), 1.2, 2.0, n_r=129, L=16.0)


@pytest.fixture(scope="module")
def res8(strip8):
    return solve_axisym(strip8, bump_data(1e-3))


# ---------------------------------------------------------------- strip operator

def _strip_error(n, coeffs):
    """u = exp(-x3^2) sin(k (r1 - r)) with matching Neumann flux at r0."""
    r0, r1, L = 1.2, 2.0, 4.0
    r = np.linspace(r0, r1, n)
    x3 = np.linspace(-L, L, 10 * (n - 1) + 1)
    k = 2.0
    a11 = 1.0 + 0.3 * r if coeffs else np.ones_like(r)
    a33 = 0.5 + 0.1 * r ** 2 if coeffs else np.ones_like(r)
    e1 = 0.7 / r if coeffs else np.zeros_like(r)
    R, X = r[:, None], x3[None, :]
    g = np.exp(-X ** 2)
    S, C = np.sin(k * (r1 - R)), np.cos(k * (r1 - R))
    u = g * S
    ur, urr = -k * g * C, -k * k * g * S
    u33 = (4 * X ** 2 - 2) * g * S
    G = a11[:, None] * urr + a33[:, None] * u33 + e1[:, None] * ur
    op = StripOperator(r, x3, a11, a33, e1, "neumann", "dirichlet")
    num = op.solve(G, ur[0], 0.0, u[:, 0], u[:, -1])
    return np.max(np.abs(num - u))


@pytest.mark.parametrize("coeffs", [False, True])
def test_strip_operator_second_order(coeffs):
    e = [_strip_error(n, coeffs) for n in (17, 33, 65)]
    orders = np.log2(np.array(e[:-1]) / np.array(e[1:]))
    assert np.all(np.abs(orders - 2.0) <= 0.2), orders


def test_strip_poisson_zero_and_residual():
    r = np.linspace(1.2, 2.0, 33)
    x3 = np.linspace(-2, 2, 41)
    assert np.max(np.abs(strip_poisson(np.zeros((33, 41)), r, x3))) == 0.0
    op = StripOperator(r, x3, 1.0, 1.0, 0.0, "dirichlet", "neumann")
    G = np.random.default_rng(1).standard_normal((33, 41))
    _, res = op.solve(G, 0.0, 0.0, 0.0, 0.0, return_residual=True)
    assert res <= 1e-12


def test_discrete_maximum_principle():
    # nonnegative source with zero boundary data: the solution is <= 0 inside
    r = np.linspace(1.2, 2.0, 41)
    x3 = np.linspace(-3, 3, 61)
    op = StripOperator(r, x3, 1.0 + r, 0.8, 0.5, "neumann", "dirichlet")
    G = np.abs(np.random.default_rng(2).standard_normal((41, 61)))
    u = op.solve(G, 0.0, 0.0, 0.0, 0.0)
    assert np.max(u) <= 1e-14


# ---------------------------------------------------------------- characteristics

def test_radial_characteristics_without_swirl_in_x3():
    r = np.linspace(1.2, 2.0, 17)
    x3 = np.linspace(-4, 4, 33)
    U1 = -0.5 * np.ones((17, 33))
    foot = characteristic_feet(r, x3, U1, np.zeros_like(U1))
    assert np.array_equal(foot, np.broadcast_to(x3, foot.shape))


def test_constant_slope_characteristics():
    r = np.linspace(1.2, 2.0, 33)
    x3 = np.linspace(-4, 4, 81)
    c = 0.3
    U1 = -np.ones((33, 81))
    foot = characteristic_feet(r, x3, U1, -c * U1)
    # dx3/dr = -c  =>  foot = x3 - c (r1 - r)
    exact = x3[None, :] - c * (r[-1] - r[:, None])
    inner = np.abs(x3) <= 3.0
    assert np.max(np.abs(foot - exact)[:, inner]) <= 1e-12


# ---------------------------------------------------------------- solver

def test_zero_data_gives_background(strip8):
    res = solve_axisym(strip8, AxisymData(0.0, BUMP, BUMP, BUMP, BUMP, BUMP))
    assert res.report["iterations"] == 1
    assert np.max(np.abs(res.phi)) == 0.0
    assert tail_norm(res.field, res.bg, 0.0, 8.0) == 0.0


def test_converges_with_contraction(res8):
    assert res8.report["increments"][-1] <= 1e-9
    assert res8.report["max_contraction"] <= 0.5
    assert res8.report["elliptic_residual"] <= 1e-10


def test_compact_support_transported(res8):
    f = res8.field
    far = np.abs(f.x3) >= 3.0
    # B and A are carried from r1; the slight x3 drift stays well inside |x3| < 3
    assert np.max(np.abs(f.B[:, far] - f.gas.B0)) == 0.0
    assert np.max(np.abs(f.A[:, far] - f.gas.A0)) == 0.0
    assert np.max(np.abs(f.B - f.gas.B0)) == pytest.approx(1e-3, rel=1e-6)


def test_characteristic_invariance(res8):
    inv = characteristic_invariance(res8, bump_data(1e-3))
    assert max(inv.values()) <= 1e-8


def test_barrier(res8):
    rep = barrier_check(res8.strip, res8.phi)
    assert rep["max_principle_upper"] and rep["max_principle_lower"]
    assert rep["bound_ok"] and all(d["passed"] for d in rep["decay"])
    assert rep["passed"]


def test_sonic_surface_end(res8):
    surf = locate_sonic_axisym(res8.field, res8.bg.r_c)
    assert surf.end_dev <= 1e-4
    assert 0 < surf.max_dev <= 10 * 1e-3


def test_linear_response(strip8):
    dev = []
    for eps in (1e-3, 2e-3, 4e-3):
        f = solve_axisym(strip8, bump_data(eps)).field
        dev.append(tail_norm(f, strip8.bg, 0.0, 8.0))
    assert dev[1] / dev[0] == pytest.approx(2.0, abs=0.25)
    assert dev[2] / dev[1] == pytest.approx(2.0, abs=0.25)


def test_far_field_decay(res8, strip16):
    res16 = solve_axisym(strip16, bump_data(1e-3))
    dec = far_field_decay_check(res8, res16)
    assert dec["passed"], dec
    assert dec["tail_2L"] < dec["tail_L"]
