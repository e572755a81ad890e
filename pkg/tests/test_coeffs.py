import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from transonic.background import solve_background
from transonic.coeffs import (admissible_l0_interval, build_multipliers, compute_coeffs,
                              identity_rhs, l0_gap_expression, verify_prop22)
from transonic.errors import AdmissibilityError, ParameterError
from transonic.ops import dr2, dr4

# endpoints of the forbidden l0 interval for the gamma = 1.4 asset, frozen from
# the quadratic-root oracle in test_gap_endpoints_are_quadratic_roots
ASSET_GAP = (-2.255882712, 0.1531980985)
ADMISSIBLE = (0.5, 1.0, -3.0)


def test_circulatory_coefficients_vanish(circ):
    c = compute_coeffs(circ)
    for name in ("f", "f_prime", "A_b12", "e2", "k_b2"):
        assert np.max(np.abs(getattr(c, name))) == 0.0, name


def test_asset_kb2_vanishes(coeffs):
    assert np.max(np.abs(coeffs.k_b2)) <= 1e-7 * np.max(np.abs(coeffs.k_b1))


def test_coefficient_structure(coeffs, bg):
    assert np.all(coeffs.e1 > 0)
    assert np.allclose(coeffs.f_prime, -coeffs.A_b12 / coeffs.A_b11, rtol=1e-13, atol=1e-15)
    flips = np.nonzero(np.diff(np.sign(coeffs.k_b22)))[0]
    assert flips.size == 1
    i = flips[0]
    assert coeffs.r_grid[i] <= bg.r_c <= coeffs.r_grid[i + 1]
    # f is an antiderivative of f' with f(r0) = 0
    h = coeffs.r_grid[1] - coeffs.r_grid[0]
    assert coeffs.f[0] == 0.0
    assert np.max(np.abs(dr4(coeffs.f, h) - coeffs.f_prime)) <= 5e-8


def test_kb33_at_sonic_radius(coeffs, bg):
    r, s, m1 = coeffs.r_grid, coeffs.k_b33, bg.M_b1_sq
    k_rc = np.interp(bg.r_c, r, s)
    assert k_rc > 1.0
    assert k_rc == pytest.approx(1.0 / (1.0 - np.interp(bg.r_c, r, m1)), rel=1e-6)


def test_prop22_identities(coeffs):
    t = time.perf_counter()
    rep = verify_prop22(coeffs)
    assert time.perf_counter() - t < 5.0
    assert rep.passed
    assert rep.kb2_ratio <= 1e-7
    assert rep.rhs22_min > 0 and rep.rhs33_min > 0
    for o22, o33 in rep.orders:
        assert 1.8 <= o22 <= 2.2 and 1.8 <= o33 <= 2.2
    rhs22, rhs33 = identity_rhs(coeffs)
    assert np.all(rhs22 > 0) and np.all(rhs33 > 0)


def test_prop22_circulatory(circ):
    rep = verify_prop22(compute_coeffs(circ))
    assert rep.passed
    o22 = [o[0] for o in rep.orders]
    assert all(1.8 <= o <= 2.2 for o in o22)
    # the k33 identity is exact when U1 = 0, so its residual sits at round-off
    assert rep.res33 <= 1e-12


def test_forbidden_interval(coeffs):
    lo, hi = admissible_l0_interval(coeffs)
    assert lo == pytest.approx(ASSET_GAP[0], abs=1e-8)
    assert hi == pytest.approx(ASSET_GAP[1], abs=1e-8)
    # l0 = 0 sits inside the interval for this asset
    assert l0_gap_expression(coeffs, 0.0) < 0


def test_gap_endpoints_are_quadratic_roots(coeffs):
    # k22(r0) + (f'(r0) - l0/r0)^2 = 0 solved directly as a quadratic in l0
    r0, fp, k = coeffs.r_grid[0], coeffs.f_prime[0], coeffs.k_b22[0]
    roots = np.sort(np.roots([1 / r0 ** 2, -2 * fp / r0, fp ** 2 + k]).real)
    assert np.allclose(roots, admissible_l0_interval(coeffs), atol=1e-12)
    for l0 in roots:
        assert abs(l0_gap_expression(coeffs, l0)) <= 1e-12


def test_circulatory_symmetric_interval(circ):
    c = compute_coeffs(circ)
    w = np.sqrt(circ.M_b2_sq[0] - 1.0) * circ.r0
    lo, hi = admissible_l0_interval(c)
    assert lo == pytest.approx(-w, abs=1e-10) and hi == pytest.approx(w, abs=1e-10)


@pytest.mark.parametrize("l0", ADMISSIBLE)
def test_multipliers_admissible(coeffs, l0):
    m = build_multipliers(coeffs, l0)
    assert m.passed, m.report()
    assert m.sigma_star > 0
    assert m.boundary_r0 > 0 and m.boundary_r1 > 0
    assert np.all(m.l1 > 0)
    assert m.l1[0] >= 1.0


@pytest.mark.parametrize("l0", [-2.0, -1.0, 0.0, 0.15])
def test_forbidden_l0_rejected(coeffs, l0):
    with pytest.raises(AdmissibilityError) as exc:
        build_multipliers(coeffs, l0)
    assert exc.value.interval == pytest.approx(ASSET_GAP, abs=1e-8)


def test_multiplier_odes(coeffs):
    m = build_multipliers(coeffs, 1.0)
    h = m.r_grid[1] - m.r_grid[0]
    k1 = coeffs.k_b1
    inner = slice(2, -2)
    ode1 = m.l1 * k1 - 0.5 * dr2(m.l1, h) - m.sigma1
    ode2 = m.l2 * k1 - dr2(m.l2, h)
    assert np.max(np.abs(ode1[inner])) <= 1e-4
    assert np.max(np.abs(ode2[inner])) <= 1e-4 * np.max(np.abs(m.l2))


def test_l2_proportional_to_boundary_slope(coeffs):
    # l2 is linear in f'(r0) - l0/r0, so it vanishes identically where that factor does
    r0, fp = coeffs.r_grid[0], coeffs.f_prime[0]
    shapes = [build_multipliers(coeffs, l0).l2 / (fp - l0 / r0) for l0 in ADMISSIBLE]
    for s in shapes[1:]:
        assert np.allclose(s, shapes[0], rtol=1e-13)
    # the zero-slope choice itself lies inside the forbidden interval
    with pytest.raises(AdmissibilityError):
        build_multipliers(coeffs, r0 * fp)


def test_sigma1_validation(coeffs):
    with pytest.raises(ParameterError):
        build_multipliers(coeffs, 1.0, sigma1=2.0)


@settings(max_examples=20, deadline=None)
@given(l0=st.floats(-20.0, 20.0))
def test_admissibility_matches_gap_sign(coeffs, l0):
    lo, hi = admissible_l0_interval(coeffs)
    if abs(l0 - lo) < 1e-9 or abs(l0 - hi) < 1e-9:
        return
    inside = lo < l0 < hi
    assert inside == (l0_gap_expression(coeffs, l0) < 0)
    if inside:
        with pytest.raises(AdmissibilityError):
            build_multipliers(coeffs, l0)
    else:
        assert build_multipliers(coeffs, l0).passed


def test_identity_order_on_other_gamma():
    from transonic.gas import GasParams
    gas = GasParams(gamma=1.3, A0=1 / 1.3, rho0=1.0, U10=-0.15, U20=0.65)
    bg = solve_background(gas, 1.3, 2.0, grid_size=513)
    rep = verify_prop22(compute_coeffs(bg))
    assert rep.passed
