import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from transonic.errors import ParameterError
from transonic.ops import (discrete_sobolev_norm, dr2, dr4, drr4, dtheta,
                           from_characteristic_coords, integrate_annulus, integrate_theta,
                           shift_theta, theta_grid, to_characteristic_coords)

Y1 = np.linspace(1.2, 2.0, 65)
AREA = 2 * np.pi * (Y1[-1] - Y1[0])


def test_dtheta_exact_on_trig():
    th = theta_grid(32)
    assert np.allclose(dtheta(np.sin(3 * th)), 3 * np.cos(3 * th), atol=1e-12)
    assert np.allclose(dtheta(np.cos(2 * th), order=2), -4 * np.cos(2 * th), atol=1e-12)


def test_radial_stencil_orders():
    errs = {}
    for n in (65, 129):
        r = np.linspace(1.0, 2.0, n)
        h = r[1] - r[0]
        f = np.sin(3 * r)
        errs[n] = (np.max(np.abs(dr2(f, h) - 3 * np.cos(3 * r))),
                   np.max(np.abs(dr4(f, h) - 3 * np.cos(3 * r))),
                   np.max(np.abs(drr4(f, h) + 9 * np.sin(3 * r))))
    orders = np.log2(np.array(errs[65]) / np.array(errs[129]))
    assert 1.8 <= orders[0] <= 2.3
    assert orders[1] >= 3.7 and orders[2] >= 3.5


def test_stencil_minimum_size():
    with pytest.raises(ParameterError):
        dr4(np.ones(4), 0.1)


def test_characteristic_coords_trivial():
    th = theta_grid(24)
    g = np.cos(th)[None, :] * Y1[:, None]
    assert np.array_equal(to_characteristic_coords(g, np.zeros(Y1.size)), g)
    radial = np.repeat(Y1[:, None] ** 2, th.size, axis=1)
    assert np.allclose(to_characteristic_coords(radial, np.sin(Y1)), radial, atol=1e-14)


def test_characteristic_coords_shift():
    th = theta_grid(24)
    f = 0.3 * Y1
    g = np.sin(2 * th)[None, :] + 0 * Y1[:, None]
    out = to_characteristic_coords(g, f)
    assert np.allclose(out, np.sin(2 * (th[None, :] - f[:, None])), atol=1e-13)
    back = from_characteristic_coords(out, f)
    assert np.allclose(back, g, atol=1e-13)


def test_cubic_round_trip_fourth_order():
    errs = []
    for n in (32, 64, 128):
        th = theta_grid(n)
        f = np.linspace(0.01, 0.99, 97)
        g = np.sin(3 * th)[None, :] * np.ones((f.size, 1))
        out = to_characteristic_coords(g, f, method="cubic")
        errs.append(np.max(np.abs(out - np.sin(3 * (th[None, :] - f[:, None])))))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(orders >= 3.7), orders


def test_unknown_interpolation():
    with pytest.raises(ValueError):
        to_characteristic_coords(np.ones((2, 8)), np.zeros(2), method="linear")


def test_sobolev_norm_constant():
    c = -1.7
    v = np.full((Y1.size, 16), c)
    assert discrete_sobolev_norm(v, 0, Y1) == pytest.approx(abs(c) * np.sqrt(AREA), rel=1e-13)
    assert discrete_sobolev_norm(v, 3, Y1) == pytest.approx(abs(c) * np.sqrt(AREA), rel=1e-12)


def test_sobolev_seminorm_sin():
    th = theta_grid(32)
    v = np.sin(th)[None, :] + 0 * Y1[:, None]
    h1_sq = discrete_sobolev_norm(v, 1, Y1) ** 2 - discrete_sobolev_norm(v, 0, Y1) ** 2
    assert h1_sq == pytest.approx(AREA / 2, rel=1e-12)


def test_sobolev_order_limits():
    with pytest.raises(ParameterError):
        discrete_sobolev_norm(np.ones((5, 8)), 5, Y1[:5])


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2 ** 31 - 1))
def test_sobolev_monotone_in_k(seed):
    rng = np.random.default_rng(seed)
    v = rng.standard_normal((Y1.size, 16))
    norms = [discrete_sobolev_norm(v, k, Y1) for k in range(5)]
    assert all(a <= b * (1 + 1e-14) for a, b in zip(norms, norms[1:]))


@settings(max_examples=30, deadline=None)
@given(s=st.floats(-10, 10), m=st.integers(0, 7))
def test_shift_preserves_theta_integral(s, m):
    th = theta_grid(16)
    g = (np.cos(m * th) + 0.5)[None, :]
    out = shift_theta(g, s)
    assert integrate_theta(out)[0] == pytest.approx(integrate_theta(g)[0], abs=1e-12)
    assert np.allclose(out, np.cos(m * (th - s)) + 0.5, atol=1e-12)


def test_integrate_annulus():
    th = theta_grid(16)
    v = Y1[:, None] + 0 * th[None, :]
    assert integrate_annulus(v, Y1) == pytest.approx(np.pi * (Y1[-1] ** 2 - Y1[0] ** 2), rel=1e-13)
