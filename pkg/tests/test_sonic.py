import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from transonic.errors import GeometryError
from transonic.fields import AxisymField, EulerField2D
from transonic.ops import dtheta, theta_grid
from transonic.sonic import locate_sonic_2d, locate_sonic_axisym


def shifted_background(bg, delta, n_theta=32, m=1):
    """Background sampled at r - delta cos(m theta), with B and A unchanged.

    |M|^2 depends only on |U|^2 and B, so the sonic curve of this field is
    exactly s(theta) = r_c + delta cos(m theta).
    """
    r = np.linspace(1.2, 1.9, 281)
    th = theta_grid(n_theta)
    R = r[:, None] - delta * np.cos(m * th)[None, :]
    _, U1, U2 = bg.state(R)
    return EulerField2D(r=r, U1=U1, U2=U2, B=bg.gas.B0, A=bg.gas.A0, gas=bg.gas), th


def test_background_sonic_circle(bg):
    f, _ = shifted_background(bg, 0.0)
    sc = locate_sonic_2d(f, bg.r_c)
    assert sc.max_dev <= 1e-9
    assert sc.max_dev_prime <= 1e-8
    assert sc.residual <= 1e-12


@settings(max_examples=10, deadline=None)
@given(delta=st.floats(-0.02, 0.02), m=st.integers(1, 4))
def test_shifted_sonic_curve(bg, delta, m):
    f, th = shifted_background(bg, delta, m=m)
    sc = locate_sonic_2d(f, bg.r_c)
    assert np.max(np.abs(sc.s - (bg.r_c + delta * np.cos(m * th)))) <= 1e-8
    assert np.max(np.abs(sc.s_prime + m * delta * np.sin(m * th))) <= 1e-6
    assert sc.max_dev == pytest.approx(abs(delta), abs=1e-8)


def test_slope_matches_differentiated_curve(irrot, setup2d):
    sc = locate_sonic_2d(irrot(2e-3).field, setup2d.bg.r_c)
    th = sc.theta
    h = th[1] - th[0]
    # centered differences agree to their own truncation error, spectral ones much closer
    fd = (np.roll(sc.s, -1) - np.roll(sc.s, 1)) / (2 * h)
    scale = np.max(np.abs(sc.s_prime))
    assert np.max(np.abs(fd - sc.s_prime)) <= 5e-3 * scale
    assert np.max(np.abs(dtheta(sc.s) - sc.s_prime)) <= 1e-4 * scale


def test_sonic_deviation_linear_in_epsilon(irrot, setup2d):
    d = [locate_sonic_2d(irrot(e).field, setup2d.bg.r_c).max_dev for e in (1e-3, 2e-3, 4e-3)]
    assert d[1] / d[0] == pytest.approx(2.0, abs=0.25)
    assert d[2] / d[1] == pytest.approx(2.0, abs=0.25)


def test_nonexceptional(irrot, setup2d):
    sc = locate_sonic_2d(irrot(1e-3).field, setup2d.bg.r_c)
    # the background flow crosses the sonic circle transversally (U1 != 0)
    assert sc.nonexceptional_min > 0.1


def test_subsonic_field_rejected(bg):
    r = np.linspace(1.5, 2.0, 41)
    th = theta_grid(16)
    _, U1, U2 = bg.state(np.repeat(r[:, None], th.size, axis=1))
    f = EulerField2D(r=r, U1=U1, U2=U2, B=bg.gas.B0, A=bg.gas.A0, gas=bg.gas)
    with pytest.raises(GeometryError):
        locate_sonic_2d(f, bg.r_c)


def test_axisym_background_surface(bg):
    r = np.linspace(1.2, 2.0, 161)
    x3 = np.linspace(-4, 4, 17)
    _, U1, U2 = bg.state(np.repeat(r[:, None], x3.size, axis=1))
    f = AxisymField(r=r, x3=x3, U1=U1, U2=U2, U3=0.0, B=bg.gas.B0, A=bg.gas.A0, gas=bg.gas)
    surf = locate_sonic_axisym(f, bg.r_c)
    assert surf.max_dev <= 1e-8
    assert surf.end_dev <= 1e-8
    assert surf.tail(2, 4) <= 1e-8
