import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from transonic.errors import DomainError, VacuumError
from transonic.gas import (FlowState, GasParams, bernoulli, density_from_bernoulli,
                           mach_numbers, mach_sq_from_bernoulli, sound_speed_sq,
                           sound_speed_sq_from_bernoulli)


def test_sound_speed_examples():
    assert sound_speed_sq(1.0, 1.0, 2.0) == pytest.approx(2.0, abs=1e-15)
    assert sound_speed_sq(2 / 3, 0.5, 2.0) == pytest.approx(2 / 3, abs=1e-15)


@pytest.mark.parametrize("rho,A", [(0.0, 1.0), (-1.0, 1.0), (1.0, 0.0), (np.nan, 1.0)])
def test_sound_speed_rejects_nonpositive(rho, A):
    with pytest.raises(DomainError):
        sound_speed_sq(rho, A, 1.4)


def test_density_at_rest_inverts_bernoulli():
    gamma, A, rho = 1.4, 0.7, 1.3
    B = sound_speed_sq(rho, A, gamma) / (gamma - 1)
    assert density_from_bernoulli(0.0, B, A, gamma) == pytest.approx(rho, rel=1e-14)


def test_density_circulatory_sonic_point():
    # |U|^2 = 1/r^2 at r^2 = 3/2, B = 1, A = 1/2, gamma = 2
    assert density_from_bernoulli(1 / 1.5, 1.0, 0.5, 2.0) == pytest.approx(2 / 3, abs=1e-15)


def test_vacuum_rejected():
    with pytest.raises(VacuumError):
        density_from_bernoulli(2.0, 1.0, 0.5, 2.0)
    with pytest.raises(VacuumError):
        sound_speed_sq_from_bernoulli(3.0, 1.0, 1.4)
    # VacuumError is a DomainError
    with pytest.raises(DomainError):
        density_from_bernoulli(2.5, 1.0, 0.5, 2.0)


def test_mach_examples():
    assert mach_numbers(FlowState(0.0, 0.0, 1.0, 1.0), 1.4) == (0.0, 0.0)
    # circulatory sonic point: U2 = 1/r, rho = 2/3, A = 1/2
    M1, M2 = mach_numbers(FlowState(0.0, 1 / np.sqrt(1.5), 2 / 3, 0.5), 2.0)
    assert M1 ** 2 + M2 ** 2 == pytest.approx(1.0, abs=1e-14)
    c = np.sqrt(sound_speed_sq(0.8, 0.6, 1.4))
    assert mach_numbers(FlowState(c, 0.0, 0.8, 0.6), 1.4) == pytest.approx((1.0, 0.0), abs=1e-14)


def test_mach_with_u3():
    s = FlowState(0.1, 0.2, 1.0, 1.0, U3=0.3)
    M = mach_numbers(s, 1.4, with_u3=True)
    c2 = sound_speed_sq(1.0, 1.0, 1.4)
    assert sum(m * m for m in M) == pytest.approx(0.14 / c2, rel=1e-14)


def test_gas_params_validation():
    g = GasParams(gamma=1.4, A0=1 / 1.4, rho0=1.0, U10=-0.2, U20=0.6)
    assert g.B0 == pytest.approx(0.5 * 0.4 + 1.0 / 0.4, rel=1e-15)
    with pytest.raises(DomainError):
        GasParams(gamma=3.5, A0=1.0, rho0=1.0, U10=0.0, U20=0.1)
    with pytest.raises(DomainError):
        GasParams(gamma=1.4, A0=1.0, rho0=1.0, U10=0.1, U20=0.1)
    with pytest.raises(DomainError):
        GasParams(gamma=1.4, A0=1.0, rho0=1.0, U10=-2.0, U20=0.1)  # supersonic inflow


def test_from_bernoulli_round_trip():
    g = GasParams.from_bernoulli(2.0, 0.5, 1.0, 0.0, 0.5)
    assert g.rho0 == pytest.approx(0.875, abs=1e-15)
    assert g.B0 == pytest.approx(1.0, abs=1e-15)


gammas = st.floats(1.05, 2.95)
pos = st.floats(0.05, 5.0)


@settings(max_examples=200, deadline=None)
@given(gamma=gammas, rho=pos, A=pos, u1=st.floats(-3, 3), u2=st.floats(-3, 3))
def test_bernoulli_density_round_trip(gamma, rho, A, u1, u2):
    q2 = u1 * u1 + u2 * u2
    B = bernoulli(q2, rho, A, gamma)
    assert density_from_bernoulli(q2, B, A, gamma) == pytest.approx(rho, rel=1e-9)


@settings(max_examples=200, deadline=None)
@given(gamma=gammas, rho=pos, A=pos, u1=st.floats(-3, 3), u2=st.floats(-3, 3))
def test_two_sound_speed_forms_agree(gamma, rho, A, u1, u2):
    q2 = u1 * u1 + u2 * u2
    B = bernoulli(q2, rho, A, gamma)
    c2 = sound_speed_sq(rho, A, gamma)
    assert sound_speed_sq_from_bernoulli(q2, B, gamma) == pytest.approx(c2, rel=1e-8)
    assert mach_sq_from_bernoulli(q2, B, gamma) == pytest.approx(q2 / c2, rel=1e-8, abs=1e-14)


@settings(max_examples=100, deadline=None)
@given(gamma=gammas, rho=pos, A=pos, u1=st.floats(-3, 3), u2=st.floats(-3, 3))
def test_mach_components_square_sum(gamma, rho, A, u1, u2):
    M1, M2 = mach_numbers(FlowState(u1, u2, rho, A), gamma)
    assert M1 ** 2 + M2 ** 2 == pytest.approx((u1 ** 2 + u2 ** 2) / sound_speed_sq(rho, A, gamma),
                                              rel=1e-12, abs=1e-15)


def test_array_inputs():
    rho = np.linspace(0.5, 1.5, 7)
    c2 = sound_speed_sq(rho, 1.0, 1.4)
    assert c2.shape == (7,)
    assert np.all(np.diff(c2) > 0)
