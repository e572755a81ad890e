"""Polytropic gas relations: sound speed, Bernoulli closure, Mach numbers.

All formulas are for p = A rho^gamma, so that

    c^2 = A gamma rho^(gamma-1),
    B   = |U|^2/2 + gamma/(gamma-1) A rho^(gamma-1) = |U|^2/2 + c^2/(gamma-1).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, VacuumError

# margin used by the vacuum guard, see density_from_bernoulli
VACUUM_MARGIN = 1e-14


def sound_speed_sq(rho, A, gamma):
    """Squared sound speed ``A * gamma * rho**(gamma - 1)``.

    Works elementwise on arrays.  Raises DomainError if any rho or A is
    not strictly positive.
    """
    rho = np.asarray(rho, dtype=float)
    A = np.asarray(A, dtype=float)
    if np.any(~(rho > 0)) or np.any(~(A > 0)):
        raise DomainError("sound speed needs rho > 0 and A > 0")
    out = A * gamma * rho ** (gamma - 1.0)
    return out if out.ndim else float(out)


def enthalpy_gap(speed_sq, B):
    """B - |U|^2/2, which equals c^2/(gamma-1)."""
    return np.asarray(B, dtype=float) - 0.5 * np.asarray(speed_sq, dtype=float)


def _check_gap(gap, B):
    # strict inequality with a small relative margin so that values sitting
    # on the vacuum boundary are rejected instead of producing NaN powers
    scale = np.maximum(np.abs(np.asarray(B, dtype=float)), 1.0)
    if np.any(~(gap > VACUUM_MARGIN * scale)):
        raise VacuumError("B - |U|^2/2 must be positive (vacuum / stagnation of c)")


def density_from_bernoulli(speed_sq, B, A, gamma):
    """Density from Bernoulli's law.

    rho = ((gamma-1)/(A gamma) * (B - speed_sq/2))**(1/(gamma-1))
    """
    gap = enthalpy_gap(speed_sq, B)
    _check_gap(gap, B)
    A = np.asarray(A, dtype=float)
    if np.any(~(A > 0)):
        raise DomainError("entropy function A must be positive")
    out = ((gamma - 1.0) / (A * gamma) * gap) ** (1.0 / (gamma - 1.0))
    return out if np.ndim(out) else float(out)


def sound_speed_sq_from_bernoulli(speed_sq, B, gamma):
    """c^2 = (gamma-1)(B - |U|^2/2); independent of A."""
    gap = enthalpy_gap(speed_sq, B)
    _check_gap(gap, B)
    out = (gamma - 1.0) * gap
    return out if np.ndim(out) else float(out)


def bernoulli(speed_sq, rho, A, gamma):
    """B = |U|^2/2 + gamma/(gamma-1) A rho^(gamma-1)."""
    return 0.5 * np.asarray(speed_sq) + sound_speed_sq(rho, A, gamma) / (gamma - 1.0)


@dataclass(frozen=True)
class GasParams:
    """Gas constants and the outer-boundary state.

    B0 is derived from the other fields.  ``U10 <= 0`` means the flow
    enters through the outer circle.
    """

    gamma: float
    A0: float
    rho0: float
    U10: float
    U20: float
    B0: float = field(init=False)

    def __post_init__(self):
        g = float(self.gamma)
        if not 1.0 < g < 3.0:
            raise DomainError(f"gamma must lie in (1, 3), got {g}")
        if not self.A0 > 0 or not self.rho0 > 0:
            raise DomainError("A0 and rho0 must be positive")
        if self.U10 > 0:
            raise DomainError("U10 must be <= 0 (flow enters at the outer boundary)")
        if self.U20 == 0:
            raise DomainError("U20 must be nonzero")
        c2 = self.A0 * g * self.rho0 ** (g - 1.0)
        if not c2 > self.U10 ** 2 + self.U20 ** 2:
            raise DomainError("outer-boundary state must be subsonic")
        object.__setattr__(self, "B0", 0.5 * (self.U10 ** 2 + self.U20 ** 2) + c2 / (g - 1.0))

    @property
    def c0_sq(self):
        return sound_speed_sq(self.rho0, self.A0, self.gamma)

    @classmethod
    def from_bernoulli(cls, gamma, A0, B0, U10, U20):
        """Build from (gamma, A0, B0, U10, U20), solving for rho0."""
        rho0 = density_from_bernoulli(U10 ** 2 + U20 ** 2, B0, A0, gamma)
        return cls(gamma=gamma, A0=A0, rho0=rho0, U10=U10, U20=U20)

    def as_dict(self):
        return {"gamma": self.gamma, "A0": self.A0, "rho0": self.rho0,
                "U10": self.U10, "U20": self.U20, "B0": self.B0}


@dataclass(frozen=True)
class FlowState:
    """Pointwise (or array-valued) flow state."""

    U1: float | np.ndarray
    U2: float | np.ndarray
    rho: float | np.ndarray
    A: float | np.ndarray
    U3: float | np.ndarray = 0.0

    @property
    def speed_sq(self):
        return np.asarray(self.U1) ** 2 + np.asarray(self.U2) ** 2 + np.asarray(self.U3) ** 2

    def bernoulli(self, gamma):
        return bernoulli(self.speed_sq, self.rho, self.A, gamma)


def mach_numbers(state: FlowState, gamma, with_u3=False):
    """Component Mach numbers U_i / c.

    Returns (M1, M2) or (M1, M2, M3).  The squares add up to |M|^2.
    """
    c2 = sound_speed_sq(state.rho, state.A, gamma)
    B = bernoulli(state.speed_sq, state.rho, state.A, gamma)
    _check_gap(enthalpy_gap(state.speed_sq, B), B)
    c = np.sqrt(c2)
    out = (np.asarray(state.U1) / c, np.asarray(state.U2) / c)
    if with_u3:
        out = out + (np.asarray(state.U3) / c,)
    return tuple(v if np.ndim(v) else float(v) for v in out)


def mach_sq_from_bernoulli(speed_sq, B, gamma):
    """|M|^2 = |U|^2 / ((gamma-1)(B - |U|^2/2))."""
    return np.asarray(speed_sq) / sound_speed_sq_from_bernoulli(speed_sq, B, gamma)
