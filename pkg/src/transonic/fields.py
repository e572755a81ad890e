"""Grid containers for the nonlinear solvers' iterates."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gas import GasParams, density_from_bernoulli, mach_sq_from_bernoulli
from .io import write_csv
from .ops import dr4, dtheta, theta_grid


def _as_field(v, shape):
    return np.broadcast_to(np.asarray(v, dtype=float), shape).copy()


@dataclass
class EulerField2D:
    """(U1, U2, B, A) on the annulus grid r x theta, shape (n_r, n_theta)."""

    r: np.ndarray
    U1: np.ndarray
    U2: np.ndarray
    B: np.ndarray
    A: np.ndarray
    gas: GasParams

    def __post_init__(self):
        shape = np.shape(self.U1)
        self.B = _as_field(self.B, shape)
        self.A = _as_field(self.A, shape)

    @property
    def theta(self):
        return theta_grid(self.U1.shape[1])

    @property
    def speed_sq(self):
        return self.U1 ** 2 + self.U2 ** 2

    @property
    def rho(self):
        return density_from_bernoulli(self.speed_sq, self.B, self.A, self.gas.gamma)

    @property
    def mach_sq(self):
        return mach_sq_from_bernoulli(self.speed_sq, self.B, self.gas.gamma)

    def vorticity(self):
        return vorticity_2d(self)

    def to_csv(self, path):
        R, T = np.meshgrid(self.r, self.theta, indexing="ij")
        write_csv(path, ["r", "theta", "U1", "U2", "B", "A", "rho", "Msq", "omega3"],
                  [R, T, self.U1, self.U2, self.B, self.A, self.rho, self.mach_sq,
                   self.vorticity()])


def vorticity_2d(field: EulerField2D):
    """omega3 = (d_r(r U2) - d_theta U1) / r.

    Radial derivative by fourth-order centered differences (the same stencil
    used to recover velocities from potentials), theta derivative spectral.
    """
    r = np.asarray(field.r)[:, None]
    h = field.r[1] - field.r[0]
    return (dr4(r * field.U2, h, axis=0) - dtheta(field.U1)) / r


@dataclass
class AxisymField:
    """(U1, U2, U3, B, A) on [r0, r1] x [-L, L], shape (n_r, n_x3)."""

    r: np.ndarray
    x3: np.ndarray
    U1: np.ndarray
    U2: np.ndarray
    U3: np.ndarray
    B: np.ndarray
    A: np.ndarray
    gas: GasParams

    def __post_init__(self):
        shape = np.shape(self.U1)
        self.B = _as_field(self.B, shape)
        self.A = _as_field(self.A, shape)

    @property
    def L(self):
        return float(self.x3[-1])

    @property
    def speed_sq(self):
        return self.U1 ** 2 + self.U2 ** 2 + self.U3 ** 2

    @property
    def rho(self):
        return density_from_bernoulli(self.speed_sq, self.B, self.A, self.gas.gamma)

    @property
    def mach_sq(self):
        return mach_sq_from_bernoulli(self.speed_sq, self.B, self.gas.gamma)

    def vorticity(self):
        """(omega_r, omega_theta, omega_3) of an axisymmetric field.

        omega_r = -d3 U2, omega_theta = d3 U1 - d_r U3,
        omega_3 = d_r(r U2) / r.
        """
        hr = self.r[1] - self.r[0]
        hx = self.x3[1] - self.x3[0]
        r = self.r[:, None]
        w_r = -dr4(self.U2, hx, axis=1)
        w_t = dr4(self.U1, hx, axis=1) - dr4(self.U3, hr, axis=0)
        w_3 = dr4(r * self.U2, hr, axis=0) / r
        return w_r, w_t, w_3

    def to_csv(self, path):
        R, X = np.meshgrid(self.r, self.x3, indexing="ij")
        write_csv(path, ["r", "x3", "U1", "U2", "U3", "B", "A", "Msq"],
                  [R, X, self.U1, self.U2, self.U3, self.B, self.A, self.mach_sq])
