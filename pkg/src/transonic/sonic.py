"""Sonic curve r = s(theta) and sonic surface r = chi(x3)."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

from .errors import GeometryError
from .fields import AxisymField, EulerField2D
from .io import write_csv
from .ops import dtheta


@dataclass
class SonicCurve:
    theta: np.ndarray
    s: np.ndarray
    s_prime: np.ndarray
    r_c: float
    residual: float
    max_dev: float
    max_dev_prime: float
    c1_dev: float
    nonexceptional_min: float

    def summary(self):
        return {"r_c": self.r_c, "s_min": float(self.s.min()), "s_max": float(self.s.max()),
                "max_dev": self.max_dev, "max_dev_prime": self.max_dev_prime,
                "c1_dev": self.c1_dev, "root_residual": self.residual,
                "nonexceptional_min": self.nonexceptional_min}

    def to_csv(self, path):
        write_csv(path, ["theta", "s", "s_prime"], [self.theta, self.s, self.s_prime])


@dataclass
class SonicSurface:
    x3: np.ndarray
    chi: np.ndarray
    r_c: float
    residual: float
    max_dev: float
    tail_dev: float
    end_dev: float

    def summary(self):
        return {"r_c": self.r_c, "max_dev": self.max_dev, "tail_dev": self.tail_dev,
                "end_dev": self.end_dev, "root_residual": self.residual}

    def tail(self, lo, hi):
        """max |chi - r_c| over lo <= |x3| <= hi."""
        m = (np.abs(self.x3) >= lo) & (np.abs(self.x3) <= hi)
        return float(np.max(np.abs(self.chi[m] - self.r_c))) if m.any() else 0.0

    def to_csv(self, path):
        write_csv(path, ["x3", "chi"], [self.x3, self.chi])


def _column_roots(r, msq, labels, label_name):
    """Root of |M|^2 = 1 in every column of msq (shape (n_r, n_col))."""
    ncol = msq.shape[1]
    roots = np.empty(ncol)
    splines = []
    resid = 0.0
    for j in range(ncol):
        col = msq[:, j]
        if not (col[0] > 1.0 > col[-1]):
            raise GeometryError(f"no sonic bracket at {label_name}={labels[j]:.6g} "
                                f"(|M|^2 = {col[0]:.4g} .. {col[-1]:.4g})")
        if np.any(np.diff(col) >= 0):
            raise GeometryError(f"|M|^2 not decreasing in r at {label_name}={labels[j]:.6g}")
        cs = CubicSpline(r, col - 1.0)
        i = int(np.nonzero(col > 1.0)[0][-1])
        s = brentq(cs, r[i], r[i + 1], xtol=1e-14, rtol=1e-15, maxiter=200)
        # one Newton polish on the interpolant
        d = cs(s, 1)
        if d != 0:
            s2 = s - cs(s) / d
            if r[i] <= s2 <= r[i + 1] and abs(cs(s2)) <= abs(cs(s)):
                s = s2
        roots[j] = s
        resid = max(resid, abs(float(cs(s))))
        splines.append(cs)
    return roots, splines, resid


def locate_sonic_2d(field: EulerField2D, r_c):
    """Sonic curve of a 2-D field.

    Per theta column |M|^2 - 1 is interpolated by a cubic spline in r and its
    root found by bracketing plus a Newton polish.  The slope is
    s' = -(d_theta |M|^2) / (d_r |M|^2) at the root, with the theta
    derivative taken spectrally.
    """
    r = np.asarray(field.r)
    msq = field.mach_sq
    th = field.theta
    s, splines, resid = _column_roots(r, msq, th, "theta")
    dth = dtheta(msq)
    s_prime = np.empty_like(s)
    U1s = np.empty_like(s)
    U2s = np.empty_like(s)
    cs_ = np.empty_like(s)
    for j in range(th.size):
        s_prime[j] = -CubicSpline(r, dth[:, j])(s[j]) / splines[j](s[j], 1)
        U1s[j] = CubicSpline(r, field.U1[:, j])(s[j])
        U2s[j] = CubicSpline(r, field.U2[:, j])(s[j])
        cs_[j] = np.sqrt(U1s[j] ** 2 + U2s[j] ** 2)  # |U| = c on the sonic curve
    tang = np.abs(U1s * s_prime + U2s * s) / np.sqrt(s_prime ** 2 + s ** 2)
    dev = np.abs(s - r_c)
    return SonicCurve(theta=th, s=s, s_prime=s_prime, r_c=float(r_c), residual=float(resid),
                      max_dev=float(dev.max()), max_dev_prime=float(np.abs(s_prime).max()),
                      c1_dev=float(np.max(dev + np.abs(s_prime))),
                      nonexceptional_min=float(np.min(tang / cs_)))


def locate_sonic_axisym(field: AxisymField, r_c):
    """Sonic surface r = chi(x3) of an axisymmetric field."""
    r = np.asarray(field.r)
    x3 = np.asarray(field.x3)
    chi, _, resid = _column_roots(r, field.mach_sq, x3, "x3")
    dev = np.abs(chi - r_c)
    L = field.L
    tail = dev[np.abs(x3) >= 0.5 * L]
    return SonicSurface(x3=x3, chi=chi, r_c=float(r_c), residual=float(resid),
                        max_dev=float(dev.max()), tail_dev=float(tail.max()),
                        end_dev=float(max(dev[0], dev[-1])))
