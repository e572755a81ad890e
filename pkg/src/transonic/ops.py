"""Grid operators shared by the 2-D solvers.

Fields on the annulus are arrays of shape (n_r, n_theta) sampled at
uniform radii and at theta_k = 2 pi k / n_theta.  Derivatives in theta are
spectral; radial derivatives use fourth-order (or second-order) finite
differences on the uniform radial grid.
"""
from __future__ import annotations

import numpy as np
from scipy import fft
from scipy.interpolate import CubicSpline

from .errors import ParameterError


def theta_grid(n):
    return 2.0 * np.pi * np.arange(n) / n


def _wavenumbers(n):
    k = fft.rfftfreq(n, 1.0 / n)
    return k


def dtheta(f, order=1):
    """Spectral theta-derivative along the last axis.

    The Nyquist mode (even n) is dropped for odd orders since its
    derivative is not representable on the grid.
    """
    f = np.asarray(f, dtype=float)
    n = f.shape[-1]
    k = _wavenumbers(n)
    fh = fft.rfft(f, axis=-1)
    mult = (1j * k) ** order
    if n % 2 == 0 and order % 2 == 1:
        mult[-1] = 0.0
    return fft.irfft(fh * mult, n=n, axis=-1)


def shift_theta(f, s):
    """Return g(r, y) = f(r, y - s(r)) exactly for trigonometric data.

    ``s`` has one entry per row (or is a scalar).
    """
    f = np.asarray(f, dtype=float)
    s = np.asarray(s, dtype=float)
    if not np.any(s):
        return f.copy()
    n = f.shape[-1]
    k = _wavenumbers(n)
    phase = np.exp(-1j * np.multiply.outer(s, k))
    if n % 2 == 0:
        # the Nyquist mode cannot be shifted on the grid; keep its cosine
        # part scaled by cos(n s / 2) (the real part of the exact shift)
        phase[..., -1] = np.cos(s * k[-1]) if np.ndim(s) else np.cos(float(s) * k[-1])
    return fft.irfft(fft.rfft(f, axis=-1) * phase, n=n, axis=-1)


def shift_theta_cubic(f, s):
    """Same as :func:`shift_theta` but with periodic cubic splines."""
    f = np.atleast_2d(np.asarray(f, dtype=float))
    n = f.shape[-1]
    th = theta_grid(n)
    s = np.broadcast_to(np.asarray(s, dtype=float), (f.shape[0],))
    out = np.empty_like(f)
    ext = np.concatenate([th, [2.0 * np.pi]])
    for i in range(f.shape[0]):
        cs = CubicSpline(ext, np.concatenate([f[i], f[i, :1]]), bc_type="periodic")
        out[i] = cs(np.mod(th - s[i], 2.0 * np.pi))
    return out


def to_characteristic_coords(field, f, method="spectral"):
    """Resample a (r, theta) field at y2 = theta + f(r).

    Returns the array g(y1, y2) = field(y1, y2 - f(y1)) on the same grid.
    """
    if method == "spectral":
        return shift_theta(field, f)
    if method == "cubic":
        return shift_theta_cubic(field, f)
    raise ValueError(f"unknown interpolation method {method!r}")


def from_characteristic_coords(field, f, method="spectral"):
    """Inverse of :func:`to_characteristic_coords`."""
    return to_characteristic_coords(field, -np.asarray(f), method)


def _moveaxis(f, axis):
    return np.moveaxis(np.asarray(f, dtype=float), axis, 0)


def dr4(f, h, axis=0):
    """Fourth-order first derivative on a uniform grid (one-sided near ends)."""
    a = _moveaxis(f, axis)
    if a.shape[0] < 5:
        raise ParameterError("fourth-order stencil needs at least 5 nodes")
    d = np.empty_like(a)
    d[2:-2] = (a[:-4] - 8 * a[1:-3] + 8 * a[3:-1] - a[4:]) / 12.0
    d[0] = (-25 * a[0] + 48 * a[1] - 36 * a[2] + 16 * a[3] - 3 * a[4]) / 12.0
    d[1] = (-3 * a[0] - 10 * a[1] + 18 * a[2] - 6 * a[3] + a[4]) / 12.0
    d[-1] = -(-25 * a[-1] + 48 * a[-2] - 36 * a[-3] + 16 * a[-4] - 3 * a[-5]) / 12.0
    d[-2] = -(-3 * a[-1] - 10 * a[-2] + 18 * a[-3] - 6 * a[-4] + a[-5]) / 12.0
    return np.moveaxis(d / h, 0, axis)


def drr4(f, h, axis=0):
    """Fourth-order second derivative on a uniform grid."""
    a = _moveaxis(f, axis)
    if a.shape[0] < 6:
        raise ParameterError("fourth-order second derivative needs at least 6 nodes")
    d = np.empty_like(a)
    d[2:-2] = (-a[:-4] + 16 * a[1:-3] - 30 * a[2:-2] + 16 * a[3:-1] - a[4:]) / 12.0
    d[0] = (45 * a[0] - 154 * a[1] + 214 * a[2] - 156 * a[3] + 61 * a[4] - 10 * a[5]) / 12.0
    d[1] = (10 * a[0] - 15 * a[1] - 4 * a[2] + 14 * a[3] - 6 * a[4] + a[5]) / 12.0
    d[-1] = (45 * a[-1] - 154 * a[-2] + 214 * a[-3] - 156 * a[-4] + 61 * a[-5] - 10 * a[-6]) / 12.0
    d[-2] = (10 * a[-1] - 15 * a[-2] - 4 * a[-3] + 14 * a[-4] - 6 * a[-5] + a[-6]) / 12.0
    return np.moveaxis(d / h ** 2, 0, axis)


def dr2(f, h, axis=0):
    """Second-order centered first derivative (one-sided second order at ends)."""
    return np.gradient(np.asarray(f, dtype=float), h, axis=axis, edge_order=2)


def integrate_theta(f):
    """Integral over one period along the last axis (spectrally exact)."""
    f = np.asarray(f, dtype=float)
    return f.sum(axis=-1) * (2.0 * np.pi / f.shape[-1])


def integrate_r(f, r):
    """Trapezoidal integral along the first axis."""
    return np.trapezoid(np.asarray(f, dtype=float), r, axis=0)


def integrate_annulus(f, r):
    """Integral over [r0, r1] x [0, 2 pi) in the (y1, y2) measure."""
    return float(integrate_r(integrate_theta(f), r))


def discrete_sobolev_norm(values, k, y1):
    """Discrete H^k norm on the tensor grid.

    Sums the L^2 norms of all mixed derivatives d1^a d2^b with a + b <= k.
    Derivatives are Fourier in y2 and second-order centered in y1.
    """
    if k not in (0, 1, 2, 3, 4):
        raise ParameterError("Sobolev order must be in 0..4")
    v = np.asarray(values, dtype=float)
    y1 = np.asarray(y1, dtype=float)
    h = y1[1] - y1[0]
    total = 0.0
    radial = [v]
    for a in range(1, k + 1):
        radial.append(dr2(radial[-1], h, axis=0))
    for a in range(k + 1):
        cur = radial[a]
        for b in range(k - a + 1):
            if b:
                cur = dtheta(cur)
            total += integrate_annulus(cur ** 2, y1)
    return float(np.sqrt(total))


def h1_norm(values, y1):
    return discrete_sobolev_norm(values, 1, y1)
