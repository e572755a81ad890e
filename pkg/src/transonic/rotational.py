"""Rotational transonic flows in the annulus.

Two nested fixed-point maps:

* inner (velocity) map: for frozen Bernoulli/entropy (B, A) the velocity
  perturbation is split as U_hat = (d_theta phi1 / r, -d_r phi1) + grad-like
  part of a potential phi2.  phi1 solves a Poisson problem with the
  vorticity source F2; phi2 solves the mixed-type problem.
* outer map: B and A are transported along streamlines of the new
  velocity, using the stream function and its trace on the outer circle.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np
from scipy import fft
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline, RectBivariateSpline
from scipy.linalg import solve_banded

from .errors import ConsistencyError, DomainError, NonConvergenceError, RegimeError
from .fields import EulerField2D
from .ops import dr4, drr4, dtheta, h1_norm, theta_grid
from .potential import AnnulusSetup, BoundaryPerturbation2D, linearize_state, max_contraction
from .spectral import solve_linearized


# --------------------------------------------------------------------------
# Poisson lift
# --------------------------------------------------------------------------

def poisson_annulus(F2, r, return_residual=False):
    """Solve (d_r^2 + d_r/r + d_theta^2/r^2) phi = F2 with phi = 0 at r0, r1.

    Fourier in theta, second-order centered differences in r (one
    tridiagonal solve per harmonic).
    """
    F2 = np.asarray(F2, dtype=float)
    r = np.asarray(r, dtype=float)
    n, nt = F2.shape
    h = r[1] - r[0]
    k = fft.rfftfreq(nt, 1.0 / nt)
    Fh = fft.rfft(F2, axis=1)
    ri = r[1:-1]
    out = np.zeros((n, k.size), dtype=complex)
    ab = np.zeros((3, n - 2))
    lower = 1.0 / h ** 2 - 1.0 / (2.0 * h * ri)
    upper = 1.0 / h ** 2 + 1.0 / (2.0 * h * ri)
    ab[0, 1:] = upper[:-1]
    ab[2, :-1] = lower[1:]
    for j, kk in enumerate(k):
        ab[1] = -2.0 / h ** 2 - kk ** 2 / ri ** 2
        rhs = Fh[1:-1, j]
        sol = solve_banded((1, 1), ab, np.stack([rhs.real, rhs.imag], axis=1))
        out[1:-1, j] = sol[:, 0] + 1j * sol[:, 1]
    phi = fft.irfft(out, n=nt, axis=1)
    if not return_residual:
        return phi
    res = poisson_residual(phi, F2, r)
    return phi, res


def poisson_residual(phi, F2, r):
    """Relative residual of the discrete Poisson operator at interior nodes."""
    h = r[1] - r[0]
    R = r[1:-1, None]
    lap = ((phi[2:] - 2 * phi[1:-1] + phi[:-2]) / h ** 2
           + (phi[2:] - phi[:-2]) / (2 * h * R) + dtheta(phi, 2)[1:-1] / R ** 2)
    scale = max(np.max(np.abs(F2)), 1e-300)
    return float(np.max(np.abs(lap - F2[1:-1])) / scale) if np.any(F2) else float(np.max(np.abs(lap)))


# --------------------------------------------------------------------------
# velocity map
# --------------------------------------------------------------------------

def source_terms(setup: AnnulusSetup, U1, U2, B, A):
    """F1 and F2 for a frozen state (U, B, A).

    F1 collects the quadratic and thermodynamic terms of the deformation
    equation, F2 is the vorticity source from Crocco's relation.
    """
    g = setup.gas.gamma
    bg = setup.bg
    h = setup.h
    r = setup.r[:, None]
    Ub1, Ub2 = bg.U_b1[:, None], bg.U_b2[:, None]
    _, dUb1, dUb2 = (np.asarray(v)[:, None] for v in bg.derivs())
    cb2 = bg.c_sq[:, None]
    U1h, U2h = U1 - Ub1, U2 - Ub2
    Bh, Ah = B - bg.gas.B0, A - bg.gas.A0
    q = B - 0.5 * (U1 ** 2 + U2 ** 2)
    if np.any(q <= 0):
        raise RegimeError("frozen state reaches vacuum")
    c2 = (g - 1.0) * q
    dBr, dAr = dr4(Bh, h, axis=0), dr4(Ah, h, axis=0)
    dBt, dAt = dtheta(Bh), dtheta(Ah)
    adv_B = U1 * dBr + U2 / r * dBt
    adv_A = U1 * dAr + U2 / r * dAt
    F1 = (-(c2 - cb2) / r * U1h
          - ((g - 1.0) * (Bh - 0.5 * U2h ** 2) - 0.5 * (g + 1.0) * U1h ** 2) * dUb1
          + U1h * U2h * dUb2
          - (g - 1.0) / r * (Bh - 0.5 * U1h ** 2 - 0.5 * U2h ** 2) * Ub1
          - adv_B + c2 / ((g - 1.0) * A) * adv_A)
    F2 = (q / (A * g) * dAr - dBr) / U2
    return F1, F2


@dataclass
class VelocityMapResult:
    U1: np.ndarray
    U2: np.ndarray
    phi1: np.ndarray
    phi2: np.ndarray
    d0_tilde: float
    report: dict


def _velocity_step(setup: AnnulusSetup, bc: BoundaryPerturbation2D, U1b, U2b, B, A):
    """One application of the inner map T^(B, A) to the frozen velocity."""
    h = setup.h
    r = setup.r[:, None]
    r0, r1 = setup.r[0], setup.r[-1]
    th = setup.theta
    eps = bc.epsilon
    c = setup.coeffs
    F1, F2 = source_terms(setup, U1b, U2b, B, A)
    phi1, pres = poisson_annulus(F2, setup.r, return_residual=True)
    p1r = dr4(phi1, h, axis=0)
    p1rr = drr4(phi1, h, axis=0)
    p1t = dtheta(phi1)
    p1tt = dtheta(phi1, 2)
    p1rt = dr4(p1t, h, axis=0)

    g = setup.gas.gamma
    c2 = (g - 1.0) * (B - 0.5 * (U1b ** 2 + U2b ** 2))
    A11 = c2 - U1b ** 2
    A22 = (c2 - U2b ** 2) / r ** 2
    A12 = -U1b * U2b / r
    e1, e2t = c.e1[:, None], c.e2_tilde[:, None]
    F3 = (F1 - A11 * (p1rt / r - p1t / r ** 2) + r * A22 * p1rt + r * A12 * p1rr
          - A12 * p1tt / r - e1 * p1t / r + e2t * p1r)
    g1 = bc.g1(th)
    d0t = -float(np.mean(eps * g1 + p1r[-1]))
    E2 = e2t / r + U1b * U2b / r ** 2
    F4 = F3 + E2 * r1 * d0t
    g0t = eps * bc.g0(th) - p1t[0] / r0 - setup.l0 * p1r[0] - setup.l0 * r1 * d0t / r0
    g1t = r1 * (eps * g1 + p1r[-1] + d0t)
    prob = linearize_state(setup, U1b, U2b, B, E2, F4, r0 * g0t, g1t)
    sf = solve_linearized(prob, setup.N)
    phi2 = sf.to_polar(c.f, setup.n_theta)
    U1 = setup.bg.U_b1[:, None] + p1t / r + dr4(phi2, h, axis=0)
    U2 = setup.bg.U_b2[:, None] - p1r + (dtheta(phi2) - r1 * d0t) / r
    info = {"F1_max": float(np.max(np.abs(F1))), "F2_max": float(np.max(np.abs(F2))),
            "poisson_residual": pres}
    return U1, U2, phi1, phi2, d0t, info


def velocity_map(B, A, setup: AnnulusSetup, bc: BoundaryPerturbation2D, U0=None,
                 tol=1e-10, max_iter=100, divergence_window=3):
    """Inner fixed point: velocity field for frozen (B, A).

    Iterates the frozen-coefficient solve until the H^1 increment of the
    velocity is below ``tol``.
    """
    shape = (setup.r.size, setup.n_theta)
    B = np.broadcast_to(np.asarray(B, dtype=float), shape)
    A = np.broadcast_to(np.asarray(A, dtype=float), shape)
    if U0 is None:
        U1b = np.broadcast_to(setup.bg.U_b1[:, None], shape).copy()
        U2b = np.broadcast_to(setup.bg.U_b2[:, None], shape).copy()
    else:
        U1b, U2b = (np.array(u, dtype=float) for u in U0)
    incs = []
    up = 0
    info = {}
    for k in range(max_iter):
        U1, U2, phi1, phi2, d0t, info = _velocity_step(setup, bc, U1b, U2b, B, A)
        inc = h1_norm(U1 - U1b, setup.r) + h1_norm(U2 - U2b, setup.r)
        if incs and inc >= incs[-1]:
            up += 1
        else:
            up = 0
        incs.append(inc)
        U1b, U2b = U1, U2
        if inc <= tol:
            break
        if up >= divergence_window:
            raise NonConvergenceError("velocity map diverges", incs)
    else:
        raise NonConvergenceError(f"velocity map not converged after {max_iter} steps", incs)
    report = dict(info, iterations=len(incs), increments=incs,
                  max_contraction=max_contraction(incs, tol))
    return VelocityMapResult(U1=U1, U2=U2, phi1=phi1, phi2=phi2, d0_tilde=d0t, report=report)


# --------------------------------------------------------------------------
# stream function and transport
# --------------------------------------------------------------------------

@dataclass
class StreamFunction:
    """psi on [r0, r1] x theta-grid with its trace on r = r1.

    The trace is psi_r1(t) = slope * t + P(t) with P a trigonometric
    polynomial, which makes it available (and invertible) on the whole line.
    """

    r: np.ndarray
    theta: np.ndarray
    psi: np.ndarray
    slope: float
    trace_hat: np.ndarray  # rfft coefficients of the periodic part P
    closure: float

    @property
    def period_flux(self):
        return 2.0 * np.pi * self.slope

    def _periodic(self, t, deriv=0):
        n = self.theta.size
        k = fft.rfftfreq(n, 1.0 / n)
        w = np.full(k.size, 2.0)
        w[0] = 1.0
        if n % 2 == 0:
            w[-1] = 0.0
        coef = w * self.trace_hat * (1j * k) ** deriv
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape)
        # accumulate harmonics one at a time to keep memory flat
        for kk, ck in zip(k, coef):
            if ck != 0:
                out += np.real(ck * np.exp(1j * kk * t))
        return out / n

    def trace(self, t):
        return self.slope * np.asarray(t) + self._periodic(t)

    def trace_derivative(self, t):
        return self.slope + self._periodic(t, 1)

    def lifted(self, periods=(-1, 0, 1)):
        """psi on the theta-line covering the given periods."""
        th = np.concatenate([self.theta + 2 * np.pi * p for p in periods])
        ps = np.concatenate([self.psi + self.period_flux * p for p in periods], axis=1)
        return th, ps

    def inverse_trace(self, values, tol=1e-12, max_iter=100):
        """Solve psi_r1(t) = value for t (safeguarded Newton on a bracket)."""
        v = np.asarray(values, dtype=float)
        m = self.slope
        if not m < 0:
            raise RegimeError("stream trace is not decreasing (needs rho U1 < 0 at r1)")
        fine = np.linspace(0, 2 * np.pi, 4 * self.theta.size, endpoint=False)
        dmax = float(np.max(self.trace_derivative(fine)))
        if dmax >= 0:
            raise RegimeError("stream trace is not monotone")
        # bound on the periodic part, padded for values between the sample points
        pmax = 2.0 * float(np.max(np.abs(self._periodic(fine)))) + 1e-12
        lo = (v + pmax) / m
        hi = (v - pmax) / m
        t = 0.5 * (lo + hi)
        for _ in range(max_iter):
            fval = self.trace(t) - v
            # decreasing: f > 0 means the root lies to the right
            lo = np.where(fval > 0, t, lo)
            hi = np.where(fval <= 0, t, hi)
            tn = t - fval / self.trace_derivative(t)
            bad = ~((tn > lo) & (tn < hi))
            tn = np.where(bad, 0.5 * (lo + hi), tn)
            done = np.max(np.abs(tn - t)) <= tol
            t = tn
            if done:
                break
        return t


def build_stream_function(field: EulerField2D, closure_tol=1e-4):
    """Stream function with d_r psi = -rho U2 and d_theta psi = r rho U1.

    psi(r, theta) = int_0^theta r1 rho U1(r1, t) dt - int_{r1}^r rho U2 dr.
    The theta integral is spectral, the radial one uses the antiderivative of
    a cubic spline.  ``closure`` is the relative mismatch of d_theta psi and
    r rho U1, which measures the discrete mass conservation residual.
    """
    r = np.asarray(field.r)
    rho = field.rho
    n = field.U1.shape[1]
    q = r[-1] * rho[-1] * field.U1[-1]
    slope = float(np.mean(q))
    P_hat = fft.rfft(q - slope)
    k = fft.rfftfreq(n, 1.0 / n)
    Ph = np.zeros_like(P_hat)
    Ph[1:] = P_hat[1:] / (1j * k[1:])
    if n % 2 == 0:
        Ph[-1] = 0.0
    # fix P(0) = 0
    w = np.full(k.size, 2.0)
    w[0] = 1.0
    if n % 2 == 0:
        w[-1] = 0.0
    Ph[0] = -np.real(np.sum(w[1:] * Ph[1:]))
    th = theta_grid(n)
    trace = slope * th + fft.irfft(Ph, n=n)
    anti = CubicSpline(r, rho * field.U2, axis=0).antiderivative()
    radial = anti(r) - anti(r[-1])
    psi = trace[None, :] - radial
    rflux = r[:, None] * rho * field.U1
    dpsi = dtheta(psi - slope * th[None, :]) + slope
    closure = float(np.max(np.abs(dpsi - rflux)) / np.max(np.abs(rflux)))
    if closure > closure_tol:
        raise ConsistencyError(f"stream function closure {closure:.3e} exceeds {closure_tol:g}")
    return StreamFunction(r=r, theta=th, psi=psi, slope=slope, trace_hat=Ph, closure=closure)


@dataclass
class TransportResult:
    B: np.ndarray
    A: np.ndarray
    periodicity_defect: float


def transport_BA(stream: StreamFunction, B1, A1, epsilon, B0, A0):
    """Transport B and A from r1 along streamlines.

    B_hat(r, theta) = eps B1(psi_r1^{-1}(psi(r, theta))), likewise for A.
    The inversion runs on three periods of the theta-line; the center period
    is returned and the mismatch between neighbouring periods is reported.
    """
    th, ps = stream.lifted((-1, 0, 1))
    n = stream.theta.size
    foot = stream.inverse_trace(ps)
    Bl = epsilon * B1(foot)
    Al = epsilon * A1(foot)
    center = slice(n, 2 * n)
    defect = 0.0
    for arr in (Bl, Al):
        defect = max(defect, float(np.max(np.abs(arr[:, :n] - arr[:, center]))),
                     float(np.max(np.abs(arr[:, 2 * n:] - arr[:, center]))))
    return TransportResult(B=B0 + Bl[:, center], A=A0 + Al[:, center], periodicity_defect=defect)


# --------------------------------------------------------------------------
# outer iteration
# --------------------------------------------------------------------------

@dataclass
class RotationalControls:
    inner_tol: float = 1e-10
    outer_tol: float = 1e-9
    max_inner: int = 100
    max_outer: int = 60
    divergence_window: int = 3
    trust_region: bool = True
    max_halvings: int = 6


@dataclass
class RotationalResult:
    field: EulerField2D
    stream: StreamFunction
    velocity: VelocityMapResult
    report: dict


def _outer(setup, bc, controls, init):
    g = setup.gas
    shape = (setup.r.size, setup.n_theta)
    if init is None:
        Bb, Ab, U0 = np.full(shape, g.B0), np.full(shape, g.A0), None
    else:
        Bb, Ab, U0 = init
    eps = bc.epsilon
    delta1 = np.sqrt(eps)
    delta0 = np.sqrt(eps + delta1)
    incs, inner_iters, inner_factors, defects = [], [], [], []
    up = 0
    status = "maxiter"
    vel = stream = None
    for k in range(controls.max_outer):
        vel = velocity_map(Bb, Ab, setup, bc, U0, controls.inner_tol, controls.max_inner,
                           controls.divergence_window)
        inner_iters.append(vel.report["iterations"])
        inner_factors.append(vel.report["max_contraction"])
        U0 = (vel.U1, vel.U2)
        fld = EulerField2D(r=setup.r, U1=vel.U1, U2=vel.U2, B=Bb, A=Ab, gas=g)
        stream = build_stream_function(fld)
        tr = transport_BA(stream, bc.B1, bc.A1, eps, g.B0, g.A0)
        defects.append(tr.periodicity_defect)
        inc = h1_norm(tr.B - Bb, setup.r) + h1_norm(tr.A - Ab, setup.r)
        up = up + 1 if incs and inc >= incs[-1] else 0
        incs.append(inc)
        Bb, Ab = tr.B, tr.A
        if controls.trust_region and eps > 0:
            uh = h1_norm(vel.U1 - setup.bg.U_b1[:, None], setup.r) + \
                h1_norm(vel.U2 - setup.bg.U_b2[:, None], setup.r)
            bh = h1_norm(Bb - g.B0, setup.r) + h1_norm(Ab - g.A0, setup.r)
            if uh > delta0 or bh > delta1:
                status = "trust"
                break
        if inc <= controls.outer_tol:
            status = "converged"
            break
        if up >= controls.divergence_window:
            status = "diverged"
            break
    state = (Bb, Ab, U0)
    return status, state, vel, stream, dict(outer_increments=incs, inner_iterations=inner_iters,
                                            inner_contraction=inner_factors,
                                            periodicity_defects=defects,
                                            delta0=float(delta0), delta1=float(delta1))


def solve_rotational(setup: AnnulusSetup, bc: BoundaryPerturbation2D, controls=None, _depth=0):
    """Two-layer fixed-point iteration for rotational transonic flow.

    Requires a strictly negative background radial velocity so that the
    stream function trace is invertible.
    """
    if not setup.gas.U10 < 0:
        raise DomainError("rotational solver needs U10 < 0 (nonzero radial velocity)")
    controls = controls or RotationalControls()
    status, state, vel, stream, rep = _outer(setup, bc, controls, None)
    halvings = 0
    if status in ("trust", "diverged"):
        if _depth >= controls.max_halvings:
            raise NonConvergenceError(f"rotational iteration failed ({status})",
                                      rep["outer_increments"])
        half = solve_rotational(setup, bc.scaled(0.5 * bc.epsilon), controls, _depth + 1)
        g = setup.gas
        f = half.field
        guess = (g.B0 + 2 * (f.B - g.B0), g.A0 + 2 * (f.A - g.A0),
                 (setup.bg.U_b1[:, None] + 2 * (f.U1 - setup.bg.U_b1[:, None]),
                  setup.bg.U_b2[:, None] + 2 * (f.U2 - setup.bg.U_b2[:, None])))
        status, state, vel, stream, rep = _outer(
            setup, bc, dataclasses.replace(controls, trust_region=False), guess)
        halvings = half.report["continuation_halvings"] + 1
    if status != "converged":
        raise NonConvergenceError(f"rotational outer iteration {status}", rep["outer_increments"])
    Bb, Ab, _ = state
    # velocity of the last inner solve belongs to the (B, A) used to compute it;
    # the last transport changed (B, A) by less than outer_tol
    fld = EulerField2D(r=setup.r, U1=vel.U1, U2=vel.U2, B=Bb, A=Ab, gas=setup.gas)
    rep.update(epsilon=bc.epsilon, outer_iterations=len(rep["outer_increments"]),
               outer_contraction=max_contraction(rep["outer_increments"], controls.outer_tol),
               continuation_halvings=halvings, stream_closure=stream.closure,
               F1_max=vel.report["F1_max"], F2_max=vel.report["F2_max"],
               poisson_residual=vel.report["poisson_residual"])
    return RotationalResult(field=fld, stream=stream, velocity=vel, report=rep)


# --------------------------------------------------------------------------
# diagnostics
# --------------------------------------------------------------------------

def _periodic_spline(field: EulerField2D, values, pad=4):
    th = field.theta
    ext = np.concatenate([th[-pad:] - 2 * np.pi, th, th[:pad] + 2 * np.pi])
    vals = np.concatenate([values[:, -pad:], values, values[:, :pad]], axis=1)
    return RectBivariateSpline(field.r, ext, vals, kx=3, ky=3)


def trace_streamlines(field: EulerField2D, theta_starts, n_samples=200, rtol=1e-11):
    """Follow streamlines from r1 inward: d theta / dr = U2 / (r U1).

    Returns (r samples, theta paths, B along paths, A along paths).
    """
    s1 = _periodic_spline(field, field.U1)
    s2 = _periodic_spline(field, field.U2)
    sB = _periodic_spline(field, field.B)
    sA = _periodic_spline(field, field.A)
    r = np.asarray(field.r)
    rs = np.linspace(r[-1], r[0], n_samples)

    def wrap(t):
        return np.mod(t, 2 * np.pi)

    def rhs(rr, t):
        tw = wrap(t)
        return s2.ev(rr, tw) / (rr * s1.ev(rr, tw))

    paths = []
    for t0 in np.atleast_1d(theta_starts):
        sol = solve_ivp(rhs, (r[-1], r[0]), [t0], t_eval=rs, rtol=rtol, atol=1e-13, method="DOP853")
        paths.append(sol.y[0])
    paths = np.array(paths)
    Bp = np.array([sB.ev(rs, wrap(p)) for p in paths])
    Ap = np.array([sA.ev(rs, wrap(p)) for p in paths])
    return rs, paths, Bp, Ap


def streamline_oscillation(field: EulerField2D, n_lines=20):
    """max over sampled streamlines of the oscillation of B and A."""
    starts = np.linspace(0, 2 * np.pi, n_lines, endpoint=False)
    _, _, Bp, Ap = trace_streamlines(field, starts)
    osc_B = float(np.max(Bp.max(axis=1) - Bp.min(axis=1)))
    osc_A = float(np.max(Ap.max(axis=1) - Ap.min(axis=1)))
    return {"B": osc_B, "A": osc_A}


def crocco_residual(field: EulerField2D):
    """Residual of U2 (d_theta U1 - d_r(r U2)) / r + d_r B - (B - |U|^2/2)/(A g) d_r A."""
    h = field.r[1] - field.r[0]
    r = field.r[:, None]
    g = field.gas.gamma
    q = field.B - 0.5 * field.speed_sq
    res = (field.U2 * (dtheta(field.U1) - dr4(r * field.U2, h, axis=0)) / r
           + dr4(field.B, h, axis=0) - q / (field.A * g) * dr4(field.A, h, axis=0))
    return float(np.max(np.abs(res)))


def curl_consistency(vel: VelocityMapResult, setup: AnnulusSetup, B, A):
    """max |curl(U_hat)/r - F2| for the output of the velocity map."""
    r = setup.r[:, None]
    h = setup.h
    U1h = vel.U1 - setup.bg.U_b1[:, None]
    U2h = vel.U2 - setup.bg.U_b2[:, None]
    curl = dtheta(U1h) / r - dr4(r * U2h, h, axis=0) / r
    _, F2 = source_terms(setup, vel.U1, vel.U2, B, A)
    return float(np.max(np.abs(curl - F2)))
