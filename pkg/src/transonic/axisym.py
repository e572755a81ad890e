"""Axisymmetric transonic flows in a concentric cylinder.

The perturbation (U_hat, B_hat, A_hat) of the cylindrically symmetric
background splits into a hyperbolic part, where r U2, B and A are
transported along the meridional characteristics dx3/dr = U3/U1, and a
first-order elliptic system for (U1, U3).  The latter is reduced by a
Poisson lift phi1 (curl part) and a potential phi solving

    A_b11 phi_rr + A_b33 phi_33 + e1 phi_r = G3

on the truncated strip (r0, r1) x (-L, L).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline, RectBivariateSpline
from scipy.sparse.linalg import splu

from .background import BackgroundProfile, solve_background
from .coeffs import CoeffProfile, compute_coeffs
from .errors import DomainError, NonConvergenceError, RegimeError, SolverError
from .fields import AxisymField
from .gas import GasParams
from .ops import dr4
from .potential import max_contraction
from .profiles import ZERO, Profile

STAGNATION_FLOOR = 1e-8


@dataclass(frozen=True)
class AxisymData:
    """Boundary perturbations: q1 (U1 at r0), q2, q3 (U2, U3 at r1), B1, A1."""

    epsilon: float = 0.0
    q1: Profile = ZERO
    q2: Profile = ZERO
    q3: Profile = ZERO
    B1: Profile = ZERO
    A1: Profile = ZERO

    @property
    def hyperbolic_zero(self):
        return all(getattr(p, "is_zero", False) for p in (self.q2, self.B1, self.A1))


# --------------------------------------------------------------------------
# strip operators
# --------------------------------------------------------------------------

class StripOperator:
    """5-point discretization of a11 u_rr + a33 u_33 + e1 u_r on the strip.

    ``r0_kind``/``r1_kind`` are "dirichlet" or "neumann"; x3 = +-L are
    Dirichlet.  Neumann rows use a ghost node, which keeps the matrix an
    M-matrix whenever h < 2 a11 / |e1|.  The LU factorization is computed
    once and reused for every right-hand side.
    """

    def __init__(self, r, x3, a11, a33, e1, r0_kind="neumann", r1_kind="dirichlet"):
        self.r = np.asarray(r, dtype=float)
        self.x3 = np.asarray(x3, dtype=float)
        n, m = self.r.size, self.x3.size
        self.h = h = self.r[1] - self.r[0]
        self.hx = hx = self.x3[1] - self.x3[0]
        a11 = np.broadcast_to(np.asarray(a11, dtype=float), (n,))
        a33 = np.broadcast_to(np.asarray(a33, dtype=float), (n,))
        e1 = np.broadcast_to(np.asarray(e1, dtype=float), (n,))
        self.kinds = (r0_kind, r1_kind)
        self.i_lo = 0 if r0_kind == "neumann" else 1
        self.i_hi = n - 1 if r1_kind == "neumann" else n - 2
        self.rows = np.arange(self.i_lo, self.i_hi + 1)
        mi = m - 2
        W = a11 / h ** 2 - e1 / (2 * h)
        E = a11 / h ** 2 + e1 / (2 * h)
        X = a33 / hx ** 2
        D = -2 * a11 / h ** 2 - 2 * X
        if r0_kind == "neumann":
            E = E.copy()
            W = W.copy()
            E[0], W[0] = 2 * a11[0] / h ** 2, 0.0
        if r1_kind == "neumann":
            E = E.copy()
            W = W.copy()
            W[-1], E[-1] = 2 * a11[-1] / h ** 2, 0.0
        self.W, self.E, self.X, self.D = W, E, X, D
        self.a11, self.e1 = a11, e1
        if np.any(W[1:] < 0) or np.any(E[:-1] < 0) or np.any(D >= 0):
            raise SolverError("strip operator is not an M-matrix (radial grid too coarse)",
                              min_pivot=float(np.min(np.concatenate([W[1:], E[:-1]]))))
        rows, cols, vals = [], [], []
        jj = np.arange(mi)
        for i in self.rows:
            k = (i - self.i_lo) * mi + jj
            rows.append(k)
            cols.append(k)
            vals.append(np.full(mi, D[i]))
            rows += [k[1:], k[:-1]]
            cols += [k[:-1], k[1:]]
            vals += [np.full(mi - 1, X[i])] * 2
            if i - 1 >= self.i_lo:
                rows.append(k)
                cols.append(k - mi)
                vals.append(np.full(mi, W[i]))
            if i + 1 <= self.i_hi:
                rows.append(k)
                cols.append(k + mi)
                vals.append(np.full(mi, E[i]))
        nn = self.rows.size * mi
        self.matrix = sparse.csc_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(nn, nn))
        self.lu = splu(self.matrix)

    def solve(self, G, r0_data, r1_data, side_lo, side_hi, return_residual=False):
        """Solve with source G (n_r, n_x3).

        r0_data/r1_data are values (Dirichlet) or fluxes (Neumann) along x3;
        side_lo/side_hi are Dirichlet values along r at x3 = -L, L.
        """
        n, m = self.r.size, self.x3.size
        h = self.h
        r0_data = np.broadcast_to(np.asarray(r0_data, dtype=float), (m,))
        r1_data = np.broadcast_to(np.asarray(r1_data, dtype=float), (m,))
        side_lo = np.broadcast_to(np.asarray(side_lo, dtype=float), (n,))
        side_hi = np.broadcast_to(np.asarray(side_hi, dtype=float), (n,))
        rhs = np.array(G, dtype=float)[self.rows][:, 1:-1]
        for a, i in enumerate(self.rows):
            if i == 0 and self.kinds[0] == "neumann":
                g = r0_data[1:-1]
                rhs[a] += (2 * self.a11[0] / h - self.e1[0]) * g
            if i == n - 1 and self.kinds[1] == "neumann":
                g = r1_data[1:-1]
                rhs[a] -= (2 * self.a11[-1] / h + self.e1[-1]) * g
            if i - 1 == 0 and self.kinds[0] == "dirichlet":
                rhs[a] -= self.W[i] * r0_data[1:-1]
            if i + 1 == n - 1 and self.kinds[1] == "dirichlet":
                rhs[a] -= self.E[i] * r1_data[1:-1]
            rhs[a, 0] -= self.X[i] * side_lo[i]
            rhs[a, -1] -= self.X[i] * side_hi[i]
        b = rhs.ravel()
        sol = self.lu.solve(b)
        res = float(np.max(np.abs(self.matrix @ sol - b)) / max(np.max(np.abs(b)), 1e-300))
        if res > 1e-10:
            # one step of iterative refinement
            sol = sol + self.lu.solve(b - self.matrix @ sol)
            res = float(np.max(np.abs(self.matrix @ sol - b)) / max(np.max(np.abs(b)), 1e-300))
        u = np.empty((n, m))
        u[self.rows, 1:-1] = sol.reshape(self.rows.size, m - 2)
        u[:, 0] = side_lo
        u[:, -1] = side_hi
        if self.kinds[0] == "dirichlet":
            u[0, 1:-1] = r0_data[1:-1]
        if self.kinds[1] == "dirichlet":
            u[-1, 1:-1] = r1_data[1:-1]
        return (u, res) if return_residual else u

    def apply(self, u):
        """Discrete operator at the unknown nodes (Neumann rows use the zero-flux ghost)."""
        n = self.r.size
        out = np.zeros_like(u)
        for i in self.rows:
            w = u[i - 1] if i > 0 else u[i + 1]
            e = u[i + 1] if i < n - 1 else u[i - 1]
            row = self.D[i] * u[i, 1:-1] + self.X[i] * (u[i, :-2] + u[i, 2:])
            row += (self.W[i] * w[1:-1] if i > 0 else 0) + (self.E[i] * e[1:-1] if i < n - 1 else 0)
            out[i, 1:-1] = row
        return out


@dataclass
class StripProblem:
    """Data of the elliptic strip problem for phi."""

    r: np.ndarray
    x3: np.ndarray
    A_b11: np.ndarray
    A_b33: np.ndarray
    e1: np.ndarray
    G3: np.ndarray
    q1: np.ndarray      # eps q1 on the x3 grid
    Q3: np.ndarray      # eps int_0^x3 q3 on the x3 grid
    q3_l1: float        # eps ||q3||_L1


def elliptic_strip_solve(prob: StripProblem, op: StripOperator = None, return_residual=False):
    """phi with d_r phi = eps q1 at r0 and phi = eps int_0^x3 q3 on r1 and x3 = +-L."""
    if op is None:
        op = StripOperator(prob.r, prob.x3, prob.A_b11, prob.A_b33, prob.e1, "neumann", "dirichlet")
    n = prob.r.size
    return op.solve(prob.G3, prob.q1, prob.Q3, np.full(n, prob.Q3[0]), np.full(n, prob.Q3[-1]),
                    return_residual=return_residual)


def strip_poisson(G2, r, x3, op: StripOperator = None):
    """(d_r^2 + d_3^2) phi1 = G2, phi1 = 0 at r0 and x3 = +-L, d_r phi1 = 0 at r1."""
    if op is None:
        op = StripOperator(r, x3, 1.0, 1.0, 0.0, "dirichlet", "neumann")
    return op.solve(G2, 0.0, 0.0, 0.0, 0.0)


# --------------------------------------------------------------------------
# setup and transport
# --------------------------------------------------------------------------

@dataclass
class StripSetup:
    bg: BackgroundProfile
    coeffs: CoeffProfile
    x3: np.ndarray
    elliptic: StripOperator
    poisson: StripOperator

    @property
    def r(self):
        return np.asarray(self.bg.r_grid)

    @property
    def L(self):
        return float(self.x3[-1])

    @property
    def gas(self) -> GasParams:
        return self.bg.gas


def prepare_strip(gas: GasParams, r0, r1, n_r=129, L=16.0, hx=0.05):
    bg = solve_background(gas, r0, r1, n_r)
    coeffs = compute_coeffs(bg)
    if np.any(coeffs.A_b11 <= 0) or np.any(coeffs.e1 <= 0):
        raise RegimeError("strip coefficients lost positivity (needs M_b1^2 < 1 and e1 > 0)")
    nx = int(round(2 * L / hx)) + 1
    x3 = np.linspace(-L, L, nx)
    r = np.asarray(bg.r_grid)
    ell = StripOperator(r, x3, coeffs.A_b11, coeffs.A_b33, coeffs.e1, "neumann", "dirichlet")
    poi = StripOperator(r, x3, 1.0, 1.0, 0.0, "dirichlet", "neumann")
    return StripSetup(bg=bg, coeffs=coeffs, x3=x3, elliptic=ell, poisson=poi)


def antiderivative_from_zero(q, x, refine=16):
    """int_0^x q(s) ds on a sorted grid x, via a refined cubic spline."""
    x = np.asarray(x, dtype=float)
    fine = np.linspace(x[0], x[-1], refine * (x.size - 1) + 1)
    fine = np.union1d(fine, [0.0]) if x[0] < 0 < x[-1] else fine
    anti = CubicSpline(fine, q(fine)).antiderivative()
    return anti(x) - anti(0.0)


@dataclass
class TransportFields:
    U2_hat: np.ndarray
    B_hat: np.ndarray
    A_hat: np.ndarray
    foot: np.ndarray


def characteristic_feet(r, x3, U1bar, U3bar):
    """Foot on r = r1 of the characteristic through every grid node.

    Each node is traced one RK4 step towards r1; the remaining path is
    taken from the foot map of the next row (cubic interpolation in x3).
    """
    r = np.asarray(r)
    x3 = np.asarray(x3)
    if np.min(np.abs(U1bar)) < STAGNATION_FLOOR:
        raise RegimeError("characteristic stagnation: |U1| below floor")
    slope = U3bar / U1bar
    foot = np.empty_like(slope)
    foot[-1] = x3
    if not np.any(slope):
        foot[:] = x3
        return foot
    spl = RectBivariateSpline(r, x3, slope, kx=3, ky=3)
    lo, hi = x3[0], x3[-1]

    def ev(rr, xx):
        return spl.ev(np.full_like(xx, rr), np.clip(xx, lo, hi))

    h = r[1] - r[0]
    for i in range(r.size - 2, -1, -1):
        ri = r[i]
        k1 = ev(ri, x3)
        k2 = ev(ri + 0.5 * h, x3 + 0.5 * h * k1)
        k3 = ev(ri + 0.5 * h, x3 + 0.5 * h * k2)
        k4 = ev(ri + h, x3 + h * k3)
        X = x3 + h * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0
        drift = CubicSpline(x3, foot[i + 1] - x3)(np.clip(X, lo, hi))
        foot[i] = X + drift
    return foot


def transport_characteristics(setup: StripSetup, U1bar, U3bar, data: AxisymData):
    """(U2_hat, B_hat, A_hat) with r U2_hat, B_hat, A_hat constant along characteristics."""
    r = setup.r
    eps = data.epsilon
    if data.hyperbolic_zero or eps == 0:
        z = np.zeros_like(U1bar)
        return TransportFields(z, z.copy(), z.copy(), np.broadcast_to(setup.x3, z.shape).copy())
    foot = characteristic_feet(r, setup.x3, U1bar, U3bar)
    r1 = r[-1]
    return TransportFields(U2_hat=r1 * eps * data.q2(foot) / r[:, None], B_hat=eps * data.B1(foot),
                           A_hat=eps * data.A1(foot), foot=foot)


def axisym_sources(setup: StripSetup, U1bar, U3bar, tr: TransportFields):
    """G1 and G2 for the barred velocity and the transported (U2, B, A)."""
    g = setup.gas.gamma
    bg = setup.bg
    r = setup.r[:, None]
    h, hx = setup.r[1] - setup.r[0], setup.x3[1] - setup.x3[0]
    Ub1, Ub2 = bg.U_b1[:, None], bg.U_b2[:, None]
    dUb1 = np.asarray(bg.derivs()[1])[:, None]
    cb2 = bg.c_sq[:, None]
    u1 = U1bar - Ub1
    u3 = U3bar
    u2 = tr.U2_hat
    U2 = Ub2 + u2
    Bh, Ah = tr.B_hat, tr.A_hat
    B = setup.gas.B0 + Bh
    A = setup.gas.A0 + Ah
    q = B - 0.5 * (U1bar ** 2 + U2 ** 2 + u3 ** 2)
    if np.any(q <= 0):
        raise RegimeError("iterate reaches vacuum")
    c2 = (g - 1.0) * q
    u1r, u13 = dr4(u1, h, axis=0), dr4(u1, hx, axis=1)
    u3r, u33 = dr4(u3, h, axis=0), dr4(u3, hx, axis=1)
    G1 = (-(g - 1.0) * (dUb1 + Ub1 / r) * (Bh - 0.5 * u3 ** 2)
          + ((g - 1.0) * dUb1 * Ub2 + (g - 3.0) / r * Ub1 * Ub2) * u2
          + (0.5 * (g + 1.0) * dUb1 + (g - 1.0) / (2 * r) * Ub1) * u1 ** 2
          + (0.5 * (g - 1.0) * dUb1 + (g - 3.0) / (2 * r) * Ub1) * u2 ** 2
          - (c2 + U2 ** 2 - cb2 - Ub2 ** 2) / r * u1
          - (c2 - U1bar ** 2 - cb2 + Ub1 ** 2) * u1r
          - (c2 - cb2 - u3 ** 2) * u33
          + U1bar * u3 * (u3r + u13))
    if not (np.any(Bh) or np.any(Ah) or np.any(u2)):
        G2 = np.zeros_like(G1)
    else:
        G2 = (-dr4(Bh, hx, axis=1) + U2 * dr4(u2, hx, axis=1)
              + q / (A * g) * dr4(Ah, hx, axis=1)) / U1bar
    return G1, G2


# --------------------------------------------------------------------------
# solver
# --------------------------------------------------------------------------

@dataclass
class AxisymControls:
    tol: float = 1e-9
    max_iter: int = 60
    divergence_window: int = 3


@dataclass
class AxisymResult:
    field: AxisymField
    phi: np.ndarray
    phi1: np.ndarray
    strip: StripProblem
    transport: TransportFields
    bg: BackgroundProfile
    report: dict


def boundary_arrays(setup: StripSetup, data: AxisymData):
    eps = data.epsilon
    x3 = setup.x3
    q1 = eps * data.q1(x3)
    if getattr(data.q3, "is_zero", False):
        Q3 = np.zeros_like(x3)
        l1 = 0.0
    else:
        Q3 = eps * antiderivative_from_zero(data.q3, x3)
        fine = np.linspace(x3[0], x3[-1], 16 * (x3.size - 1) + 1)
        l1 = eps * float(CubicSpline(fine, np.abs(data.q3(fine))).integrate(x3[0], x3[-1]))
    return q1, Q3, l1


def solve_axisym(setup: StripSetup, data: AxisymData, controls=None):
    """Picard iteration: transport -> G1, G2 -> phi1 -> G3 -> phi -> (U1, U3)."""
    controls = controls or AxisymControls()
    gas = setup.gas
    if not gas.U10 < 0 and not data.hyperbolic_zero:
        raise DomainError("axisymmetric solver with transported data needs U10 < 0")
    r = setup.r
    h, hx = r[1] - r[0], setup.x3[1] - setup.x3[0]
    shape = (r.size, setup.x3.size)
    Ub1 = setup.bg.U_b1[:, None]
    c = setup.coeffs
    e1 = c.e1[:, None]
    q1, Q3, l1 = boundary_arrays(setup, data)
    U1b = np.broadcast_to(Ub1, shape).copy()
    U3b = np.zeros(shape)
    tr_prev = None
    incs = []
    up = 0
    for k in range(controls.max_iter):
        tr = transport_characteristics(setup, U1b, U3b, data)
        G1, G2 = axisym_sources(setup, U1b, U3b, tr)
        phi1 = setup.poisson.solve(G2, 0.0, 0.0, 0.0, 0.0) if np.any(G2) else np.zeros(shape)
        p1r, p13 = dr4(phi1, h, axis=0), dr4(phi1, hx, axis=1)
        G3 = G1 - Ub1 ** 2 * dr4(p1r, hx, axis=1) + e1 * p13
        strip = StripProblem(r=r, x3=setup.x3, A_b11=c.A_b11, A_b33=c.A_b33, e1=c.e1, G3=G3,
                             q1=q1, Q3=Q3, q3_l1=l1)
        phi, res = elliptic_strip_solve(strip, setup.elliptic, return_residual=True)
        U1 = Ub1 + dr4(phi, h, axis=0) - p13
        U3 = dr4(phi, hx, axis=1) + p1r
        inc = float(max(np.max(np.abs(U1 - U1b)), np.max(np.abs(U3 - U3b))))
        if tr_prev is not None:
            inc = max(inc, float(np.max(np.abs(tr.U2_hat - tr_prev.U2_hat))),
                      float(np.max(np.abs(tr.B_hat - tr_prev.B_hat))),
                      float(np.max(np.abs(tr.A_hat - tr_prev.A_hat))))
        up = up + 1 if incs and inc >= incs[-1] else 0
        incs.append(inc)
        U1b, U3b, tr_prev = U1, U3, tr
        if inc <= controls.tol:
            break
        if up >= controls.divergence_window:
            raise NonConvergenceError("axisymmetric iteration diverges", incs)
    else:
        raise NonConvergenceError(f"axisymmetric iteration not converged after "
                                  f"{controls.max_iter} steps", incs)
    fld = AxisymField(r=r, x3=setup.x3, U1=U1, U2=setup.bg.U_b2[:, None] + tr.U2_hat, U3=U3,
                      B=gas.B0 + tr.B_hat, A=gas.A0 + tr.A_hat, gas=gas)
    report = {"epsilon": data.epsilon, "L": setup.L, "iterations": len(incs), "increments": incs,
              "max_contraction": max_contraction(incs, controls.tol), "elliptic_residual": res,
              "G1_max": float(np.max(np.abs(G1))), "G2_max": float(np.max(np.abs(G2))),
              "G3_max": float(np.max(np.abs(G3)))}
    return AxisymResult(field=fld, phi=phi, phi1=phi1, strip=strip, transport=tr, bg=setup.bg,
                        report=report)


# --------------------------------------------------------------------------
# diagnostics
# --------------------------------------------------------------------------

def barrier_constants(prob: StripProblem):
    """m1 < 0, C6 and mu for the maximum-principle barriers."""
    e1 = np.asarray(prob.e1)
    m1 = -1.1 * max(1.0 / float(np.min(e1)), 1.0)
    r = np.asarray(prob.r)
    C6 = max(abs(m1) * (r[-1] - r[0]), 1.0)
    mu = 1.1 * float(np.max(2.0 * np.asarray(prob.A_b33) / e1))
    return m1, C6, mu


def barrier_check(prob: StripProblem, phi, etas=(1.0, 2.0, 4.0), tol=1e-12):
    """Maximum-principle bound and decay comparison on the tail windows."""
    m1, C6, mu = barrier_constants(prob)
    r = np.asarray(prob.r)[:, None]
    x3 = np.asarray(prob.x3)
    e1 = np.asarray(prob.e1)[:, None]
    a33 = np.asarray(prob.A_b33)[:, None]
    G3 = prob.G3
    S = float(np.max(np.abs(G3)) + np.max(np.abs(prob.q1)))
    sign_ok = bool(np.all(G3 - m1 * e1 * S >= 0) and np.all(prob.q1 - m1 * S >= 0)) if S > 0 else True
    v = m1 * S * r
    scale = max(float(np.max(np.abs(phi))), 1e-300)
    # phi - v has no interior maximum: compare with its Dirichlet boundary max
    w = phi - v
    bd = np.concatenate([w[-1], w[:, 0], w[:, -1]])
    upper_ok = bool(np.max(w) <= np.max(bd) + tol * scale)
    w2 = -phi - v
    bd2 = np.concatenate([w2[-1], w2[:, 0], w2[:, -1]])
    lower_ok = bool(np.max(w2) <= np.max(bd2) + tol * scale)
    bound = C6 * (S + prob.q3_l1)
    sup = float(np.max(np.abs(phi)))
    # decay comparison |phi - Q3| <= b on the outer halves
    L = x3[-1]
    decay = []
    for side in (1, -1):
        mask = side * x3 >= 0.5 * L
        xs = x3[mask]
        xc = side * 0.75 * L
        m = 0.25 * L
        ph = phi[:, mask] - prob.Q3[mask][None, :]
        g3w = float(np.max(np.abs(G3[:, mask])))
        edge = float(np.max(np.abs(ph[:, [0, -1]])))
        den = float(np.min(mu * e1 - 2 * a33))
        eta_star = max(edge / m ** 2, g3w / den if den > 0 else np.inf)
        ok = True
        for fac in etas:
            eta = fac * eta_star
            b = eta * (xs[None, :] - xc) ** 2 - mu * eta * (r - r[-1])
            ok = ok and bool(np.all(np.abs(ph) <= b + tol * scale))
        decay.append({"side": side, "eta_star": eta_star, "passed": ok})
    return {"m1": m1, "C6": C6, "mu": mu, "S": S, "sign_conditions": sign_ok,
            "max_principle_upper": upper_ok, "max_principle_lower": lower_ok,
            "sup_phi": sup, "bound": bound, "bound_ok": bool(sup <= bound),
            "decay": decay,
            "passed": bool(sign_ok and upper_ok and lower_ok and sup <= bound
                           and all(d["passed"] for d in decay))}


def tail_norm(field: AxisymField, bg: BackgroundProfile, lo, hi):
    """max |field - background| over lo <= |x3| <= hi."""
    m = (np.abs(field.x3) >= lo) & (np.abs(field.x3) <= hi)
    if not m.any():
        return 0.0
    parts = [field.U1[:, m] - bg.U_b1[:, None], field.U2[:, m] - bg.U_b2[:, None],
             field.U3[:, m], field.B[:, m] - field.gas.B0, field.A[:, m] - field.gas.A0]
    return float(max(np.max(np.abs(p)) for p in parts))


def far_field_decay_check(res_L: AxisymResult, res_2L: AxisymResult):
    """Tail of each run on its outer half; the doubled domain must decay further."""
    fL, f2 = res_L.field, res_2L.field
    tL = tail_norm(fL, res_L.bg, 0.5 * fL.L, fL.L)
    t2 = tail_norm(f2, res_2L.bg, 0.5 * f2.L, f2.L)
    return {"L": res_L.field.L, "tail_L": tL, "tail_2L": t2,
            "passed": bool(t2 < tL or (t2 == 0.0 and tL == 0.0))}


def characteristic_invariance(result: AxisymResult, data: AxisymData, n_lines=12, rtol=1e-12):
    """Independent re-trace of characteristics through the final field.

    From a sample of nodes, dx3/dr = U3/U1 is integrated to r1 with an
    adaptive Runge-Kutta method; r U2_hat, B_hat, A_hat at the node are
    compared with the boundary data at the foot.
    """
    f = result.field
    r, x3 = np.asarray(f.r), np.asarray(f.x3)
    spl = RectBivariateSpline(r, x3, f.U3 / f.U1, kx=3, ky=3)
    eps = data.epsilon
    r1 = r[-1]
    rows = np.linspace(0, r.size - 2, 5).astype(int)
    cols = np.linspace(0, x3.size - 1, n_lines + 2).astype(int)[1:-1]
    # concentrate on the data support where the fields are nonzero
    inner = np.abs(x3) <= 4.0
    if inner.any():
        sub = np.nonzero(inner)[0]
        cols = np.union1d(cols, sub[np.linspace(0, sub.size - 1, n_lines).astype(int)])
    err = {"rU2": 0.0, "B": 0.0, "A": 0.0}
    U2h = f.U2 - result.bg.U_b2[:, None]
    for i in rows:
        for j in cols:
            sol = solve_ivp(lambda rr, x: spl.ev(rr, np.clip(x, x3[0], x3[-1])), (r[i], r1), [x3[j]],
                            method="DOP853", rtol=rtol, atol=1e-14)
            ft = sol.y[0, -1]
            err["rU2"] = max(err["rU2"], abs(r[i] * U2h[i, j] - r1 * eps * float(data.q2(ft))))
            err["B"] = max(err["B"], abs(f.B[i, j] - f.gas.B0 - eps * float(data.B1(ft))))
            err["A"] = max(err["A"], abs(f.A[i, j] - f.gas.A0 - eps * float(data.A1(ft))))
    return err
