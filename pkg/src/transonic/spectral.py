"""Fourier-Galerkin solver for the linearized mixed-type equation

    phi_11 + 2 k12 phi_12 + k22 phi_22 + k1 phi_1 + k2 phi_2 = F_hat

on [r0, r1] x T in characteristic coordinates (y1, y2) = (r, theta + f(r)),
with

    r0 phi_1 + beta phi_2 = g2     at y1 = r0,   beta = r0 f'(r0) - l0
    phi_2 = g3,  phi(r1, y2*) = 0   at y1 = r1.

k22 changes sign at the sonic circle, so the equation is elliptic outside
and hyperbolic inside.  Projecting onto the orthonormal basis

    h_1 = 1/sqrt(2 pi),  h_2m = sin(m y)/sqrt(pi),  h_2m+1 = cos(m y)/sqrt(pi)

gives a second-order system of 2N+1 coupled ODEs in y1, discretized with
centered differences and solved as one banded linear system.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np
from scipy import fft, sparse
from scipy.interpolate import CubicSpline
from scipy.linalg import lapack

from .coeffs import CoeffProfile, MultiplierSet
from .errors import ParameterError, SolverError
from .io import write_csv
from .ops import dr2, dtheta, integrate_annulus, integrate_theta, theta_grid


# --------------------------------------------------------------------------
# basis
# --------------------------------------------------------------------------

def basis_size(N):
    return 2 * N + 1


def mode_of(j):
    """Harmonic number m of the 0-based basis index j."""
    return (j + 1) // 2


def basis_matrices(N, y2):
    """Values and first/second derivatives of h_j at the points y2.

    Returns three arrays of shape (len(y2), 2N+1).  Column 0 is the mean
    mode; columns 2m-1 / 2m are sin(m y) / cos(m y) (0-based indexing of the
    1-based h_2m / h_2m+1).
    """
    y2 = np.asarray(y2, dtype=float)
    M = basis_size(N)
    H = np.empty((y2.size, M))
    Hd = np.empty_like(H)
    Hdd = np.empty_like(H)
    H[:, 0] = 1.0 / np.sqrt(2.0 * np.pi)
    Hd[:, 0] = 0.0
    Hdd[:, 0] = 0.0
    sp = 1.0 / np.sqrt(np.pi)
    for m in range(1, N + 1):
        s, c = np.sin(m * y2), np.cos(m * y2)
        H[:, 2 * m - 1], H[:, 2 * m] = sp * s, sp * c
        Hd[:, 2 * m - 1], Hd[:, 2 * m] = sp * m * c, -sp * m * s
        Hdd[:, 2 * m - 1], Hdd[:, 2 * m] = -sp * m * m * s, -sp * m * m * c
    return H, Hd, Hdd


def derivative_matrix(N):
    """c[m, j] = int h_j' h_m, so that (c @ A) are the coefficients of d/dy2."""
    M = basis_size(N)
    c = np.zeros((M, M))
    for m in range(1, N + 1):
        s, co = 2 * m - 1, 2 * m
        # (sin)' = m cos and (cos)' = -m sin
        c[co, s] = m
        c[s, co] = -m
    return c


def project(values, N):
    """Galerkin coefficients of periodic samples (trapezoid rule)."""
    values = np.asarray(values, dtype=float)
    nq = values.shape[-1]
    H, _, _ = basis_matrices(N, theta_grid(nq))
    return values @ H * (2.0 * np.pi / nq)


# --------------------------------------------------------------------------
# data types
# --------------------------------------------------------------------------

@dataclass
class LinearizedProblem:
    """Coefficient fields and data of the linearized problem.

    All 2-D arrays have shape (n_y1, n_y2) on the uniform y2 grid.  ``y2_anchor``
    is the y2 coordinate of the normalization point (r1, theta=0), i.e. f(r1).
    """

    y1: np.ndarray
    k12: np.ndarray
    k22: np.ndarray
    k1: np.ndarray
    k2: np.ndarray
    F_hat: np.ndarray
    g2: np.ndarray
    g3: np.ndarray
    l0: float
    beta: float
    y2_anchor: float = 0.0
    coeffs: CoeffProfile | None = None

    @property
    def n_y2(self):
        return self.k22.shape[1]

    @property
    def y2(self):
        return theta_grid(self.n_y2)

    def deviation_report(self):
        """Size of the coefficients relative to the background ones."""
        if self.coeffs is None:
            return {}
        c = self.coeffs
        return {
            "k12": float(np.max(np.abs(self.k12))),
            "k22_minus_kb22": float(np.max(np.abs(self.k22 - c.k_b22[:, None]))),
            "k1_minus_kb1": float(np.max(np.abs(self.k1 - c.k_b1[:, None]))),
            "k2": float(np.max(np.abs(self.k2))),
        }


def background_problem(coeffs: CoeffProfile, l0, n_y2, F_hat=None, g2=None, g3=None):
    """Linearized problem with the frozen background coefficients."""
    n = len(coeffs.r_grid)
    ones = np.ones((1, n_y2))
    z2 = np.zeros((n, n_y2))
    r0 = coeffs.r_grid[0]
    return LinearizedProblem(
        y1=np.asarray(coeffs.r_grid), k12=z2.copy(), k22=coeffs.k_b22[:, None] * ones,
        k1=coeffs.k_b1[:, None] * ones, k2=coeffs.k_b2[:, None] * ones,
        F_hat=z2.copy() if F_hat is None else np.asarray(F_hat, dtype=float),
        g2=np.zeros(n_y2) if g2 is None else np.asarray(g2, dtype=float),
        g3=np.zeros(n_y2) if g3 is None else np.asarray(g3, dtype=float),
        l0=float(l0), beta=float(r0 * coeffs.f_prime[0] - l0),
        y2_anchor=float(coeffs.f[-1]), coeffs=coeffs)


@dataclass
class SpectralField:
    """Truncated Fourier representation phi(y1, y2) = sum_j A_j(y1) h_j(y2)."""

    N: int
    y1: np.ndarray
    coef: np.ndarray  # shape (n_y1, 2N+1)

    def evaluate(self, y2):
        H, _, _ = basis_matrices(self.N, y2)
        return self.coef @ H.T

    def on_grid(self, n_y2):
        return self.evaluate(theta_grid(n_y2))

    def d_y2(self, n_y2):
        _, Hd, _ = basis_matrices(self.N, theta_grid(n_y2))
        return self.coef @ Hd.T

    def d_y1(self, n_y2):
        h = self.y1[1] - self.y1[0]
        return dr2(self.on_grid(n_y2), h, axis=0)

    def to_polar(self, f, n_theta):
        """Values at (r, theta) using y2 = theta + f(r) (exact rotation of pairs)."""
        th = theta_grid(n_theta)
        out = np.empty((len(self.y1), n_theta))
        for i in range(len(self.y1)):
            H, _, _ = basis_matrices(self.N, th + f[i])
            out[i] = H @ self.coef[i]
        return out

    def spectrum(self):
        """max over y1 of |A_j| for every basis index j."""
        return np.max(np.abs(self.coef), axis=0)

    def spectrum_to_csv(self, path):
        s = self.spectrum()
        write_csv(path, ["j", "mode", "max_abs_A"],
                  [np.arange(1, s.size + 1), [mode_of(j) for j in range(s.size)], s])

    def to_csv(self, path, n_y2=None):
        n_y2 = n_y2 or 4 * self.N + 4
        y2 = theta_grid(n_y2)
        Y1, Y2 = np.meshgrid(self.y1, y2, indexing="ij")
        write_csv(path, ["y1", "y2", "phi", "phi_y1", "phi_y2"],
                  [Y1, Y2, self.on_grid(n_y2), self.d_y1(n_y2), self.d_y2(n_y2)])


@dataclass
class GalerkinSystem:
    """Per-node Galerkin matrices of A'' + a A' + b A = F.

    ``a[i, m, j]`` is a_jm at node i (so ``a[i] @ A`` is the sum over j), the
    same for ``b``; ``c[m, j]`` = c_jm.  ``shift`` holds the coefficients of
    the y2-antiderivative of g3 that was removed from the unknown.
    """

    N: int
    y1: np.ndarray
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    rhs: np.ndarray
    robin_rhs: np.ndarray
    beta: float
    shift: np.ndarray


# --------------------------------------------------------------------------
# assembly
# --------------------------------------------------------------------------

def _g3_antiderivative(g3, anchor):
    """Spectral antiderivative G of g3 with G(anchor) = 0.

    Returns (values on the grid, callable evaluating G anywhere).
    """
    g3 = np.asarray(g3, dtype=float)
    n = g3.size
    gh = fft.rfft(g3)
    k = fft.rfftfreq(n, 1.0 / n)
    Gh = np.zeros_like(gh)
    Gh[1:] = gh[1:] / (1j * k[1:])
    if n % 2 == 0:
        Gh[-1] = 0.0

    def G(y):
        y = np.asarray(y, dtype=float)
        ph = np.exp(1j * np.multiply.outer(y, k[1:]))
        w = np.full(k.size - 1, 2.0)
        if n % 2 == 0:
            w[-1] = 0.0
        return np.real(ph @ (w * Gh[1:])) / n

    vals = fft.irfft(Gh, n=n)
    return vals - G(anchor), lambda y: G(y) - G(anchor)


def assemble_galerkin(prob: LinearizedProblem, N, check_mean=True):
    """Build the Galerkin system for truncation N.

    The y2 grid must carry at least 4N+4 points.  The g3 datum is removed
    by subtracting its antiderivative G (normalized at the anchor), which
    turns the outer condition into phi(r1, .) = 0.
    """
    if N < 1:
        raise ParameterError("N must be at least 1")
    nq = prob.n_y2
    if nq < 4 * N + 4:
        raise ParameterError(f"y2 grid of {nq} points aliases N={N}; need >= {4 * N + 4}")
    g3 = np.asarray(prob.g3, dtype=float)
    if check_mean and abs(g3.mean()) > 1e-10 * max(1.0, np.max(np.abs(g3))):
        raise ParameterError(f"g3 must have zero mean (mean = {g3.mean():.3e})")
    y2 = theta_grid(nq)
    w = 2.0 * np.pi / nq
    H, Hd, Hdd = basis_matrices(N, y2)

    G, _ = _g3_antiderivative(g3, prob.y2_anchor)
    dg3 = dtheta(g3)
    src = prob.F_hat - prob.k22 * dg3[None, :] - prob.k2 * g3[None, :]

    wH = H * w
    # a[i, m, j] = sum_q (2 k12 h_j' + k1 h_j)(q) h_m(q) w
    a = np.einsum("qm,iq,qj->imj", wH, 2.0 * prob.k12, Hd, optimize=True)
    a += np.einsum("qm,iq,qj->imj", wH, prob.k1, H, optimize=True)
    b = np.einsum("qm,iq,qj->imj", wH, prob.k22, Hdd, optimize=True)
    b += np.einsum("qm,iq,qj->imj", wH, prob.k2, Hd, optimize=True)
    rhs = src @ wH
    robin = (np.asarray(prob.g2) - prob.beta * g3) @ wH
    shift = G @ wH
    return GalerkinSystem(N=N, y1=np.asarray(prob.y1, dtype=float), a=a, b=b,
                          c=derivative_matrix(N), rhs=rhs, robin_rhs=robin,
                          beta=float(prob.beta), shift=shift)


# --------------------------------------------------------------------------
# banded solve
# --------------------------------------------------------------------------

def _system_coo(system: GalerkinSystem):
    """Triplets of the discrete BVP (unknowns at nodes 0..n-2, node-major)."""
    y1 = system.y1
    n = y1.size
    if n < 5:
        raise ParameterError("need at least 5 radial nodes")
    h = y1[1] - y1[0]
    r0 = y1[0]
    M = system.c.shape[0]
    nu = n - 1
    eye = np.eye(M)
    rows, cols, vals = [], [], []

    def put(bi, bj, block):
        ii, jj = np.nonzero(block)
        rows.append(bi * M + ii)
        cols.append(bj * M + jj)
        vals.append(block[ii, jj])

    put(0, 0, -1.5 * r0 / h * eye + system.beta * system.c)
    put(0, 1, 2.0 * r0 / h * eye)
    put(0, 2, -0.5 * r0 / h * eye)
    # interior rows, vectorized over nodes
    idx = np.arange(1, nu)
    P = system.a[idx] / (2.0 * h)
    lower = eye[None] / h ** 2 - P
    diag = -2.0 * eye[None] / h ** 2 + system.b[idx]
    upper = eye[None] / h ** 2 + P
    mi, ji = np.meshgrid(np.arange(M), np.arange(M), indexing="ij")
    for off, blocks in ((-1, lower), (0, diag), (1, upper)):
        keep = idx + off < nu
        nodes = idx[keep]
        blk = blocks[keep]
        rr = (nodes[:, None, None] * M + mi[None]).ravel()
        cc = ((nodes + off)[:, None, None] * M + ji[None]).ravel()
        vv = blk.ravel()
        nz = vv != 0
        rows.append(rr[nz])
        cols.append(cc[nz])
        vals.append(vv[nz])
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    vals = np.concatenate(vals)
    b = np.concatenate([system.robin_rhs, system.rhs[1:nu].ravel()])
    return rows, cols, vals, b, nu * M, M


@dataclass
class SolveInfo:
    residual: float
    min_pivot: float
    max_pivot: float
    unknowns: int


def solve_bvp(system: GalerkinSystem, return_info=False):
    """Solve the discretized Galerkin BVP.

    Centered second-order differences in y1, one-sided second-order Robin
    row at r0 and A(r1) = 0.  The banded matrix is factored once with LAPACK
    (partial pivoting), followed by one step of iterative refinement.
    """
    rows, cols, vals, b, n_unk, M = _system_coo(system)
    kl = int(np.max(rows - cols))
    ku = int(np.max(cols - rows))
    ab = np.zeros((2 * kl + ku + 1, n_unk))
    np.add.at(ab, (kl + ku + rows - cols, cols), vals)
    lu, piv, info = lapack.dgbtrf(ab, kl, ku, overwrite_ab=True)
    udiag = np.abs(lu[kl + ku])
    min_piv, max_piv = float(udiag.min()), float(udiag.max())
    if info > 0 or min_piv <= 1e-14 * max_piv:
        raise SolverError(f"singular Galerkin system (smallest pivot {min_piv:.3e})",
                          min_pivot=min_piv)
    A = sparse.csr_matrix((vals, (rows, cols)), shape=(n_unk, n_unk))
    x, info = lapack.dgbtrs(lu, kl, ku, b, piv)
    res = b - A @ x
    dx, _ = lapack.dgbtrs(lu, kl, ku, res, piv)
    x = x + dx
    bnorm = np.linalg.norm(b)
    rel = float(np.linalg.norm(b - A @ x) / bnorm) if bnorm > 0 else float(np.linalg.norm(A @ x))
    if rel > 1e-10:
        raise SolverError(f"Galerkin residual {rel:.3e} above 1e-10", min_pivot=min_piv)
    n = system.y1.size
    coef = np.zeros((n, M))
    coef[: n - 1] = x.reshape(n - 1, M)
    coef += system.shift[None, :]
    field = SpectralField(N=system.N, y1=system.y1, coef=coef)
    if return_info:
        return field, SolveInfo(rel, min_piv, max_piv, n_unk)
    return field


def solve_linearized(prob: LinearizedProblem, N, return_info=False):
    return solve_bvp(assemble_galerkin(prob, N), return_info=return_info)


# --------------------------------------------------------------------------
# energy identity
# --------------------------------------------------------------------------

@dataclass
class EnergyReport:
    lhs: float
    boundary: float
    volume: float
    imbalance: float
    rel_imbalance: float
    volume_lower_bound: float
    volume_ok: bool
    grad_norm: float
    grad_bound: float
    data_norm: float
    ratio: float
    sigma_star: float
    min_E11: float
    min_E22: float
    max_E12: float

    def as_dict(self):
        return dataclasses.asdict(self)


def _interp_to(r_src, vals, r_dst):
    if len(r_src) == len(r_dst) and np.allclose(r_src, r_dst, rtol=0, atol=1e-14):
        return np.asarray(vals)
    return CubicSpline(r_src, vals)(r_dst)


def energy_diagnostic(prob: LinearizedProblem, field: SpectralField, mult: MultiplierSet):
    """Both sides of the multiplier identity for the computed field.

    Testing the equation with l1 phi_1 + l2 phi_2 and integrating by parts
    gives  int F (l1 phi_1 + l2 phi_2) = boundary + volume  where the volume
    form has the coefficients E11, E12, E22.  All integrals are discrete
    (trapezoid in y1, rectangle rule in y2), derivatives second order in y1
    and spectral in y2, so the imbalance is O(h^2).
    """
    y1 = np.asarray(prob.y1)
    nq = prob.n_y2
    h = y1[1] - y1[0]
    phi = field.on_grid(nq)
    p1 = dr2(phi, h, axis=0)
    p2 = field.d_y2(nq)

    l1 = _interp_to(mult.r_grid, mult.l1, y1)[:, None]
    l2 = _interp_to(mult.r_grid, mult.l2, y1)[:, None]
    dl1 = _interp_to(mult.r_grid, mult.l1_prime, y1)[:, None]
    dl2 = _interp_to(mult.r_grid, mult.l2_prime, y1)[:, None]
    k12, k22, k1, k2 = prob.k12, prob.k22, prob.k1, prob.k2

    E11 = l1 * k1 - 0.5 * dl1 - l1 * dtheta(k12)
    E12 = k1 * l2 - dl2 + l1 * k2 - l1 * dtheta(k22)
    E22 = (0.5 * dr2(l1 * k22, h, axis=0) - 0.5 * l2 * dtheta(k22)
           - dr2(l2 * k12, h, axis=0) + l2 * k2)

    lhs = integrate_annulus(prob.F_hat * (l1 * p1 + l2 * p2), y1)
    vol = integrate_annulus(E11 * p1 ** 2 + E12 * p1 * p2 + E22 * p2 ** 2, y1)
    bd = integrate_theta(0.5 * l1 * p1 ** 2 + l2 * p1 * p2 + k12 * l2 * p2 ** 2
                         - 0.5 * k22 * l1 * p2 ** 2)
    boundary = float(bd[-1] - bd[0])
    imb = abs(lhs - boundary - vol)
    scale = abs(lhs) + abs(boundary) + abs(vol)
    rel = imb / scale if scale > 0 else 0.0

    grad_sq = integrate_annulus(p1 ** 2 + p2 ** 2, y1)
    cross = integrate_annulus(np.abs(E12 * p1 * p2), y1)
    vol_lb = mult.sigma_star * grad_sq - cross

    # a posteriori gradient bound from the identity:
    #   a |grad|^2 <= Lmax |F| |grad| + c0 |g2|^2 + c1 |g3|^2
    # coercivity: smallest eigenvalue of [[E11, E12/2], [E12/2, E22]] over the grid
    Eb11, Eb22 = np.broadcast_arrays(E11, E22)
    a_coef = float(np.min(0.5 * (Eb11 + Eb22)
                          - np.sqrt(0.25 * (Eb11 - Eb22) ** 2 + 0.25 * E12 ** 2)))
    Lmax = float(np.max(np.sqrt(l1 ** 2 + l2 ** 2)))
    Fn = np.sqrt(integrate_annulus(prob.F_hat ** 2, y1))
    g2n = np.sqrt(integrate_theta(np.asarray(prob.g2) ** 2))
    g3n = np.sqrt(integrate_theta(np.asarray(prob.g3) ** 2))
    r0 = y1[0]
    c0 = 0.5 * float(l1[0, 0]) / r0 ** 2
    q1 = k22[-1] * l1[-1, 0] + l2[-1, 0] ** 2 / l1[-1, 0] - 2 * k12[-1] * l2[-1, 0]
    c1 = 0.5 * float(np.max(np.abs(q1)))
    if a_coef > 0:
        bb, cc = Lmax * Fn, c0 * g2n ** 2 + c1 * g3n ** 2
        grad_bound = float((bb + np.sqrt(bb ** 2 + 4 * a_coef * cc)) / (2 * a_coef))
    else:
        grad_bound = float("inf")
    data = float(Fn + g2n + g3n)
    grad = float(np.sqrt(grad_sq))
    return EnergyReport(lhs=float(lhs), boundary=boundary, volume=float(vol), imbalance=float(imb),
                        rel_imbalance=float(rel), volume_lower_bound=float(vol_lb),
                        volume_ok=bool(vol >= vol_lb - 1e-12 * max(1.0, abs(vol))),
                        grad_norm=grad, grad_bound=grad_bound, data_norm=data,
                        ratio=grad / data if data > 0 else 0.0, sigma_star=mult.sigma_star,
                        min_E11=float(E11.min()), min_E22=float(E22.min()),
                        max_E12=float(np.max(np.abs(E12))))
