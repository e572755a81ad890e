"""Independent oracles shared by the unit and acceptance tests.

Each helper computes a reference value without going through the code path
it checks: closed-form manufactured solutions, per-mode scalar BVPs solved
with dense linear algebra, and algebraic identities.
"""
import numpy as np

from transonic.background import asset_background
from transonic.coeffs import build_multipliers, compute_coeffs
from transonic.ops import theta_grid
from transonic.spectral import background_problem


def manufactured(n, N=8, l0=1.0, m=2):
    """phi = e^y1 (y1 - r1)^2 cos(m y2) on the asset background coefficients.

    Returns (problem, exact values on the y2 grid, coeffs).  The source and
    the Robin datum are read off the exact solution; g3 = phi_2(r1) = 0.
    """
    c = compute_coeffs(asset_background(n))
    nq = 4 * N + 4
    y1 = c.r_grid[:, None]
    y2 = theta_grid(nq)[None, :]
    r0, r1 = c.r_grid[0], c.r_grid[-1]
    e = np.exp(y1)
    R = e * (y1 - r1) ** 2
    R1 = e * ((y1 - r1) ** 2 + 2 * (y1 - r1))
    R2 = e * ((y1 - r1) ** 2 + 4 * (y1 - r1) + 2)
    C, S = np.cos(m * y2), np.sin(m * y2)
    phi, p1, p2 = R * C, R1 * C, -m * R * S
    p11, p22 = R2 * C, -m * m * R * C
    prob = background_problem(c, l0, nq)
    prob.F_hat = p11 + prob.k22 * p22 + prob.k1 * p1 + prob.k2 * p2
    prob.g2 = r0 * p1[0] + prob.beta * p2[0]
    return prob, phi, c


def manufactured_errors(sizes=(65, 129, 257), N=8, l0=1.0):
    """Max-norm errors and energy imbalances of the manufactured case per grid."""
    from transonic.spectral import energy_diagnostic, solve_linearized
    errs, imbs = [], []
    for n in sizes:
        prob, exact, c = manufactured(n, N, l0)
        fld = solve_linearized(prob, N)
        errs.append(float(np.max(np.abs(fld.on_grid(prob.n_y2) - exact))))
        rep = energy_diagnostic(prob, fld, build_multipliers(c, l0))
        imbs.append(rep.imbalance)
    return np.array(errs), np.array(imbs)


def observed_orders(errs):
    errs = np.asarray(errs, dtype=float)
    return np.log2(errs[:-1] / errs[1:])


def mode_pair_fd(y1, k1, k22, beta, F_sin, F_cos, g_sin, g_cos, m):
    """Dense FD solve of one (sin, cos) pair with theta-independent coefficients.

    Equations  A'' + k1 A' - m^2 k22 A = F  for both members; the Robin row at
    r0 couples the pair through beta d/dy2:  r0 A_s' - beta m A_c = g_s,
    r0 A_c' + beta m A_s = g_c.  A(r1) = 0.  Same stencils as the solver
    (centered interior, one-sided second order at r0), written out
    independently with numpy.
    """
    n = y1.size
    h = y1[1] - y1[0]
    r0 = y1[0]
    nu = n - 1
    K = np.zeros((2 * nu, 2 * nu))
    b = np.zeros(2 * nu)
    for comp in (0, 1):
        o = comp * nu
        K[o, o + 0] += -1.5 * r0 / h
        K[o, o + 1] += 2.0 * r0 / h
        K[o, o + 2] += -0.5 * r0 / h
        other = (1 - comp) * nu
        # d/dy2 sin(my) = m cos(my): coefficient of sin picks up -m*A_cos
        K[o, other] += (-beta * m) if comp == 0 else (beta * m)
        b[o] = g_sin if comp == 0 else g_cos
        F = F_sin if comp == 0 else F_cos
        for i in range(1, nu):
            K[o + i, o + i - 1] += 1 / h ** 2 - k1[i] / (2 * h)
            K[o + i, o + i] += -2 / h ** 2 - m * m * k22[i]
            if i + 1 < nu:
                K[o + i, o + i + 1] += 1 / h ** 2 + k1[i] / (2 * h)
            b[o + i] = F[i]
    x = np.linalg.solve(K, b)
    A_s = np.append(x[:nu], 0.0)
    A_c = np.append(x[nu:], 0.0)
    return A_s, A_c


def mean_mode_fd(y1, k1, F0, g0):
    """Scalar FD solve of the mean mode: A'' + k1 A' = F0, r0 A'(r0) = g0, A(r1) = 0."""
    n = y1.size
    h = y1[1] - y1[0]
    r0 = y1[0]
    nu = n - 1
    K = np.zeros((nu, nu))
    b = np.zeros(nu)
    K[0, :3] = [-1.5 * r0 / h, 2.0 * r0 / h, -0.5 * r0 / h]
    b[0] = g0
    for i in range(1, nu):
        K[i, i - 1] = 1 / h ** 2 - k1[i] / (2 * h)
        K[i, i] = -2 / h ** 2
        if i + 1 < nu:
            K[i, i + 1] = 1 / h ** 2 + k1[i] / (2 * h)
        b[i] = F0[i]
    return np.append(np.linalg.solve(K, b), 0.0)
