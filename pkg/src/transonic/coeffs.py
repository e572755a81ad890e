"""Background coefficients of the linearized potential operator and the
multiplier pair (l1, l2) used for the energy estimate.

Notation (c, U, M all background values, ' = d/dr):

    A11 = c^2 - U1^2,  A12 = -U1 U2 / r,  A33 = c^2
    e1  = (c^2 + U2^2)/r + (g+1)(1+M2^2) U1^2 / (r(1-M1^2)) - (g-1) U1^2 / r
    e2  = (2(1-M1^2) + (g-1)|M|^2) / (1-M1^2) * U1 U2 / r^2
    f'  = M1 M2 / ((1-M1^2) r),  f(r0) = 0
    k1  = e1 / A11,  k2 = f'' + (e1 f' + e2) / A11  (identically zero)
    k22 = (1-|M|^2) / (r^2 (1-M1^2)^2),  k33 = 1/(1-M1^2)
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .background import BackgroundProfile
from .errors import AdmissibilityError, ParameterError, RegimeError
from .io import write_csv

# 3-point Gauss-Legendre on [0, 1]
_GL_X = 0.5 + 0.5 * np.array([-np.sqrt(0.6), 0.0, np.sqrt(0.6)])
_GL_W = np.array([5.0, 8.0, 5.0]) / 18.0

EXP_LIMIT = 700.0
# relative residual below which an identity counts as exact
ROUNDOFF = 1e-12


def _pointwise(r, rho, u1, u2, drho, du1, du2, gamma, A0):
    """All coefficients and the derivatives needed for k2 and k22'."""
    g = gamma
    c2 = A0 * g * rho ** (g - 1.0)
    dc2 = (g - 1.0) * c2 * drho / rho
    m1 = u1 * u1 / c2
    m2 = u2 * u2 / c2
    m = m1 + m2
    m12 = u1 * u2 / c2
    dm1 = 2.0 * u1 * du1 / c2 - u1 * u1 * dc2 / c2 ** 2
    dm2 = 2.0 * u2 * du2 / c2 - u2 * u2 * dc2 / c2 ** 2
    dm = dm1 + dm2
    dm12 = (du1 * u2 + u1 * du2) / c2 - u1 * u2 * dc2 / c2 ** 2
    om = 1.0 - m1

    A11 = c2 - u1 ** 2
    A12 = -u1 * u2 / r
    e1 = (c2 + u2 ** 2) / r + (g + 1.0) * (1.0 + m2) * u1 ** 2 / (r * om) - (g - 1.0) * u1 ** 2 / r
    e2 = (2.0 * om + (g - 1.0) * m) / om * u1 * u2 / r ** 2
    fp = m12 / (om * r)
    fpp = dm12 / (om * r) + m12 * (dm1 * r - om) / (om * r) ** 2
    k22 = (1.0 - m) / (r ** 2 * om ** 2)
    dk22 = -dm / (r ** 2 * om ** 2) - (1.0 - m) * (2.0 * r * om ** 2 - 2.0 * r ** 2 * om * dm1) / (r ** 2 * om ** 2) ** 2
    k33 = 1.0 / om
    dk33 = dm1 / om ** 2
    k1 = e1 / A11
    k2 = fpp + (e1 * fp + e2) / A11
    return dict(c2=c2, M1_sq=m1, M2_sq=m2, M_sq=m, A_b11=A11, A_b12=A12, A_b33=c2,
                e1=e1, e2=e2, e2_tilde=r * e2 - u1 * u2 / r, f_prime=fp, f_second=fpp,
                k_b1=k1, k_b2=k2, k_b22=k22, k_b22_prime=dk22, k_b33=k33, k_b33_prime=dk33)


def background_coefficients(bg: BackgroundProfile, r):
    """Evaluate every background coefficient at arbitrary radii."""
    r = np.asarray(r, dtype=float)
    rho, u1, u2 = bg.state(r)
    drho, du1, du2 = bg.derivs(r)
    return _pointwise(r, rho, u1, u2, drho, du1, du2, bg.gas.gamma, bg.gas.A0)


def cumulative_gauss(func, r):
    """Cumulative integral of ``func`` from r[0] on the nodes ``r``.

    Composite 3-point Gauss-Legendre on each grid interval (order 6).
    ``func`` must accept an array of radii.
    """
    r = np.asarray(r, dtype=float)
    h = np.diff(r)
    x = r[:-1, None] + h[:, None] * _GL_X[None, :]
    vals = np.asarray(func(x))
    panel = h * (vals @ _GL_W)
    return np.concatenate([[0.0], np.cumsum(panel)])


@dataclass(frozen=True)
class CoeffProfile:
    """Background coefficients sampled on the background radial grid."""

    background: BackgroundProfile
    r_grid: np.ndarray
    e1: np.ndarray
    e2: np.ndarray
    e2_tilde: np.ndarray
    f: np.ndarray
    f_prime: np.ndarray
    f_second: np.ndarray
    A_b11: np.ndarray
    A_b12: np.ndarray
    A_b33: np.ndarray
    k_b1: np.ndarray
    k_b2: np.ndarray
    k_b22: np.ndarray
    k_b22_prime: np.ndarray
    k_b33: np.ndarray
    k_b33_prime: np.ndarray
    K: np.ndarray  # int_{r0}^{r} k_b1

    def f_at(self, r):
        """f at arbitrary radii (Gauss quadrature from r0)."""
        r = np.atleast_1d(np.asarray(r, dtype=float))
        r0 = self.r_grid[0]
        out = np.empty_like(r)
        for i, ri in enumerate(r):
            # integrate from the closest node below to keep the panel short
            j = int(np.clip(np.searchsorted(self.r_grid, ri) - 1, 0, len(self.r_grid) - 1))
            a = self.r_grid[j] if self.r_grid[j] <= ri else r0
            base = self.f[j] if self.r_grid[j] <= ri else 0.0
            x = a + (ri - a) * _GL_X
            out[i] = base + (ri - a) * (background_coefficients(self.background, x)["f_prime"] @ _GL_W)
        return out

    def to_csv(self, path):
        names = ["e1", "e2", "e2_tilde", "f", "f_prime", "A_b11", "A_b12", "A_b33",
                 "k_b1", "k_b2", "k_b22", "k_b33"]
        write_csv(path, ["r"] + names, [self.r_grid] + [getattr(self, n) for n in names])


def compute_coeffs(profile: BackgroundProfile):
    """Fill a :class:`CoeffProfile` from a background profile.

    f and K = int k_b1 are obtained by cumulative Gauss quadrature with the
    integrands evaluated from the background's dense output.
    """
    r = np.asarray(profile.r_grid)
    drho, du1, du2 = profile.derivs()
    c = _pointwise(r, np.asarray(profile.rho_b), np.asarray(profile.U_b1),
                   np.asarray(profile.U_b2), drho, du1, du2, profile.gas.gamma, profile.gas.A0)
    f = cumulative_gauss(lambda x: background_coefficients(profile, x)["f_prime"], r)
    K = cumulative_gauss(lambda x: background_coefficients(profile, x)["k_b1"], r)
    keep = {k: c[k] for k in ("e1", "e2", "e2_tilde", "f_prime", "f_second", "A_b11",
                              "A_b12", "A_b33", "k_b1", "k_b2", "k_b22", "k_b22_prime",
                              "k_b33", "k_b33_prime")}
    return CoeffProfile(background=profile, r_grid=r, f=f, K=K, **keep)


@dataclass
class IdentityReport:
    """Residuals of the two background identities.

    ``levels`` holds (nodes, res22, res33) per grid; ``orders`` the observed
    (order22, order33) for each successive halving.
    """

    kb2_ratio: float
    res22: float
    res33: float
    rhs22_min: float
    rhs33_min: float
    levels: list = dataclasses.field(default_factory=list)
    orders: list = dataclasses.field(default_factory=list)

    @property
    def passed(self):
        ok = self.kb2_ratio <= 1e-7 and self.rhs33_min > 0 and self.rhs22_min > 0
        for pair in self.orders:
            # None marks an identity that already holds to round-off
            ok = ok and all(o is None or 1.8 <= o <= 2.2 for o in pair)
        return bool(ok)

    def as_dict(self):
        d = dataclasses.asdict(self)
        d["passed"] = self.passed
        return d


def identity_rhs(coeffs: CoeffProfile):
    """Right-hand sides of the k22 and k33 identities."""
    bg = coeffs.background
    g = bg.gas.gamma
    r = coeffs.r_grid
    m1, m2 = np.asarray(bg.M_b1_sq), np.asarray(bg.M_b2_sq)
    m = m1 + m2
    om = 1.0 - m1
    rhs22 = m * (4.0 - (3.0 - g) * m) / (r ** 3 * om ** 3)
    rhs33 = (2.0 + 2.0 * m2 + (g - 1.0) * m1 * m) / (r * om ** 3)
    return rhs22, rhs33


def _identity_residuals(coeffs):
    r = coeffs.r_grid
    rhs22, rhs33 = identity_rhs(coeffs)
    d22 = np.gradient(coeffs.k_b22, r, edge_order=2)
    d33 = np.gradient(coeffs.k_b33, r, edge_order=2)
    res22 = np.max(np.abs(2 * coeffs.k_b1 * coeffs.k_b22 + d22 - rhs22)) / np.max(np.abs(rhs22))
    res33 = np.max(np.abs(2 * coeffs.k_b1 * coeffs.k_b33 + d33 - rhs33)) / np.max(np.abs(rhs33))
    return float(res22), float(res33), rhs22, rhs33


def verify_prop22(coeffs: CoeffProfile, refine=True):
    """Check k_b2 = 0 and the k22 / k33 identities.

    Derivatives of k22 and k33 are taken with centered differences, so the
    residuals are O(h^2).  With ``refine`` the background is re-solved on
    grids with spacing h/2 and h/4 and the observed order is reported.
    """
    bg = coeffs.background
    g = bg.gas.gamma
    m0 = float(bg.M_tot_sq[0])
    if not 4.0 - (3.0 - g) * m0 > 0:
        raise RegimeError(f"|M(r0)|^2 = {m0:.6g} is not below 4/(3-gamma); k22 identity loses sign")
    res22, res33, rhs22, rhs33 = _identity_residuals(coeffs)
    kb2 = float(np.max(np.abs(coeffs.k_b2)) / np.max(np.abs(coeffs.k_b1)))
    rep = IdentityReport(kb2, res22, res33, float(rhs22.min()), float(rhs33.min()))
    rep.levels.append((len(coeffs.r_grid), res22, res33))
    if refine:
        from .background import solve_background
        n = len(coeffs.r_grid)
        for k in (1, 2):
            nk = (n - 1) * 2 ** k + 1
            bgk = solve_background(bg.gas, bg.r0, bg.r1, nk)
            r22, r33, _, _ = _identity_residuals(compute_coeffs(bgk))
            rep.levels.append((nk, r22, r33))
        for (_, a22, a33), (_, b22, b33) in zip(rep.levels[:-1], rep.levels[1:]):
            rep.orders.append(tuple(None if b < ROUNDOFF else float(np.log2(a / b))
                                    for a, b in ((a22, b22), (a33, b33))))
    return rep


def admissible_l0_interval(coeffs: CoeffProfile):
    """Forbidden open interval for l0.

    (M1 M2 -/+ sqrt(|M|^2 - 1)) / (1 - M1^2) at r0, with signed Mach
    numbers.  Any l0 outside satisfies k22(r0) + (f'(r0) - l0/r0)^2 > 0.
    """
    bg = coeffs.background
    c = np.sqrt(bg.c_sq[0])
    M1, M2 = bg.U_b1[0] / c, bg.U_b2[0] / c
    msq = M1 ** 2 + M2 ** 2
    if not msq > 1.0:
        raise RegimeError(f"flow is not supersonic at r0 (|M|^2 = {msq:.6g})")
    s = np.sqrt(msq - 1.0)
    om = 1.0 - M1 ** 2
    return (float((M1 * M2 - s) / om), float((M1 * M2 + s) / om))


def l0_gap_expression(coeffs: CoeffProfile, l0):
    """k22(r0) + (f'(r0) - l0/r0)^2, positive exactly for admissible l0."""
    r0 = coeffs.r_grid[0]
    return float(coeffs.k_b22[0] + (coeffs.f_prime[0] - l0 / r0) ** 2)


@dataclass(frozen=True)
class MultiplierSet:
    r_grid: np.ndarray
    l1: np.ndarray
    l2: np.ndarray
    l1_prime: np.ndarray
    l2_prime: np.ndarray
    sigma1: float
    sigma_star: float
    l0: float
    admissible_l0_gap: tuple
    E11: np.ndarray  # l1 k1 - l1'/2 on the background
    E22: np.ndarray  # (l1 k22)'/2 on the background
    E12: np.ndarray  # k1 l2 - l2' + l1 k2 on the background
    boundary_r0: float
    boundary_r1: float

    def conditions(self):
        """The four positivity conditions plus the outer boundary quadratic."""
        return {
            "E11_ge_sigma_star": bool(np.all(self.E11 >= self.sigma_star)),
            "E22_ge_sigma_star": bool(np.all(self.E22 >= self.sigma_star)),
            "E12_small": bool(np.max(np.abs(self.E12)) <= 1e-6 * max(1.0, np.max(np.abs(self.E11)))),
            "boundary_r0_positive": bool(self.boundary_r0 > 0),
            "boundary_r1_positive": bool(self.boundary_r1 > 0),
        }

    @property
    def passed(self):
        return self.sigma_star > 0 and all(self.conditions().values())

    def report(self):
        return {"sigma1": self.sigma1, "sigma_star": self.sigma_star, "l0": self.l0,
                "forbidden_l0": list(self.admissible_l0_gap),
                "min_E11": float(self.E11.min()), "min_E22": float(self.E22.min()),
                "max_abs_E12": float(np.max(np.abs(self.E12))),
                "boundary_r0": self.boundary_r0, "boundary_r1": self.boundary_r1,
                "l1_r0": float(self.l1[0]), "conditions": self.conditions(),
                "passed": self.passed}

    def to_csv(self, path):
        write_csv(path, ["r", "l1", "l2", "E11", "E22", "E12"],
                  [self.r_grid, self.l1, self.l2, self.E11, self.E22, self.E12])


def _exp_checked(x):
    if np.max(np.abs(x)) > EXP_LIMIT:
        raise ParameterError("exponent of the multiplier integral exceeds 700")
    return np.exp(x)


def _l1_pieces(coeffs: CoeffProfile):
    """Nodes values of K and I(y) = int_{r0}^y exp(-2K)."""
    bg = coeffs.background
    r = coeffs.r_grid
    K = coeffs.K

    def inner(x):
        # x has shape (n-1, 3): Gauss points of each panel; K(x) is
        # K(r_i) plus a nested Gauss integral on [r_i, x]
        a = r[:-1, None]
        w = x - a
        pts = a[..., None] + w[..., None] * _GL_X
        kb1 = background_coefficients(bg, pts)["k_b1"]
        Kx = K[:-1, None] + w * (kb1 @ _GL_W)
        return _exp_checked(-2.0 * Kx)

    I = cumulative_gauss(inner, r)
    return K, I


def build_multipliers(coeffs: CoeffProfile, l0, sigma1=None):
    """Multipliers l1, l2 and the positivity margins.

    l1 solves l1 k_b1 - l1'/2 = sigma1 with l1(r0) = 1 + 2 int exp(-2K);
    l2 = (f'(r0) - l0/r0) l1(r0) exp(K).  When ``sigma1`` is None it starts
    at 0.25 and is halved until l1 > 0 and (l1 k22)' > 0 on the grid.
    """
    gap = admissible_l0_interval(coeffs)
    if gap[0] < l0 < gap[1]:
        raise AdmissibilityError(
            f"l0={l0} lies in the forbidden interval ({gap[0]:.10g}, {gap[1]:.10g})", gap)
    r = coeffs.r_grid
    K, I = _l1_pieces(coeffs)
    eK2 = _exp_checked(2.0 * K)
    l1_r0 = 1.0 + 2.0 * I[-1]
    k1, k22 = coeffs.k_b1, coeffs.k_b22

    def attempt(s1):
        l1 = eK2 * (l1_r0 - 2.0 * s1 * I)
        dl1 = 2.0 * k1 * l1 - 2.0 * s1
        d_l1k22 = dl1 * k22 + l1 * coeffs.k_b22_prime
        return l1, dl1, d_l1k22

    if sigma1 is None:
        s1 = 0.25
        for _ in range(40):
            l1, dl1, d_l1k22 = attempt(s1)
            if np.all(l1 > 0) and np.all(d_l1k22 > 0):
                break
            s1 *= 0.5
        else:
            raise ParameterError("no sigma1 found with l1 > 0 and (l1 k22)' > 0")
    else:
        s1 = float(sigma1)
        if not 0 < s1 <= 0.5:
            raise ParameterError("sigma1 must lie in (0, 1/2]")
        l1, dl1, d_l1k22 = attempt(s1)
        if np.any(l1 <= 0):
            raise ParameterError(f"sigma1={s1} too large: l1 is not positive")

    beta = coeffs.f_prime[0] - l0 / r[0]
    l2 = beta * l1_r0 * _exp_checked(K)
    dl2 = k1 * l2
    E11 = l1 * k1 - 0.5 * dl1
    E22 = 0.5 * d_l1k22
    E12 = k1 * l2 - dl2 + l1 * coeffs.k_b2
    sigma_star = 0.5 * min(s1, float(np.min(d_l1k22)))
    # on the background k12 = 0, so the boundary quadratic is k22 l1 + l2^2/l1
    b0 = float(k22[0] * l1[0] + l2[0] ** 2 / l1[0])
    b1 = float(k22[-1] * l1[-1] + l2[-1] ** 2 / l1[-1])
    for a in (l1, l2, dl1, dl2, E11, E22, E12):
        a.setflags(write=False)
    return MultiplierSet(r_grid=r, l1=l1, l2=l2, l1_prime=dl1, l2_prime=dl2, sigma1=s1,
                         sigma_star=sigma_star, l0=float(l0), admissible_l0_gap=gap,
                         E11=E11, E22=E22, E12=E12, boundary_r0=b0, boundary_r1=b1)
