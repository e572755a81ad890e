"""Background radial transonic spiral flow.

The background depends on r only.  Its data sit on the outer circle
r = r1 and the radial ODE system

    rho'  =  (M1^2 + M2^2) / (r (1 - M1^2)) * rho
    U1'   = -(1 + M2^2)    / (r (1 - M1^2)) * U1
    U2'   = -U2 / r

is integrated inward.  Mass flux r rho U1 = kappa1, angular momentum
r U2 = kappa2 and the Bernoulli constant B0 are conserved.  The flow
speeds up as r decreases and crosses the sonic circle r = r_c.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .errors import DomainError, RegimeError
from .gas import GasParams, sound_speed_sq
from .io import write_csv

# radial Mach number treated as "reached one" during integration
M1_SQ_LIMIT = 1.0 - 1e-4
# total Mach number treated as vacuum (c -> 0)
M_SQ_VACUUM = 1e8


def _state_rhs(gamma, A0):
    def rhs(r, y):
        rho, u1, u2 = y
        c2 = A0 * gamma * rho ** (gamma - 1.0)
        m1 = u1 * u1 / c2
        m2 = u2 * u2 / c2
        d = r * (1.0 - m1)
        return np.array([(m1 + m2) / d * rho, -(1.0 + m2) / d * u1, -u2 / r])
    return rhs


def sonic_radius_closed_form(gas: GasParams, kappa1, kappa2):
    """Closed forms (r_c, rho_c, r_sharp).

    rho_c = (2(g-1)B0 / ((g+1) g A0))^(1/(g-1))
    r_c   = sqrt((g+1)(kappa1^2 + kappa2^2 rho_c^2) / (2(g-1) B0 rho_c^2))

    r_sharp = |kappa2| / sqrt(2 B0) is only available in closed form for a
    purely circulatory flow (kappa1 = 0); otherwise None is returned.
    """
    g, A0, B0 = gas.gamma, gas.A0, gas.B0
    rho_c = (2.0 * (g - 1.0) * B0 / ((g + 1.0) * g * A0)) ** (1.0 / (g - 1.0))
    r_c = np.sqrt((g + 1.0) * (kappa1 ** 2 + kappa2 ** 2 * rho_c ** 2)
                  / (2.0 * (g - 1.0) * B0 * rho_c ** 2))
    r_sharp = abs(kappa2) / np.sqrt(2.0 * B0) if kappa1 == 0 else None
    return float(r_c), float(rho_c), r_sharp


def circulatory_density(r, gas: GasParams, kappa2):
    """Exact density of the purely circulatory background (U1 = 0)."""
    g = gas.gamma
    r = np.asarray(r, dtype=float)
    base = ((g - 1.0) / (gas.A0 * g)) ** (1.0 / (g - 1.0))
    return base * (gas.B0 - kappa2 ** 2 / (2.0 * r ** 2)) ** (1.0 / (g - 1.0))


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class BackgroundProfile:
    """Background flow sampled on a uniform radial grid.

    ``state(r)`` evaluates (rho, U1, U2) anywhere in [r0, r1] from the
    integrator's dense output, and ``derivs(r)`` returns their radial
    derivatives from the ODE right-hand side.
    """

    gas: GasParams
    r_grid: np.ndarray
    U_b1: np.ndarray
    U_b2: np.ndarray
    rho_b: np.ndarray
    M_b1_sq: np.ndarray
    M_b2_sq: np.ndarray
    M_tot_sq: np.ndarray
    kappa1: float
    kappa2: float
    r_c: float
    rho_c: float
    r_sharp: float | None
    r_c_numeric: float | None = None
    r_lower: float | None = None
    _dense: object = dataclasses.field(default=None, repr=False, compare=False)

    @property
    def r0(self):
        return float(self.r_grid[0])

    @property
    def r1(self):
        return float(self.r_grid[-1])

    @property
    def c_sq(self):
        return sound_speed_sq(self.rho_b, self.gas.A0, self.gas.gamma)

    def state(self, r):
        """(rho, U1, U2) at arbitrary radii inside [r_lower, r1]."""
        r = np.asarray(r, dtype=float)
        if self._dense is None:
            raise ValueError("profile has no dense output attached")
        y = self._dense(r.ravel())
        return tuple(v.reshape(r.shape) for v in y)

    def derivs(self, r=None):
        """Radial derivatives (rho', U1', U2') from the ODE right-hand side."""
        if r is None:
            r, rho, u1, u2 = self.r_grid, self.rho_b, self.U_b1, self.U_b2
        else:
            r = np.asarray(r, dtype=float)
            rho, u1, u2 = self.state(r)
        rhs = _state_rhs(self.gas.gamma, self.gas.A0)
        return tuple(rhs(r, (rho, u1, u2)))

    def restrict(self, rmin, rmax):
        """Sub-profile on the nodes with rmin <= r <= rmax."""
        m = (self.r_grid >= rmin) & (self.r_grid <= rmax)
        kw = {}
        for name in ("r_grid", "U_b1", "U_b2", "rho_b", "M_b1_sq", "M_b2_sq", "M_tot_sq"):
            kw[name] = _frozen(getattr(self, name)[m])
        return dataclasses.replace(self, **kw)

    def to_csv(self, path):
        write_csv(path, ["r", "U_b1", "U_b2", "rho_b", "M1sq", "M2sq", "Mtotsq"],
                  [self.r_grid, self.U_b1, self.U_b2, self.rho_b,
                   self.M_b1_sq, self.M_b2_sq, self.M_tot_sq])


def solve_background(gas: GasParams, r0, r1, grid_size=1025, rtol=1e-11, atol=1e-13,
                     max_step=np.inf, require_transonic=True):
    """Integrate the background ODEs from r1 inward and sample them.

    Parameters
    ----------
    gas : GasParams
        Outer-boundary state (rho0, U10, U20 at r = r1).
    r0, r1 : float
        Inner and outer radius.
    grid_size : int
        Number of uniform nodes on [r0, r1].
    require_transonic : bool
        If True, raise RegimeError unless the sonic radius lies in (r0, r1).

    The integration is continued below r0 until the radial Mach number
    approaches one or the sound speed collapses; that radius is reported
    as ``r_lower``.
    """
    if not 0 < r0 < r1:
        raise DomainError("need 0 < r0 < r1")
    if grid_size < 5:
        raise DomainError("grid_size must be at least 5")
    g, A0 = gas.gamma, gas.A0
    kappa1 = r1 * gas.rho0 * gas.U10
    kappa2 = r1 * gas.U20
    r_c, rho_c, r_sharp = sonic_radius_closed_form(gas, kappa1, kappa2)
    if r_sharp is not None and r0 <= r_sharp:
        raise DomainError(f"r0={r0} is not above r_sharp={r_sharp}")

    rhs = _state_rhs(g, A0)

    def radial_sonic(r, y):
        return y[1] ** 2 / (A0 * g * y[0] ** (g - 1.0)) - M1_SQ_LIMIT
    radial_sonic.terminal = True

    def vacuum(r, y):
        # signed so that the event also fires when rho passes through zero
        c2 = A0 * g * np.sign(y[0]) * abs(y[0]) ** (g - 1.0)
        return M_SQ_VACUUM * c2 - (y[1] ** 2 + y[2] ** 2)
    vacuum.terminal = True

    r_stop = 0.02 * r0
    sol = solve_ivp(rhs, (r1, r_stop), [gas.rho0, gas.U10, gas.U20], method="DOP853",
                    rtol=rtol, atol=atol, max_step=max_step, dense_output=True,
                    events=(radial_sonic, vacuum))
    if sol.status < 0:
        raise RegimeError(f"background integration failed: {sol.message}")
    r_lower = None
    if sol.status == 1:
        hit = [ev[0] for ev in sol.t_events if len(ev)]
        r_lower = float(max(hit))
        if r_lower >= r0:
            if len(sol.t_events[0]):
                raise RegimeError(f"radial Mach number reaches 1 at r={r_lower:.6g} >= r0")
            raise DomainError(f"sound speed collapses at r={r_lower:.6g} >= r0")

    r_grid = np.linspace(r0, r1, grid_size)
    rho, u1, u2 = sol.sol(r_grid)
    c2 = A0 * g * rho ** (g - 1.0)
    m1, m2 = u1 ** 2 / c2, u2 ** 2 / c2

    def dense(r):
        return sol.sol(r)

    def msq_minus_one(r):
        y = sol.sol(r)
        return (y[1] ** 2 + y[2] ** 2) / (A0 * g * y[0] ** (g - 1.0)) - 1.0

    r_c_num = None
    f0, f1 = msq_minus_one(r0), msq_minus_one(r1)
    if f0 > 0 > f1:
        r_c_num = float(brentq(msq_minus_one, r0, r1, xtol=1e-14, rtol=1e-15, maxiter=200))
    elif require_transonic:
        raise RegimeError(f"sonic radius r_c={r_c:.6g} is not inside ({r0}, {r1})")

    return BackgroundProfile(
        gas=gas, r_grid=_frozen(r_grid), U_b1=_frozen(u1), U_b2=_frozen(u2), rho_b=_frozen(rho),
        M_b1_sq=_frozen(m1), M_b2_sq=_frozen(m2), M_tot_sq=_frozen(m1 + m2),
        kappa1=float(kappa1), kappa2=float(kappa2), r_c=r_c, rho_c=rho_c, r_sharp=r_sharp,
        r_c_numeric=r_c_num, r_lower=r_lower, _dense=dense)


@dataclass
class ValidationReport:
    """Pass/fail flags for the structural properties of a background."""

    radial_subsonic: bool
    total_mach_monotone: bool
    sonic_crossing: bool
    brackets_r_c: bool
    nondegenerate: bool
    conservation_ok: bool
    defects: dict
    messages: list

    @property
    def passed(self):
        return all((self.radial_subsonic, self.total_mach_monotone, self.sonic_crossing,
                    self.brackets_r_c, self.nondegenerate, self.conservation_ok))

    def as_dict(self):
        d = dataclasses.asdict(self)
        d["passed"] = self.passed
        return d


def conservation_defects(profile: BackgroundProfile):
    """Max relative defects of mass flux, angular momentum and Bernoulli."""
    gas = profile.gas
    r = profile.r_grid
    out = {}
    if profile.kappa1 != 0:
        out["mass"] = float(np.max(np.abs(r * profile.rho_b * profile.U_b1 - profile.kappa1))
                            / abs(profile.kappa1))
    else:
        out["mass"] = float(np.max(np.abs(profile.U_b1)))
    out["angular"] = float(np.max(np.abs(r * profile.U_b2 - profile.kappa2)) / abs(profile.kappa2))
    B = 0.5 * (profile.U_b1 ** 2 + profile.U_b2 ** 2) + profile.c_sq / (gas.gamma - 1.0)
    out["bernoulli"] = float(np.max(np.abs(B - gas.B0)) / gas.B0)
    return out


def validate_proposition11(profile: BackgroundProfile, tol=1e-9):
    """Check the structural properties of a background profile.

    Reports whether M1^2 < 1 everywhere, |M|^2 decreases strictly in r,
    |M|^2 - 1 changes sign exactly once and brackets r_c, the sonic
    crossing is nondegenerate (d|M|^2/dr < 0 there) and the conserved
    quantities hold to ``tol``.
    """
    msgs = []
    M = np.asarray(profile.M_tot_sq)
    r = np.asarray(profile.r_grid)
    radial_subsonic = bool(np.all(profile.M_b1_sq < 1.0))
    if not radial_subsonic:
        msgs.append("radial Mach number reaches 1")
    monotone = bool(np.all(np.diff(M) < 0))
    if not monotone:
        msgs.append("total Mach number is not strictly decreasing in r")
    s = np.sign(M - 1.0)
    changes = np.nonzero(s[:-1] != s[1:])[0]
    crossing = len(changes) == 1
    brackets = False
    nondeg = False
    if not crossing:
        msgs.append("no sonic crossing" if len(changes) == 0 else "multiple sonic crossings")
    else:
        i = int(changes[0])
        brackets = bool(r[i] <= profile.r_c <= r[i + 1])
        if not brackets:
            msgs.append("closed-form r_c is not bracketed by the sign change")
        dM = (M[i + 1] - M[i]) / (r[i + 1] - r[i])
        nondeg = bool(dM < 0)
    defects = conservation_defects(profile)
    cons = all(v <= tol for v in defects.values())
    if not cons:
        msgs.append("conservation defect above tolerance: " + repr(defects))
    return ValidationReport(radial_subsonic, monotone, crossing, brackets, nondeg, cons,
                            defects, msgs)


def mach_sq_rate_residual(profile: BackgroundProfile):
    """Residual of r (M1^2 - 1) (|M|^2)' = |M|^2 (2 + (g-1)|M|^2).

    The derivative is taken with second-order centered differences, so the
    residual is O(h^2).  Returned relative to max of the right side.
    """
    g = profile.gas.gamma
    r = profile.r_grid
    M = profile.M_tot_sq
    dM = np.gradient(M, r, edge_order=2)
    lhs = r * (profile.M_b1_sq - 1.0) * dM
    rhs = M * (2.0 + (g - 1.0) * M)
    return float(np.max(np.abs(lhs - rhs)) / np.max(np.abs(rhs)))


ASSET = dict(gamma=1.4, A0=1.0 / 1.4, rho0=1.0, U10=-0.2, U20=0.6, r0=1.2, r1=2.0)
CIRCULATORY = dict(gamma=2.0, A0=0.5, rho0=0.875, U10=0.0, U20=0.5, r0=1.0, r1=2.0)


def asset_background(grid_size=1025, **kw):
    """Transonic background used throughout the tests and demos (gamma = 1.4)."""
    p = dict(ASSET)
    r0, r1 = p.pop("r0"), p.pop("r1")
    return solve_background(GasParams(**p), r0, r1, grid_size, **kw)


def circulatory_background(grid_size=1025, r0=1.0, **kw):
    """Circulatory background with gamma=2, A0=1/2, B0=1, kappa2=1."""
    p = dict(CIRCULATORY)
    p.pop("r0")
    r1 = p.pop("r1")
    return solve_background(GasParams(**p), r0, r1, grid_size, **kw)
