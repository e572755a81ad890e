"""Nonlinear irrotational transonic solver.

The perturbation potential phi satisfies

    d_r phi = U1 - U_b1,   d_theta phi = r (U2 - U_b2) + d0,

with d0 = -eps r1 mean(g1) chosen so that phi is periodic.  Freezing the
coefficients at the previous iterate turns the steady potential equation
into the linear mixed-type problem handled by :mod:`transonic.spectral`;
the map phi -> T(phi) is iterated to its fixed point.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np

from .background import BackgroundProfile, solve_background
from .coeffs import CoeffProfile, MultiplierSet, build_multipliers, compute_coeffs
from .errors import NonConvergenceError, RegimeError, VacuumError
from .fields import EulerField2D
from .gas import GasParams, density_from_bernoulli
from .ops import dr2, dr4, dtheta, h1_norm, theta_grid, to_characteristic_coords
from .profiles import ZERO, Profile
from .spectral import LinearizedProblem, SpectralField, solve_linearized


@dataclass(frozen=True)
class BoundaryPerturbation2D:
    """Boundary perturbations of size epsilon.

    g0 perturbs U1 - l0 U2 at r0, g1 perturbs U2 at r1 and B1, A1 perturb
    the Bernoulli and entropy functions at r1.
    """

    epsilon: float = 0.0
    g0: Profile = ZERO
    g1: Profile = ZERO
    B1: Profile = ZERO
    A1: Profile = ZERO

    def scaled(self, epsilon):
        return dataclasses.replace(self, epsilon=float(epsilon))


@dataclass
class AnnulusSetup:
    """Background, coefficients and multipliers on one radial grid."""

    bg: BackgroundProfile
    coeffs: CoeffProfile
    mult: MultiplierSet
    l0: float
    N: int
    n_theta: int

    @property
    def r(self):
        return np.asarray(self.bg.r_grid)

    @property
    def h(self):
        return float(self.r[1] - self.r[0])

    @property
    def theta(self):
        return theta_grid(self.n_theta)

    @property
    def gas(self):
        return self.bg.gas


def prepare_annulus(gas: GasParams, r0, r1, n_r=513, l0=1.0, N=32, n_theta=None, sigma1=None):
    """Solve the background on the solver grid and build the multipliers.

    Raises RegimeError if |M(r0)|^2 >= 4/(3-gamma) (the multiplier
    construction needs it) and AdmissibilityError for a forbidden l0.
    """
    bg = solve_background(gas, r0, r1, n_r)
    m0 = float(bg.M_tot_sq[0])
    if not 4.0 - (3.0 - gas.gamma) * m0 > 0:
        raise RegimeError(f"|M(r0)|^2 = {m0:.6g} violates |M|^2 < 4/(3-gamma)")
    coeffs = compute_coeffs(bg)
    mult = build_multipliers(coeffs, l0, sigma1)
    n_theta = n_theta or 4 * N + 4
    return AnnulusSetup(bg=bg, coeffs=coeffs, mult=mult, l0=float(l0), N=int(N),
                        n_theta=int(n_theta))


@dataclass
class SolverControls:
    tol: float = 1e-10
    max_iter: int = 100
    divergence_window: int = 3
    trust_region: bool = True
    max_halvings: int = 6


@dataclass
class PotentialIterate:
    phi: np.ndarray
    U1: np.ndarray
    U2: np.ndarray
    d0: float
    iteration: int = 0
    history: list = field(default_factory=list)


def background_shape(setup):
    return (setup.r.size, setup.n_theta)


def velocities_from_phi(setup: AnnulusSetup, phi, d0):
    """U = U_b + (d_r phi, (d_theta phi - d0) / r)."""
    r = setup.r[:, None]
    U1 = setup.bg.U_b1[:, None] + dr4(phi, setup.h, axis=0)
    U2 = setup.bg.U_b2[:, None] + (dtheta(phi) - d0) / r
    return U1, U2


def linearize_state(setup: AnnulusSetup, U1, U2, B, E2, F, g2, g3):
    """Mixed-type problem in characteristic coordinates for a frozen state.

    Coefficients A_ij are evaluated at (U1, U2, B); e1 is the background one
    and E2 multiplies d_theta.  Everything is shifted to y2 = theta + f(r) and
    divided by A11.
    """
    g = setup.gas.gamma
    r = setup.r[:, None]
    c2 = (g - 1.0) * (B - 0.5 * (U1 ** 2 + U2 ** 2))
    if np.any(c2 <= 0):
        raise VacuumError("frozen state reaches vacuum / zero sound speed")
    A11 = c2 - U1 ** 2
    if np.any(A11 <= 0):
        raise RegimeError("frozen state has radial Mach number >= 1")
    A22 = (c2 - U2 ** 2) / r ** 2
    A12 = -U1 * U2 / r
    c = setup.coeffs
    fp = c.f_prime[:, None]
    e1 = c.e1[:, None]
    k12 = (A12 + A11 * fp) / A11
    k22 = (A22 + 2.0 * A12 * fp) / A11 + fp ** 2
    k1 = np.broadcast_to(e1 / A11, A11.shape)
    k2 = c.f_second[:, None] + (e1 * fp + E2) / A11
    Fh = F / A11
    to_y = lambda a: to_characteristic_coords(np.broadcast_to(a, A11.shape), c.f)
    r0 = setup.r[0]
    return LinearizedProblem(
        y1=setup.r, k12=to_y(k12), k22=to_y(k22), k1=to_y(k1), k2=to_y(k2), F_hat=to_y(Fh),
        g2=np.asarray(g2, dtype=float), g3=to_characteristic_coords(np.asarray(g3, dtype=float)[None, :],
                                                                    c.f[-1:])[0],
        l0=setup.l0, beta=float(r0 * c.f_prime[0] - setup.l0), y2_anchor=float(c.f[-1]),
        coeffs=c)


def potential_source(setup: AnnulusSetup, U1hat, U2hat, d0):
    """Right-hand side of the frozen potential equation.

    F = e2 d0 + ((g+1)/2 U_b1' + (g-1)/(2r) U_b1) U1hat^2
              + ((g-1)/2 U_b1' + (g-3)/(2r) U_b1) U2hat^2
              - (c^2 + U2^2 - c_b^2 - U_b2^2) / r * U1hat
    which makes phi an exact solution when the frozen state equals the
    solution.
    """
    g = setup.gas.gamma
    bg = setup.bg
    r = setup.r[:, None]
    Ub1, Ub2 = bg.U_b1[:, None], bg.U_b2[:, None]
    dUb1 = np.asarray(bg.derivs()[1])[:, None]
    cb2 = bg.c_sq[:, None]
    U1, U2 = Ub1 + U1hat, Ub2 + U2hat
    c2 = (g - 1.0) * (bg.gas.B0 - 0.5 * (U1 ** 2 + U2 ** 2))
    return (setup.coeffs.e2[:, None] * d0
            + (0.5 * (g + 1.0) * dUb1 + 0.5 * (g - 1.0) / r * Ub1) * U1hat ** 2
            + (0.5 * (g - 1.0) * dUb1 + 0.5 * (g - 3.0) / r * Ub1) * U2hat ** 2
            - (c2 + U2 ** 2 - cb2 - Ub2 ** 2) / r * U1hat)


def boundary_data(setup: AnnulusSetup, bc: BoundaryPerturbation2D):
    """(d0, g2(theta), g3(theta)) for the potential problem (theta grid)."""
    th = setup.theta
    r0, r1 = setup.r[0], setup.r[-1]
    eps = bc.epsilon
    d0 = -eps * r1 * float(np.mean(bc.g1(th)))
    g2 = r0 * eps * bc.g0(th) - setup.l0 * d0
    g3 = d0 + r1 * eps * bc.g1(th)
    return d0, g2, g3


def assemble_nonlinear(iterate: PotentialIterate, setup: AnnulusSetup, bc: BoundaryPerturbation2D):
    """Linearized problem with coefficients frozen at ``iterate``."""
    d0, g2, g3 = boundary_data(setup, bc)
    r = setup.r[:, None]
    U1hat = dr4(iterate.phi, setup.h, axis=0)
    U2hat = (dtheta(iterate.phi) - d0) / r
    U1 = setup.bg.U_b1[:, None] + U1hat
    U2 = setup.bg.U_b2[:, None] + U2hat
    F = potential_source(setup, U1hat, U2hat, d0)
    return linearize_state(setup, U1, U2, setup.gas.B0, setup.coeffs.e2[:, None], F, g2, g3)


@dataclass
class IrrotationalResult:
    iterate: PotentialIterate
    field: EulerField2D
    spectral: SpectralField
    report: dict


def _picard(setup, bc, controls, phi0):
    """Plain fixed-point loop; returns (phi, spectral field, history, status)."""
    d0, _, _ = boundary_data(setup, bc)
    phi = np.zeros((setup.r.size, setup.n_theta)) if phi0 is None else phi0
    delta0 = np.sqrt(bc.epsilon)
    incs, factors = [], []
    up = 0
    sfield = None
    for k in range(1, controls.max_iter + 1):
        it = PotentialIterate(phi=phi, U1=None, U2=None, d0=d0, iteration=k - 1)
        prob = assemble_nonlinear(it, setup, bc)
        sfield = solve_linearized(prob, setup.N)
        new = sfield.to_polar(setup.coeffs.f, setup.n_theta)
        inc = h1_norm(new - phi, setup.r)
        if incs and incs[-1] > 0:
            factors.append(inc / incs[-1])
            up = up + 1 if factors[-1] >= 1.0 else 0
        incs.append(inc)
        phi = new
        if controls.trust_region and h1_norm(phi, setup.r) > max(delta0, 1e-300) * 1.0 and bc.epsilon > 0:
            return phi, sfield, incs, factors, "trust"
        if inc <= controls.tol:
            return phi, sfield, incs, factors, "converged"
        if up >= controls.divergence_window:
            return phi, sfield, incs, factors, "diverged"
    return phi, sfield, incs, factors, "maxiter"


def solve_irrotational(setup: AnnulusSetup, bc: BoundaryPerturbation2D, controls=None, phi0=None,
                       _depth=0):
    """Fixed-point iteration for the irrotational transonic flow.

    Stops when the H^1 increment drops below ``controls.tol``.  Iterates
    leaving the trust region ||phi||_1 <= sqrt(eps), or three consecutive
    growing increments, trigger continuation: the problem is solved at
    eps/2 first and the result (scaled by 2) is used as the initial guess.
    """
    controls = controls or SolverControls()
    phi, sfield, incs, factors, status = _picard(setup, bc, controls, phi0)
    halvings = 0
    if status in ("trust", "diverged"):
        if _depth >= controls.max_halvings:
            raise NonConvergenceError(
                f"irrotational iteration failed ({status}) at eps={bc.epsilon:g}", incs)
        half = solve_irrotational(setup, bc.scaled(0.5 * bc.epsilon), controls, None, _depth + 1)
        guess = 2.0 * half.iterate.phi
        no_tr = dataclasses.replace(controls, trust_region=False)
        phi, sfield, incs, factors, status = _picard(setup, bc, no_tr, guess)
        halvings = half.report["continuation_halvings"] + 1
    if status != "converged":
        raise NonConvergenceError(
            f"irrotational iteration {status} after {len(incs)} steps (eps={bc.epsilon:g})", incs)
    d0, _, _ = boundary_data(setup, bc)
    U1, U2 = velocities_from_phi(setup, phi, d0)
    it = PotentialIterate(phi=phi, U1=U1, U2=U2, d0=d0, iteration=len(incs), history=incs)
    fld = EulerField2D(r=setup.r, U1=U1, U2=U2, B=setup.gas.B0, A=setup.gas.A0, gas=setup.gas)
    report = {
        "epsilon": bc.epsilon,
        "iterations": len(incs),
        "increments": incs,
        "contraction_factors": factors,
        "max_contraction": max_contraction(incs, controls.tol),
        "trust_radius": float(np.sqrt(bc.epsilon)),
        "phi_h1": h1_norm(phi, setup.r),
        "continuation_halvings": halvings,
        "d0": d0,
    }
    return IrrotationalResult(iterate=it, field=fld, spectral=sfield, report=report)


def max_contraction(incs, tol):
    """Largest ratio of successive increments above the noise level.

    Ratios whose numerator is below 10*tol are dominated by round-off in the
    linear solves and are not counted.
    """
    best = 0.0
    for a, b in zip(incs[:-1], incs[1:]):
        if a > 0 and b > 10.0 * tol:
            best = max(best, b / a)
    return float(best)


def euler_residual_2d(U1, U2, B, A, gas: GasParams, r, theta_derivative="spectral"):
    """Residuals of mass conservation and irrotationality.

    mass = d_r(r rho U1) + d_theta(rho U2),  curl = d_r(r U2) - d_theta U1,
    with rho from Bernoulli's law.  Radial derivatives are second-order
    centered differences; theta derivatives are spectral (or second-order
    centered with ``theta_derivative='centered'``).  Returns max and L2
    norms.
    """
    r = np.asarray(r, dtype=float)
    h = r[1] - r[0]
    R = r[:, None]
    rho = density_from_bernoulli(U1 ** 2 + U2 ** 2, B, A, gas.gamma)
    if theta_derivative == "spectral":
        dth = dtheta
    else:
        def dth(f):
            n = f.shape[-1]
            return (np.roll(f, -1, axis=-1) - np.roll(f, 1, axis=-1)) / (2 * 2 * np.pi / n)
    mass = dr2(R * rho * U1, h, axis=0) + dth(rho * U2)
    curl = dr2(R * U2, h, axis=0) - dth(U1)
    area = (r[-1] - r[0]) * 2 * np.pi

    def l2(a):
        return float(np.sqrt(np.trapezoid(np.mean(a ** 2, axis=1), r) * 2 * np.pi / area))
    return {"mass_max": float(np.max(np.abs(mass))), "mass_l2": l2(mass),
            "curl_max": float(np.max(np.abs(curl))), "curl_l2": l2(curl)}
