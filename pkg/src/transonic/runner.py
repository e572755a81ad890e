"""Dispatch a validated :class:`RunConfig` to the solvers and write artifacts.

Every run writes ``report.json`` (config echo, results, probe flags) into
the output directory, plus ``fields.csv``/``sonic.csv``/``spectrum.csv``
where the mode produces them.  Wall-clock times go to ``timing.json`` so
that ``report.json`` is byte-reproducible.
"""
from __future__ import annotations

import os
import time

import numpy as np

from . import __version__
from .axisym import (AxisymControls, AxisymData, barrier_check, characteristic_invariance,
                     far_field_decay_check, prepare_strip, solve_axisym)
from .background import solve_background, validate_proposition11
from .coeffs import admissible_l0_interval, build_multipliers, compute_coeffs, verify_prop22
from .config import RunConfig
from .errors import AdmissibilityError
from .fields import vorticity_2d
from .gas import GasParams
from .io import write_csv, write_json
from .potential import (BoundaryPerturbation2D, SolverControls, euler_residual_2d,
                        prepare_annulus, solve_irrotational)
from .profiles import parse_profile
from .rotational import RotationalControls, solve_rotational, streamline_oscillation
from .sonic import locate_sonic_2d, locate_sonic_axisym


def gas_from(cfg: RunConfig):
    return GasParams(**cfg.section("gas"))


def _bc2d(cfg, epsilon=None):
    eps = cfg.epsilon if epsilon is None else epsilon
    return BoundaryPerturbation2D(eps, parse_profile(cfg.g0), parse_profile(cfg.g1),
                                  parse_profile(cfg.B1), parse_profile(cfg.A1))


def _axis_data(cfg, epsilon=None):
    eps = cfg.epsilon if epsilon is None else epsilon
    return AxisymData(eps, parse_profile(cfg.q1), parse_profile(cfg.q2), parse_profile(cfg.q3),
                      parse_profile(cfg.B1), parse_profile(cfg.A1))


def _setup2d(cfg):
    return prepare_annulus(gas_from(cfg), cfg.r0, cfg.r1, n_r=cfg.n_r, l0=cfg.l0, N=cfg.N,
                           n_theta=cfg.n_theta, sigma1=cfg.sigma1)


def _dev(field, bg):
    return float(np.max(np.hypot(field.U1 - bg.U_b1[:, None], field.U2 - bg.U_b2[:, None])))


# --------------------------------------------------------------------------
# modes
# --------------------------------------------------------------------------

def run_background(cfg, out):
    gas = gas_from(cfg)
    bg = solve_background(gas, cfg.r0, cfg.r1, grid_size=max(cfg.n_r, 1025))
    val = validate_proposition11(bg)
    if out:
        bg.to_csv(os.path.join(out, "fields.csv"))
    res = {"r_c": bg.r_c, "rho_c": bg.rho_c, "r_sharp": bg.r_sharp, "r_c_numeric": bg.r_c_numeric,
           "r_lower": bg.r_lower, "kappa1": bg.kappa1, "kappa2": bg.kappa2,
           "M_sq_r0": float(bg.M_tot_sq[0]), "M_sq_r1": float(bg.M_tot_sq[-1]),
           "validation": val.as_dict()}
    return res, {"background_valid": val.passed}


def run_verify(cfg, out):
    gas = gas_from(cfg)
    bg = solve_background(gas, cfg.r0, cfg.r1, grid_size=max(cfg.n_r, 1025))
    val = validate_proposition11(bg)
    coeffs = compute_coeffs(bg)
    ident = verify_prop22(coeffs)
    gap = admissible_l0_interval(coeffs)
    mults = {}
    probes = {"background_valid": val.passed, "prop22": ident.passed}
    for l0 in cfg.l0_list:
        key = format(l0, "g")
        try:
            m = build_multipliers(coeffs, l0, cfg.sigma1)
            mults[key] = m.report()
            probes[f"multipliers_l0={key}"] = m.passed
        except AdmissibilityError as exc:
            mults[key] = {"rejected": str(exc)}
            probes[f"multipliers_l0={key}"] = False
    if out:
        coeffs.to_csv(os.path.join(out, "fields.csv"))
    res = {"validation": val.as_dict(), "prop22": ident.as_dict(), "forbidden_l0": list(gap),
           "multipliers": mults}
    return res, probes


def run_irrotational(cfg, out, epsilon=None):
    setup = _setup2d(cfg)
    bc = _bc2d(cfg, epsilon)
    ctl = SolverControls(tol=cfg.tol, max_iter=cfg.max_iter)
    res = solve_irrotational(setup, bc, ctl)
    f = res.field
    sonic = locate_sonic_2d(f, setup.bg.r_c)
    vort = float(np.max(np.abs(vorticity_2d(f))))
    resid = euler_residual_2d(f.U1, f.U2, f.B, f.A, setup.gas, f.r)
    if out:
        f.to_csv(os.path.join(out, "fields.csv"))
        sonic.to_csv(os.path.join(out, "sonic.csv"))
        res.spectral.spectrum_to_csv(os.path.join(out, "spectrum.csv"))
    rep = dict(res.report, sonic=sonic.summary(), vorticity_max=vort, euler_residual=resid,
               deviation=_dev(f, setup.bg), multipliers=setup.mult.report())
    probes = {"converged": True, "contraction_le_0.5": res.report["max_contraction"] <= 0.5,
              "vorticity_le_1e-8": vort <= 1e-8, "multipliers": setup.mult.passed}
    return rep, probes


def run_rotational(cfg, out, epsilon=None):
    setup = _setup2d(cfg)
    bc = _bc2d(cfg, epsilon)
    ctl = RotationalControls(inner_tol=cfg.inner_tol, outer_tol=cfg.outer_tol,
                             max_inner=cfg.max_iter, max_outer=cfg.max_iter)
    res = solve_rotational(setup, bc, ctl)
    f = res.field
    sonic = locate_sonic_2d(f, setup.bg.r_c)
    vort = float(np.max(np.abs(vorticity_2d(f))))
    osc = streamline_oscillation(f, cfg.n_streamlines)
    per = float(max(res.report["periodicity_defects"]))
    if out:
        f.to_csv(os.path.join(out, "fields.csv"))
        sonic.to_csv(os.path.join(out, "sonic.csv"))
        phi2 = res.velocity.phi2
        # spectrum of the potential part on the physical theta grid
        coef = np.fft.rfft(phi2, axis=1) / phi2.shape[1]
        amp = np.max(np.abs(coef), axis=0)
        write_csv(os.path.join(out, "spectrum.csv"), ["mode", "max_abs_coef"],
                  [np.arange(amp.size), amp])
    rep = dict(res.report, sonic=sonic.summary(), vorticity_max=vort,
               streamline_oscillation=osc, deviation=_dev(f, setup.bg),
               B_dev=float(np.max(np.abs(f.B - setup.gas.B0))))
    probes = {"converged": True, "periodicity_le_1e-9": per <= 1e-9,
              "streamline_constancy_le_1e-6": max(osc.values()) <= 1e-6}
    return rep, probes


def run_axisym(cfg, out, epsilon=None):
    gas = gas_from(cfg)
    data = _axis_data(cfg, epsilon)
    ctl = AxisymControls(tol=max(cfg.tol, 1e-9), max_iter=cfg.max_iter)
    st = prepare_strip(gas, cfg.r0, cfg.r1, n_r=cfg.n_r, L=cfg.L, hx=cfg.hx)
    res = solve_axisym(st, data, ctl)
    f = res.field
    surf = locate_sonic_axisym(f, st.bg.r_c)
    bar = barrier_check(res.strip, res.phi)
    inv = characteristic_invariance(res, data)
    if out:
        f.to_csv(os.path.join(out, "fields.csv"))
        surf.to_csv(os.path.join(out, "sonic.csv"))
    dev = float(max(np.max(np.abs(f.U1 - st.bg.U_b1[:, None])),
                    np.max(np.abs(f.U2 - st.bg.U_b2[:, None])), np.max(np.abs(f.U3))))
    rep = dict(res.report, sonic=surf.summary(), barrier=bar, characteristic_invariance=inv,
               deviation=dev)
    probes = {"converged": True, "barrier": bar["passed"],
              "characteristics_le_1e-8": max(inv.values()) <= 1e-8,
              "sonic_end_le_1e-4": surf.end_dev <= 1e-4}
    if cfg.decay_check:
        st2 = prepare_strip(gas, cfg.r0, cfg.r1, n_r=cfg.n_r, L=2 * cfg.L, hx=cfg.hx)
        res2 = solve_axisym(st2, data, ctl)
        dec = far_field_decay_check(res, res2)
        rep["far_field"] = dec
        probes["far_field_decay"] = dec["passed"]
    return rep, probes


_SOLVERS = {"irrotational": run_irrotational, "rotational": run_rotational, "axisym": run_axisym}


def run_sweep(cfg, out):
    base = _SOLVERS[cfg.base_mode]
    children = []
    for k, eps in enumerate(cfg.epsilons):
        sub = os.path.join(out, f"eps_{k}") if out else None
        if sub:
            os.makedirs(sub, exist_ok=True)
        rep, probes = base(cfg, sub, epsilon=eps)
        children.append({"epsilon": eps, "deviation": float(rep["deviation"]),
                         "sonic_dev": float(rep["sonic"]["max_dev"]), "probes": probes})
    lin = []
    for a, b in zip(children[:-1], children[1:]):
        scale = b["epsilon"] / a["epsilon"]
        lin.append({"eps_ratio": scale,
                    "deviation_ratio": b["deviation"] / a["deviation"] if a["deviation"] else None,
                    "sonic_ratio": b["sonic_dev"] / a["sonic_dev"] if a["sonic_dev"] else None})
    probes = {}
    for i, c in enumerate(children):
        for name, ok in c["probes"].items():
            probes[f"eps_{i}:{name}"] = ok
    for i, l in enumerate(lin):
        for key in ("deviation_ratio", "sonic_ratio"):
            v = l[key]
            probes[f"linear_{i}:{key}"] = v is not None and abs(v / l["eps_ratio"] - 1.0) <= 0.25
    return {"children": children, "linearity": lin}, probes


def run(cfg: RunConfig, out=None):
    """Run the configured mode; returns the report dict (also written to out)."""
    if out:
        os.makedirs(out, exist_ok=True)
    t0 = time.perf_counter()
    mode = cfg.mode
    fn = {"background": run_background, "verify": run_verify, "sweep": run_sweep}.get(mode)
    if fn is None:
        fn = _SOLVERS[mode]
    results, probes = fn(cfg, out)
    probes = {k: bool(v) for k, v in probes.items()}
    report = {"version": __version__, "mode": mode, "config": cfg.as_dict(), "results": results,
              "probes": probes, "passed": all(probes.values())}
    if out:
        write_json(os.path.join(out, "report.json"), report)
        write_json(os.path.join(out, "timing.json"),
                   {"wall_clock_s": round(time.perf_counter() - t0, 3)})
    return report
