"""Background flow, coefficient identities and the multiplier ledger.

Solves the radially symmetric transonic background for the gamma = 1.4
asset, checks the conserved quantities, then scans the inner boundary
slope l0 across the forbidden interval and prints which values admit
energy multipliers.

    python3 demos/background_and_multipliers.py
"""
import numpy as np

from transonic.background import asset_background, conservation_defects
from transonic.coeffs import admissible_l0_interval, build_multipliers, compute_coeffs, verify_prop22
from transonic.errors import AdmissibilityError

bg = asset_background(1025)
print(f"sonic radius r_c = {bg.r_c:.12f}, rho_c = {bg.rho_c:.8f}")
print(f"|M|^2 at r0 = {bg.M_tot_sq[0]:.4f} (supersonic), at r1 = {bg.M_tot_sq[-1]:.4f}")
for name, d in conservation_defects(bg).items():
    print(f"  conservation defect {name:9s} {d:.2e}")

coeffs = compute_coeffs(bg)
ident = verify_prop22(coeffs)
print(f"k_b2 / k_b1 = {ident.kb2_ratio:.1e}; identity orders per halving: "
      + ", ".join(f"{a:.2f}/{b:.2f}" for a, b in ident.orders))

lo, hi = admissible_l0_interval(coeffs)
print(f"\nforbidden l0 interval: ({lo:.6f}, {hi:.6f})")
for l0 in np.round(np.linspace(-4, 2, 13), 2):
    try:
        m = build_multipliers(coeffs, float(l0))
        print(f"  l0 = {l0:5.2f}: sigma* = {m.sigma_star:.3f}, boundary r0 = {m.boundary_r0:.3f}")
    except AdmissibilityError:
        print(f"  l0 = {l0:5.2f}: rejected")
