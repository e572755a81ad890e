"""Axisymmetric flow in a concentric cylinder with compactly supported data.

The perturbation enters through bumps centred at x3 = 0.  The script
follows the sonic surface r = chi(x3) and shows how the flow returns to
the background away from the bump, comparing truncation lengths L = 8 and
L = 16.

    python3 demos/axisymmetric_cylinder.py
"""
from transonic.axisym import (AxisymData, barrier_check, characteristic_invariance,
                              far_field_decay_check, prepare_strip, solve_axisym, tail_norm)
from transonic.background import ASSET
from transonic.gas import GasParams
from transonic.profiles import parse_profile
from transonic.sonic import locate_sonic_axisym

p = dict(ASSET)
r0, r1 = p.pop("r0"), p.pop("r1")
gas = GasParams(**p)
bump = parse_profile("bump:0,2")
data = AxisymData(1e-3, bump, bump, bump, bump, parse_profile("0.5*bump:0,2"))

results = {}
for L in (8.0, 16.0):
    res = solve_axisym(prepare_strip(gas, r0, r1, n_r=129, L=L), data)
    results[L] = res
    surf = locate_sonic_axisym(res.field, res.bg.r_c)
    inv = characteristic_invariance(res, data)
    bar = barrier_check(res.strip, res.phi)
    print(f"L = {L:4.0f}: {res.report['iterations']} Picard steps, sonic max dev {surf.max_dev:.2e},"
          f" at the ends {surf.end_dev:.1e}")
    print(f"          transport error {max(inv.values()):.1e}, barrier "
          f"{'respected' if bar['passed'] else 'violated'}")
    for lo in range(0, int(L), 2):
        print(f"    |x3| in [{lo:2d}, {lo + 2:2d}]: deviation {tail_norm(res.field, res.bg, lo, lo + 2):.2e}")

dec = far_field_decay_check(results[8.0], results[16.0])
print(f"outer-half tail: L = 8 -> {dec['tail_L']:.2e}, L = 16 -> {dec['tail_2L']:.2e}")
