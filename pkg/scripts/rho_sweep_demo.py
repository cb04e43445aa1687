#!/usr/bin/env python3
"""Energy-map demo: c(rho) on a sqrt(2)-spaced grid of mass radii, plus the
property report (monotonicity, subadditivity, scaling inequality, divergence
proxy).  Radii are chosen so rho_{k+1}^2 = 2 rho_k^2, which feeds every check
with in-grid combinations."""

import time

from subnls import diagnostics as dg
from subnls import minimizer as mz
from subnls import nonlinearity as nl

spec = nl.log_power(1.0, 0.0, 4.0, dim=3)
cfg = mz.SolveConfig(spec=spec, rho=20.0, r_max=16.0, n=800,
                     eps_schedule=(1e-1, 1e-2, 1e-3))
rhos = [18.0 * 2 ** (k / 2.0) for k in range(5)]

t0 = time.time()
points = mz.energy_map(cfg, rhos)
print(f"{'rho':>10} {'c(rho)':>14} {'converged':>10}")
for p in points:
    print(f"{p.rho:10.4f} {p.c_value:14.5f} {str(p.converged):>10}")

for check in dg.energy_map_properties(points):
    print(f"{check.check_name:24s} {'pass' if check.passed else 'FAIL'} "
          f"margin={check.margin:+.4g} tol={check.tolerance:.3g}")
print(f"total time {time.time() - t0:.1f}s")
