"""Weighted uncertainty deficit and distances to Gaussian profiles.

For a Gaussian the deficit vanishes; for x_2 exp(-|x|^2/2) under the weight
x_1 the deficit equals the squared distance to the Gaussians exactly.  A
small random perturbation shows the stability margins in between.

    python3 demos/uncertainty_stability.py
"""

import math

import numpy as np

from gplab import FuncSum, MonomialWeight
from gplab.funcs import random_polygauss
from gplab.functionals import hup_deltas
from gplab.stability import dist_to_E, dist_to_F, stability_margins

weight = MonomialWeight([1.0, 0.0])
rng = np.random.default_rng(3)
gauss = FuncSum.gaussian(1.0, 0.5, 2)

cases = {
    "Gaussian": gauss,
    "x2 Gaussian": FuncSum.from_terms({(0, 1): 1.0}, beta=0.5),
    "Gaussian + noise": gauss + random_polygauss(rng, weight, 3, beta=0.5).scale(0.05),
}
for name, u in cases.items():
    da, d1, d2, lam = hup_deltas(u, weight)
    e, f = dist_to_E(u, weight), dist_to_F(u, weight)
    print(f"{name}")
    print(f"  delta_A = {da:.10f}  lambda* = {lam:.6f}")
    print(f"  d(u, E)^2 = {e.distance_sq:.10f} at lambda = {e.lam:.6f}, c = {e.c:.6f}")
    print(f"  d(u, F)^2 = {f.distance_sq:.10f} at lambda = {f.lam:.6f}")
    rep = stability_margins(u, weight)
    for key, m in rep.margins.items():
        print(f"    {key:<9} {m.lhs:14.10f} >= {m.rhs:14.10f}   margin {m.margin:.3e}")

print(f"\nsqrt(pi)/4 = {math.sqrt(math.pi) / 4:.10f}")

# the distance as a function of the profile width
fit = dist_to_E(cases["Gaussian + noise"], weight, keep_scan=True)
lams, vals = fit.scan
print("\nwidth scan for the perturbed Gaussian (every 8th point)")
for lam, v in zip(lams[::8], vals[::8]):
    print(f"  lambda = {lam:9.4f}  |u - c g|^2 = {v:.6e}")
