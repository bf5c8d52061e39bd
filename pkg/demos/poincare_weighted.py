"""Poincare inequality and its remainders for a monomial-weighted Gaussian.

Walks through energy, variance and the two remainder terms for a few test
functions, then checks the spectral gap and the pointwise curvature bound.

    python3 demos/poincare_weighted.py
"""

import numpy as np

from gplab import FuncSum, MonomialWeight, WeightedGaussianMeasure, rayleigh_gap
from gplab.funcs import random_polygauss
from gplab.functionals import (dirichlet_energy, gamma2_check, gamma2_integral_identity, p1_rhs,
                               poincare_deficit, t2_rhs, t4_rhs, variance)

weight = MonomialWeight([1.0, 0.0])
mu = WeightedGaussianMeasure(weight)

print("alpha =", weight.alpha)
print(f"{'function':<28}{'energy':>10}{'variance':>10}{'deficit':>10}{'t2':>10}{'p1':>10}")
cases = {
    "3 + 2 x2": FuncSum.from_terms({(0, 0): 3.0, (0, 1): 2.0}),
    "x2^2 - 1": FuncSum.from_terms({(0, 2): 1.0, (0, 0): -1.0}),
    "x1^2 + x2^3": FuncSum.from_terms({(2, 0): 1.0, (0, 3): 1.0}),
    "random, degree 4": random_polygauss(np.random.default_rng(1), weight, 4),
}
for name, u in cases.items():
    print(f"{name:<28}{dirichlet_energy(u, mu):10.5f}{variance(u, mu):10.5f}"
          f"{poincare_deficit(u, mu):10.5f}{t2_rhs(u, mu):10.5f}{p1_rhs(u, mu):10.5f}")

# the scaled measure: E >= Var / lam^2 and the sharper affine bound
u = cases["x1^2 + x2^3"]
print("\nscale dependence for x1^2 + x2^3")
for lam in (0.5, 1.0, 2.0):
    m = WeightedGaussianMeasure(weight, lam)
    print(f"  lam = {lam:3.1f}  E = {dirichlet_energy(u, m):10.4f}  Var/lam^2 = "
          f"{variance(u, m) / lam**2:10.4f}  affine bound = {t4_rhs(u, m):10.4f}")

print("\nspectral gap by Rayleigh quotients")
for alpha in [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.5, 2.0)]:
    print(f"  alpha = {alpha}: {rayleigh_gap(MonomialWeight(alpha)):.12f}")

lhs, rhs = gamma2_integral_identity(u, mu)
print(f"\nintegral of Gamma_2 = {lhs:.12f}, integral of (L u)^2 = {rhs:.12f}")
print(f"min of Gamma_2 - Gamma over 10^4 chamber points: {gamma2_check(u, weight):.6f}")
