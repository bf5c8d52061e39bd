"""Eigenfunctions of the weighted Ornstein-Uhlenbeck operator and a Poisson solve.

    python3 demos/spectral_poisson.py
"""

import numpy as np

from gplab import MonomialWeight, WeightedGaussianMeasure, apply_generator, expand, integrate, poisson_solve
from gplab.funcs import random_polygauss
from gplab.spectral import orthonormality_defect, spectrum_rows

weight = MonomialWeight([1.0, 0.0])
mu = WeightedGaussianMeasure(weight)

print("lowest eigenvalues of -L for alpha = (1, 0)")
for row in spectrum_rows(weight, 4):
    print(f"  index {row['index']}  eigenvalue {row['eigenvalue']:g}")
print(f"max deviation of the Gram matrix from the identity: {orthonormality_defect(weight, 8):.2e}")

rhs = random_polygauss(np.random.default_rng(0), weight, 4, beta=0.0)
rhs = rhs - integrate(rhs, mu, normalized=True)
exp = expand(rhs, weight)
w = poisson_solve(exp).to_funcsum()
res = apply_generator(w, weight) + rhs
print(f"\nrhs has {len(exp.coeffs)} eigen-coefficients, |rhs|^2 = {exp.norm_sq():.6f}")
print(f"integral of (L w + rhs)^2 = {integrate(res * res, mu, normalized=True):.3e}")
