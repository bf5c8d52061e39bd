"""Poincare and uncertainty-principle deficits for monomial Gaussian measures."""

from .measure import (MonomialWeight, WeightedGaussianMeasure, effective_dimension, inner,
                      integrate, mean_vector, monomial_moment, normalization)
from .funcs import FuncSum, PolyGauss, is_neumann_admissible, random_polygauss
from .quad import build_rule, integrate_funcsum, tensor_integrate
from .spectral import apply_generator, basis_function, eigenvalue, expand, poisson_solve, rayleigh_gap

__version__ = "0.1.0"
