"""Energies, variances, deficits and Gamma-calculus for monomial Gaussian measures.

Scale conventions: for mu_{A,lam} the generator is
L = Lap - x.grad / lam^2 + sum_i alpha_i d_i / x_i, the spectral gap is
1 / lam^2 for partial weights, and the Poincare deficit is
E(u) - Var(u) / lam^2.  At lam = 1 everything reduces to the usual
statements for mu_A.

Uncertainty-principle quantities use raw ``x^A dx`` integrals.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from typing import NamedTuple, Optional

import numpy as np
from scipy import linalg

from .funcs import FuncSum, dot, is_neumann_admissible
from .measure import (MonomialWeight, WeightedGaussianMeasure, effective_dimension, inner,
                      integrate, mean_vector)
from .quad import QuadratureError, integrate_funcsum
from .spectral import apply_generator, eigenvalue, expand

MARGIN_RTOL = 1e-9


class Margin(NamedTuple):
    """lhs >= rhs, recorded with both sides."""

    lhs: float
    rhs: float

    @property
    def margin(self) -> float:
        return self.lhs - self.rhs

    @property
    def scale(self) -> float:
        return max(abs(self.lhs), abs(self.rhs), 1.0)

    def holds(self, rtol: float = MARGIN_RTOL) -> bool:
        return self.margin >= -rtol * self.scale


def _measure(m) -> WeightedGaussianMeasure:
    if isinstance(m, WeightedGaussianMeasure):
        return m
    if isinstance(m, MonomialWeight):
        return WeightedGaussianMeasure(m, 1.0)
    raise TypeError(f"expected a measure or weight, got {type(m).__name__}")


def _require_admissible(u: FuncSum, weight: MonomialWeight):
    if not is_neumann_admissible(u, weight):
        raise ValueError("u must have even exponents in every weighted coordinate")


def _require_classical(weight: MonomialWeight):
    if not weight.is_zero():
        raise ValueError("this functional is defined for the classical Gaussian (alpha = 0) only")


def _mean(u: FuncSum, m) -> float:
    return integrate(u, m, normalized=True)


def _centered(u: FuncSum, m) -> FuncSum:
    return u - _mean(u, m)


# Poincare-type functionals

def dirichlet_energy(u: FuncSum, measure) -> float:
    """Integral of |grad u|^2 against mu_{A,lam}."""
    m = _measure(measure)
    _require_admissible(u, m.weight)
    return float(sum(inner(g, g, m, normalized=True) for g in u.gradient()))


def variance(u: FuncSum, measure) -> float:
    m = _measure(measure)
    _require_admissible(u, m.weight)
    v = _centered(u, m)
    return inner(v, v, m, normalized=True)


def poincare_deficit(u: FuncSum, measure) -> float:
    """E(u) - Var(u) / lam^2."""
    m = _measure(measure)
    return dirichlet_energy(u, m) - variance(u, m) * m.rate


def covariance_vector(u: FuncSum, measure) -> np.ndarray:
    """Integral of (u - mean u) x against mu_{A,lam}."""
    m = _measure(measure)
    v = _centered(u, m)
    return np.array([inner(v, FuncSum.coordinate(i, m.n), m, normalized=True) for i in range(m.n)])


def _linear_part(u: FuncSum, m) -> np.ndarray:
    """Slope D = Cov(u, x) / lam^2 of the best affine approximation."""
    return covariance_vector(u, m) * m.rate


def t2_rhs(u: FuncSum, measure) -> float:
    """1/2 integral of |grad u - Cov(u, x) / lam^2|^2."""
    m = _measure(measure)
    _require_admissible(u, m.weight)
    d = _linear_part(u, m)
    total = 0.0
    for i, g in enumerate(u.gradient()):
        r = g - d[i]
        total += inner(r, r, m, normalized=True)
    return 0.5 * total


def _affine_residual(u: FuncSum, m, d: np.ndarray) -> FuncSum:
    """u - mean(u) - d.(x - mean(x))."""
    mean_x = mean_vector(m)
    out = _centered(u, m)
    for i, di in enumerate(d):
        if di:
            out = out - (FuncSum.coordinate(i, m.n) - mean_x[i]).scale(di)
    return out


def p1_rhs(u: FuncSum, measure) -> float:
    """(1 / (2 lam^2)) Var(u - D.x) with D = Cov(u, x) / lam^2."""
    m = _measure(measure)
    _require_admissible(u, m.weight)
    r = _affine_residual(u, m, _linear_part(u, m))
    return 0.5 * m.rate * inner(r, r, m, normalized=True)


class AffineFit(NamedTuple):
    value: float
    c: float
    d: np.ndarray
    gradient: np.ndarray  # of the quadratic objective at (c, d); zero at the minimizer


def affine_least_squares(u: FuncSum, measure, w_const: float, w_affine: float,
                         center=None) -> AffineFit:
    """min over (c, d) of w_const |u - c|^2 + w_affine |u - c - d.(x - center)|^2, integrated.

    A quadratic in theta = (c, d) with Gram matrix built from exact moments.
    """
    m = _measure(measure)
    n = m.n
    center = np.zeros(n) if center is None else np.asarray(center, dtype=float)
    ys = [FuncSum.coordinate(i, n) - center[i] for i in range(n)]
    one = FuncSum.constant(1.0, n)
    basis = [one] + ys
    gram_y = np.array([[inner(a, b, m, normalized=True) for b in basis] for a in basis])
    proj = np.array([inner(u, b, m, normalized=True) for b in basis])
    g = w_affine * gram_y
    g[0, 0] += w_const
    b = w_affine * proj
    b[0] += w_const * proj[0]
    theta = linalg.cho_solve(linalg.cho_factor(g), b)
    # evaluate the objective from the residual functions themselves
    r_const = u - theta[0]
    r_aff = r_const
    for i, di in enumerate(theta[1:]):
        r_aff = r_aff - ys[i].scale(di)
    value = (w_const * inner(r_const, r_const, m, normalized=True)
             + w_affine * inner(r_aff, r_aff, m, normalized=True))
    grad = 2.0 * (g @ theta - b)
    return AffineFit(float(value), float(theta[0]), theta[1:].copy(), grad)


def t4_rhs(u: FuncSum, measure, literal_mean: bool = False) -> float:
    """(1/lam^2) inf_{c,d} integral of |u - c|^2 + 1/2 |u - c - d.(x - m)|^2 d mu_{A,lam}.

    ``m`` is the mean of mu_{A,lam}.  ``literal_mean`` uses the lam = 1
    mean instead, whatever lam is.
    """
    m = _measure(measure)
    _require_admissible(u, m.weight)
    center = mean_vector(m.rescaled(1.0) if literal_mean else m)
    return m.rate * affine_least_squares(u, m, 1.0, 0.5, center).value


def t5_fit(u: FuncSum, lam: float) -> AffineFit:
    m = WeightedGaussianMeasure(MonomialWeight.zero(u.n), lam)
    return affine_least_squares(u, m, 1.0, 1.0)


def t5_rhs(u: FuncSum, lam: float) -> float:
    """(1/lam^2) inf_{c,d} integral of |u - c|^2 + |u - c - d.x|^2 d mu_lam (classical)."""
    return t5_fit(u, lam).value / lam**2


def p2_chain(u: FuncSum, lam: float = 1.0, weight: MonomialWeight | None = None):
    """(deficit, mid, rhs) for the classical Gaussian of scale lam.

    deficit = E - Var / lam^2, mid = 1/2 |grad u - D|^2 with D the slope of
    the best affine fit, rhs = (1/lam^2) |u - mean - D.x|^2.  A non-zero
    ``weight`` is rejected.
    """
    if weight is not None:
        _require_classical(weight)
    m = WeightedGaussianMeasure(MonomialWeight.zero(u.n), lam)
    r = _affine_residual(u, m, _linear_part(u, m))
    return (poincare_deficit(u, m), t2_rhs(u, m), m.rate * inner(r, r, m, normalized=True))


def p2_chain_spectral(u: FuncSum):
    """The same chain from eigen-coefficients (polynomial u, lam = 1):
    sum (k - 1) c^2, 1/2 sum_{k>=2} k c^2, sum_{k>=2} c^2 with k the eigenvalue."""
    weight = MonomialWeight.zero(u.n)
    exp = expand(u, weight)
    deficit = mid = rhs = 0.0
    for idx, c in exp.coeffs.items():
        k = eigenvalue(idx, weight)
        if k >= 1:
            deficit += (k - 1) * c * c
        if k >= 2:
            mid += 0.5 * k * c * c
            rhs += c * c
    return deficit, mid, rhs


# Gamma calculus

def carre_du_champ(u: FuncSum) -> FuncSum:
    g = u.gradient()
    return dot(g, g)


def gamma2_operator(u: FuncSum, measure) -> FuncSum:
    """Gamma_2(u) = 1/2 L Gamma(u) - grad u . grad L u, exactly."""
    m = _measure(measure)
    _require_admissible(u, m.weight)
    lu = apply_generator(u, m)
    return apply_generator(carre_du_champ(u), m).scale(0.5) - dot(u.gradient(), lu.gradient())


def gamma2_formula(u: FuncSum, measure, x) -> np.ndarray:
    """Pointwise |Hess u|_F^2 + |grad u|^2 / lam^2 + sum alpha_i (d_i u / x_i)^2."""
    m = _measure(measure)
    x = np.asarray(x, dtype=float)
    grad = [g(x) for g in u.gradient()]
    out = sum(h(x) ** 2 for row in u.hessian() for h in row)
    out = out + m.rate * sum(g**2 for g in grad)
    for i, a in enumerate(m.alpha):
        if a > 0:
            out = out + a * (grad[i] / x[..., i]) ** 2
    return out


def sample_chamber(rng: np.random.Generator, weight: MonomialWeight, size: int,
                   spread: float = 1.5, floor: float = 1e-3) -> np.ndarray:
    """Gaussian samples folded into the chamber, weighted coordinates >= floor."""
    x = rng.normal(0.0, spread, size=(size, weight.n))
    for i, w in enumerate(weight.weighted):
        if w:
            x[:, i] = np.abs(x[:, i]) + floor
    return x


def gamma2_margins(u: FuncSum, measure, x):
    """Pointwise Gamma_2(u) - Gamma(u) / lam^2 (definition path) and a magnitude scale."""
    m = _measure(measure)
    g2 = gamma2_operator(u, m)(x)
    g1 = carre_du_champ(u)(x) * m.rate
    return g2 - g1, np.maximum(np.maximum(np.abs(g2), np.abs(g1)), 1.0)


def gamma2_check(u: FuncSum, weight, samples: int = 10_000, seed: int = 0, lam: float = 1.0) -> float:
    """Minimum over chamber samples of Gamma_2(u) - Gamma(u) (curvature-dimension check)."""
    m = _measure(weight) if isinstance(weight, WeightedGaussianMeasure) else WeightedGaussianMeasure(weight, lam)
    x = sample_chamber(np.random.default_rng(seed), m.weight, samples, spread=1.5 * m.lam)
    margins, _ = gamma2_margins(u, m, x)
    return float(np.min(margins))


def _quotient_square_integral(g: FuncSum, i: int, m, orders=None) -> float:
    """Integral of (g / x_i)^2 by tensor quadrature, dividing pointwise at the nodes.

    Each pair of envelope components gets the Gauss rule of its combined rate.
    """
    from .measure import normalization
    from .quad import resolve_orders, tensor_grid

    orders = resolve_orders(orders, m.n)
    total = 0.0
    for ca in g.components:
        for cb in g.components:
            nodes, weights = tensor_grid(m.alpha, m.rate + 2.0 * (ca.beta + cb.beta), orders)
            qa = ca.polynomial_part().evaluate(nodes) / nodes[:, i]
            qb = cb.polynomial_part().evaluate(nodes) / nodes[:, i]
            vals = qa * qb
            if not np.all(np.isfinite(vals)):
                raise QuadratureError("non-finite quotient at a quadrature node")
            total += float(np.dot(weights, vals))
    return total / normalization(m)


def gamma2_integral_identity(u: FuncSum, measure, orders=None):
    """(integral of Gamma_2(u), integral of (L u)^2) against mu_{A,lam}.

    Hessian and gradient terms are integrated exactly; the alpha_i (d_i u / x_i)^2
    term by tensor quadrature of its pointwise values, never forming the
    quotient symbolically.
    """
    m = _measure(measure)
    _require_admissible(u, m.weight)
    hess = u.hessian()
    lhs = sum(inner(h, h, m, normalized=True) for row in hess for h in row)
    lhs += m.rate * sum(inner(g, g, m, normalized=True) for g in u.gradient())
    grads = u.gradient()
    for i, a in enumerate(m.alpha):
        if a > 0:
            lhs += a * _quotient_square_integral(grads[i], i, m, orders)
    lu = apply_generator(u, m)
    return float(lhs), inner(lu, lu, m, normalized=True)


# uncertainty principle

def _require_decay(u: FuncSum):
    if u.is_zero():
        raise ValueError("u must be non-zero")
    if any(c.beta <= 0 for c in u.components):
        raise ValueError("every component needs a Gaussian envelope (beta > 0)")


def hup_integrals(u: FuncSum, weight: MonomialWeight):
    """(E, M, L2): integrals of |grad u|^2, |x|^2 u^2 and u^2 against x^A dx."""
    _require_decay(u)
    e = sum(inner(g, g, weight, normalized=False) for g in u.gradient())
    mm = sum(inner(xu, xu, weight, normalized=False) for xu in u.radial_multiply())
    l2 = inner(u, u, weight, normalized=False)
    return float(e), float(mm), float(l2)


def delta_A(u: FuncSum, weight: MonomialWeight) -> float:
    e, mm, l2 = hup_integrals(u, weight)
    return math.sqrt(e) * math.sqrt(mm) - 0.5 * effective_dimension(weight) * l2


def lambda_star(u: FuncSum, weight: MonomialWeight) -> float:
    e, mm, _ = hup_integrals(u, weight)
    return (mm / e) ** 0.25


def hup_deltas(u: FuncSum, weight: MonomialWeight):
    """(delta_A, delta_1, delta_2, lambda_star)."""
    e, mm, l2 = hup_integrals(u, weight)
    da = math.sqrt(e) * math.sqrt(mm) - 0.5 * effective_dimension(weight) * l2
    zero = MonomialWeight.zero(weight.n)
    e0, m0, l0 = hup_integrals(u, zero)
    n = weight.n
    d1 = math.sqrt(e0) * math.sqrt(m0) - 0.5 * n * l0
    d2 = e0 * m0 - 0.25 * n * n * l0 * l0
    return da, d1, d2, (mm / e) ** 0.25


def hup_identity_sides(u: FuncSum, weight: MonomialWeight, method: str = "exact", orders=None):
    """(delta_A, (lam^2/2) integral |grad u + x u / lam^2|^2 x^A dx, magnitude) at lam = lambda_star.

    ``method`` selects exact moment integration or tensor quadrature for the
    right-hand side.  The magnitude is sqrt(E M), the size of the terms that
    cancel in delta_A.
    """
    e, mm, l2 = hup_integrals(u, weight)
    lhs = math.sqrt(e) * math.sqrt(mm) - 0.5 * effective_dimension(weight) * l2
    lam = (mm / e) ** 0.25
    field = [g + u.times_coordinate(i).scale(1.0 / lam**2) for i, g in enumerate(u.gradient())]
    if method == "exact":
        total = sum(inner(f, f, weight, normalized=False) for f in field)
    elif method == "quadrature":
        total = sum(integrate_funcsum(f * f, weight, orders, normalized=False) for f in field)
    else:
        raise ValueError(f"unknown method {method!r}")
    return lhs, 0.5 * lam**2 * float(total), math.sqrt(e * mm)


def hup_identity_residual(u: FuncSum, weight: MonomialWeight, method: str = "exact") -> float:
    lhs, rhs, _ = hup_identity_sides(u, weight, method)
    return abs(lhs - rhs)


# report

@dataclass
class DeficitReport:
    alpha: list
    lam: float
    function: list
    energy: float
    variance: float
    poincare_deficit: float
    t2_rhs: float
    p1_rhs: float
    p2_rhs: Optional[float] = None
    delta_A: Optional[float] = None
    delta_1: Optional[float] = None
    delta_2: Optional[float] = None
    hup_identity_residual: Optional[float] = None
    lambda_star: Optional[float] = None

    def to_json(self) -> dict:
        out = asdict(self)
        out["lambda"] = out.pop("lam")
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def deficit_report(u: FuncSum, measure) -> DeficitReport:
    """Every Poincare and uncertainty functional of u that applies."""
    m = _measure(measure)
    rep = DeficitReport(alpha=list(m.alpha), lam=m.lam, function=u.to_json(),
                        energy=dirichlet_energy(u, m), variance=variance(u, m),
                        poincare_deficit=poincare_deficit(u, m), t2_rhs=t2_rhs(u, m),
                        p1_rhs=p1_rhs(u, m))
    if m.weight.is_zero():
        rep.p2_rhs = p2_chain(u, m.lam)[2]
    if not u.is_zero() and all(c.beta > 0 for c in u.components):
        rep.delta_A, rep.delta_1, rep.delta_2, rep.lambda_star = hup_deltas(u, m.weight)
        rep.hup_identity_residual = hup_identity_residual(u, m.weight)
    return rep
