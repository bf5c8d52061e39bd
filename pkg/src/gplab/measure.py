"""Monomial weights, monomial Gaussian measures and exact moment integration.

A monomial weight ``x^A = x_1^{a_1} ... x_N^{a_N}`` lives on the Weyl chamber
``{x : x_i > 0 whenever a_i > 0}``.  The measure ``mu_{A,lam}`` is

    x^A exp(-|x|^2 / (2 lam^2)) dx / Z

and every integral of a polynomial times an isotropic Gaussian against it
factorizes into one-dimensional Gamma moments, which is what this module
evaluates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence, Union

import numpy as np
from scipy import special

if TYPE_CHECKING:
    from .funcs import FuncSum


@dataclass(frozen=True)
class MonomialWeight:
    """Exponent vector of a monomial weight x^A."""

    alpha: tuple

    def __post_init__(self):
        alpha = tuple(float(a) for a in self.alpha)
        if len(alpha) < 1:
            raise ValueError("a monomial weight needs at least one coordinate")
        if any(not math.isfinite(a) or a < 0 for a in alpha):
            raise ValueError(f"exponents must be finite and >= 0, got {alpha}")
        object.__setattr__(self, "alpha", alpha)

    @classmethod
    def zero(cls, n: int) -> "MonomialWeight":
        return cls([0.0] * n)

    @property
    def n(self) -> int:
        return len(self.alpha)

    @property
    def weighted(self) -> tuple:
        """Boolean mask of coordinates restricted to the half-line."""
        return tuple(a > 0 for a in self.alpha)

    def is_full(self) -> bool:
        return all(a > 0 for a in self.alpha)

    def is_partial(self) -> bool:
        return not self.is_full()

    def is_zero(self) -> bool:
        return all(a == 0 for a in self.alpha)

    def in_chamber(self, x) -> np.ndarray:
        """True for points strictly inside the Weyl chamber."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        mask = np.array(self.weighted)
        return np.all(~mask | (x > 0), axis=-1)

    def to_json(self) -> list:
        return list(self.alpha)


@dataclass(frozen=True)
class WeightedGaussianMeasure:
    """The pair (weight, lam) defining mu_{A,lam}; lam = 1 is mu_A."""

    weight: MonomialWeight
    lam: float = 1.0

    def __post_init__(self):
        if not isinstance(self.weight, MonomialWeight):
            object.__setattr__(self, "weight", MonomialWeight(self.weight))
        lam = float(self.lam)
        if not (lam > 0 and math.isfinite(lam)):
            raise ValueError(f"lambda must be a positive real, got {self.lam}")
        object.__setattr__(self, "lam", lam)

    @property
    def n(self) -> int:
        return self.weight.n

    @property
    def alpha(self) -> tuple:
        return self.weight.alpha

    @property
    def rate(self) -> float:
        """Gaussian rate s in exp(-s |x|^2 / 2)."""
        return 1.0 / self.lam**2

    def rescaled(self, lam: float) -> "WeightedGaussianMeasure":
        return WeightedGaussianMeasure(self.weight, lam)

    def to_json(self) -> dict:
        return {"alpha": list(self.alpha), "lambda": self.lam}

    @classmethod
    def from_json(cls, obj: dict) -> "WeightedGaussianMeasure":
        return cls(MonomialWeight(obj["alpha"]), obj.get("lambda", 1.0))


Target = Union[MonomialWeight, WeightedGaussianMeasure]


def effective_dimension(weight: MonomialWeight) -> float:
    """D = N + sum(alpha)."""
    return weight.n + sum(weight.alpha)


def _gamma(z):
    z = np.asarray(z, dtype=float)
    small = z < 170.0
    out = np.empty_like(z)
    out[small] = special.gamma(z[small])
    out[~small] = np.exp(special.gammaln(z[~small]))
    return out


def half_line_constant(m):
    """K(m) = 2^{(m-1)/2} Gamma((m+1)/2), the s = 1 half-line moment of x^m."""
    m = np.asarray(m, dtype=float)
    return np.exp2((m - 1.0) / 2.0) * _gamma((m + 1.0) / 2.0)


def monomial_moment(k: int, alpha_i: float, s: float, halfline: bool) -> float:
    """Integral of x^(k + alpha_i) exp(-s x^2 / 2).

    Over (0, inf) when ``halfline`` is set, otherwise over the whole line
    (which requires ``alpha_i == 0``).
    """
    if not s > 0:
        raise ValueError(f"rate s must be positive, got {s}")
    if k < 0 or int(k) != k:
        raise ValueError(f"k must be a non-negative integer, got {k}")
    if alpha_i < 0:
        raise ValueError("alpha_i must be >= 0")
    if not halfline and alpha_i != 0:
        raise ValueError("a weighted coordinate must be integrated over the half-line")
    m = k + alpha_i
    half = 2.0 ** ((m - 1) / 2) * math.gamma((m + 1) / 2) * s ** (-(m + 1) / 2)
    if halfline:
        return half
    return 0.0 if k % 2 else 2.0 * half


def coordinate_moments(ks, alpha_i: float, s: float) -> np.ndarray:
    """Vectorized ``monomial_moment`` over integer exponents ``ks``.

    The half-line is used exactly when ``alpha_i > 0`` (Weyl chamber rule).
    """
    ks = np.asarray(ks)
    m = ks + alpha_i
    val = half_line_constant(m) * s ** (-(m + 1.0) / 2.0)
    if alpha_i > 0:
        return val
    return np.where(ks % 2 == 1, 0.0, 2.0 * val)


def normalization(measure: WeightedGaussianMeasure) -> float:
    """Z = integral of x^A exp(-|x|^2 / (2 lam^2)) over the Weyl chamber."""
    s = measure.rate
    return float(np.prod([monomial_moment(0, a, s, a > 0) for a in measure.alpha]))


def mean_vector(measure: WeightedGaussianMeasure) -> np.ndarray:
    """Integral of x against the probability measure mu_{A,lam}."""
    s = measure.rate
    return np.array([
        monomial_moment(1, a, s, a > 0) / monomial_moment(0, a, s, a > 0)
        for a in measure.alpha
    ])


def _unpack(target: Target, normalized: bool):
    if isinstance(target, WeightedGaussianMeasure):
        return target.alpha, target.rate, (normalization(target) if normalized else 1.0)
    if isinstance(target, MonomialWeight):
        if normalized:
            raise ValueError("weight-only integration against x^A dx cannot be normalized")
        return target.alpha, 0.0, 1.0
    raise TypeError(f"expected a measure or a monomial weight, got {type(target).__name__}")


def _component_integrals(exps: np.ndarray, alpha, rate: float) -> np.ndarray:
    """Per-term integrals of x^k x^A exp(-rate |x|^2 / 2), shape (T,)."""
    out = np.ones(exps.shape[0])
    for i, a in enumerate(alpha):
        out *= coordinate_moments(exps[:, i], a, rate)
    return out


def integrate(f: "FuncSum", target: Target, *, normalized: bool) -> float:
    """Exact integral of a FuncSum over the Weyl chamber.

    ``target`` is either a measure (integrate against mu_{A,lam}, optionally
    divided by Z) or a bare weight (integrate against x^A dx; each component
    then needs a strictly positive envelope rate).
    """
    alpha, base_rate, z = _unpack(target, normalized)
    if f.n != len(alpha):
        raise ValueError(f"function has {f.n} coordinates, target has {len(alpha)}")
    total = 0.0
    for comp in f.components:
        s = base_rate + 2.0 * comp.beta
        if s <= 0:
            raise ValueError("divergent integral: component without Gaussian decay "
                             "integrated against x^A dx")
        total += float(comp.coefs @ _component_integrals(comp.exps, alpha, s))
    return total / z


def inner(f: "FuncSum", g: "FuncSum", target: Target, *, normalized: bool) -> float:
    """Integral of f * g without forming the canonical product."""
    alpha, base_rate, z = _unpack(target, normalized)
    total = 0.0
    for cf in f.components:
        for cg in g.components:
            s = base_rate + 2.0 * (cf.beta + cg.beta)
            if s <= 0:
                raise ValueError("divergent integral: product has no Gaussian decay")
            exps = (cf.exps[:, None, :] + cg.exps[None, :, :]).reshape(-1, len(alpha))
            vals = _component_integrals(exps, alpha, s).reshape(len(cf.coefs), len(cg.coefs))
            total += float(cf.coefs @ vals @ cg.coefs)
    return total / z


def abs_scale(f: "FuncSum", target: Target, *, normalized: bool) -> float:
    """Integral of the term-wise absolute value of f; a magnitude scale for f.

    Used to turn absolute discrepancies into relative ones when f itself may
    integrate to (nearly) zero through cancellation.
    """
    alpha, base_rate, z = _unpack(target, normalized)
    total = 0.0
    for comp in f.components:
        s = base_rate + 2.0 * comp.beta
        if s <= 0:
            raise ValueError("divergent integral")
        # |x|^k over the full line integrates like an even power
        vals = np.ones(len(comp.coefs))
        for i, a in enumerate(alpha):
            ks = comp.exps[:, i]
            m = ks + a
            v = half_line_constant(m) * s ** (-(m + 1.0) / 2.0)
            vals *= v if a > 0 else 2.0 * v
        total += float(np.abs(comp.coefs) @ vals)
    return total / z
