"""Eigenstructure of the weighted Ornstein-Uhlenbeck operator.

    L_{A,lam} u = Lap u - (x . grad u) / lam^2 + sum_i (alpha_i / x_i) d_i u

is symmetric on L^2(mu_{A,lam}).  It separates over coordinates: an
unweighted coordinate carries probabilists' Hermite polynomials He_n(x/lam)
with eigenvalue n, a weighted one carries generalized Laguerre polynomials
L_n^{(a)}(x^2 / (2 lam^2)), a = (alpha_i - 1)/2, with eigenvalue 2n (both
divided by lam^2).  Product eigenfunctions are indexed by one integer per
coordinate.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass, field

import mpmath
import numpy as np
from scipy import linalg

from .funcs import FuncSum, PolyGauss, is_neumann_admissible, multi_indices
from .measure import (MonomialWeight, WeightedGaussianMeasure, coordinate_moments, inner,
                      integrate)

DEFAULT_CUTOFF = 12


def _as_measure(weight, lam: float = 1.0) -> WeightedGaussianMeasure:
    if isinstance(weight, WeightedGaussianMeasure):
        return weight
    return WeightedGaussianMeasure(weight, lam)


def apply_generator(u: FuncSum, weight, lam: float = 1.0) -> FuncSum:
    """L_{A,lam} u, exactly, for Neumann-admissible u.

    Raises ValueError otherwise: d_i u / x_i would leave the family.
    """
    m = _as_measure(weight, lam)
    if not is_neumann_admissible(u, m.weight):
        raise ValueError("generator is only closed on Neumann-admissible functions")
    out = u.laplacian()
    for i, a in enumerate(m.alpha):
        du = u.partial(i)
        out = out - du.times_coordinate(i).scale(m.rate)
        if a > 0 and not du.is_zero():
            out = out + du.divide_by_coordinate(i).scale(a)
    return out


# one-dimensional factors, as coefficient arrays in powers of x (lam = 1).
# Built and normalized in extended precision, then rounded once.

_DPS = 60


def _mp_moment(k: int, alpha_i: float):
    """E[x^k] under the 1-D probability factor, in mpmath."""
    a = mpmath.mpf(alpha_i)
    if alpha_i > 0:
        return mpmath.power(2, mpmath.mpf(k) / 2) * mpmath.gamma((k + a + 1) / 2) / mpmath.gamma((a + 1) / 2)
    if k % 2:
        return mpmath.mpf(0)
    return mpmath.fac2(k - 1)


def _mp_hermite(n: int) -> list:
    prev, cur = [], [mpmath.mpf(1)]
    for k in range(n):
        nxt = [mpmath.mpf(0)] + cur
        for j, c in enumerate(prev):
            nxt[j] -= k * c
        prev, cur = cur, nxt
    return cur


def _mp_laguerre_t(n: int, a) -> list:
    """L_n^{(a)}(t) in powers of t, by the three-term recurrence."""
    prev, cur = [], [mpmath.mpf(1)]
    for k in range(n):
        nxt = [(2 * k + 1 + a) * c for c in cur] + [mpmath.mpf(0)]
        for j, c in enumerate(cur):
            nxt[j + 1] -= c
        for j, c in enumerate(prev):
            nxt[j] -= (k + a) * c
        prev, cur = cur, [c / (k + 1) for c in nxt]
    return cur


def _mp_raw_factor(n: int, alpha_i: float) -> list:
    if alpha_i > 0:
        tc = _mp_laguerre_t(n, (mpmath.mpf(alpha_i) - 1) / 2)
        xc = [mpmath.mpf(0)] * (2 * n + 1)
        for j, c in enumerate(tc):
            xc[2 * j] = c / mpmath.power(2, j)
        return xc
    return _mp_hermite(n)


def laguerre_norm_sq(n: int, alpha_i: float) -> float:
    """Closed-form mu-norm^2 of L_n^{(a)}(x^2/2): Gamma(n+a+1) / (n! Gamma(a+1))."""
    a = (alpha_i - 1.0) / 2.0
    return math.exp(math.lgamma(n + a + 1) - math.lgamma(n + 1) - math.lgamma(a + 1))


def raw_norm_sq(n: int, alpha_i: float) -> float:
    """mu-norm^2 of the unnormalized factor, by exact moment integration."""
    with mpmath.workdps(_DPS):
        c = _mp_raw_factor(n, alpha_i)
        return float(mpmath.fsum(ci * cj * _mp_moment(i + j, alpha_i)
                                 for i, ci in enumerate(c) for j, cj in enumerate(c)
                                 if ci and cj))


@functools.lru_cache(maxsize=None)
def _factor(n: int, alpha_i: float) -> tuple:
    with mpmath.workdps(_DPS):
        c = _mp_raw_factor(n, alpha_i)
        norm_sq = mpmath.fsum(ci * cj * _mp_moment(i + j, alpha_i)
                              for i, ci in enumerate(c) for j, cj in enumerate(c) if ci and cj)
        scale = 1 / mpmath.sqrt(norm_sq)
        return tuple(float(ci * scale) for ci in c)


def factor_coefficients(n: int, alpha_i: float) -> np.ndarray:
    """Coefficients (powers of x) of the normalized 1-D eigenfunction, lam = 1."""
    return np.array(_factor(int(n), float(alpha_i)))


def _moments_1d(alpha_i: float, kmax: int) -> np.ndarray:
    """E[x^k], k = 0..kmax, under the 1-D probability factor of mu_A."""
    ks = np.arange(kmax + 1)
    vals = coordinate_moments(ks, alpha_i, 1.0)
    return vals / vals[0]


def eigenvalue(idx, weight, lam: float = 1.0) -> float:
    """sum_i (2 n_i if alpha_i > 0 else n_i), divided by lam^2."""
    m = _as_measure(weight, lam)
    idx = tuple(int(k) for k in idx)
    if len(idx) != m.n or min(idx) < 0:
        raise ValueError(f"bad eigen-index {idx} for {m.n} coordinates")
    return sum(2 * k if a > 0 else k for k, a in zip(idx, m.alpha)) * m.rate


def basis_function(idx, weight, lam: float = 1.0) -> FuncSum:
    """Normalized product eigenfunction phi_idx in L^2(mu_{A,lam})."""
    m = _as_measure(weight, lam)
    idx = tuple(int(k) for k in idx)
    if len(idx) != m.n or min(idx) < 0:
        raise ValueError(f"bad eigen-index {idx} for {m.n} coordinates")
    per_coord = []
    for k, a in zip(idx, m.alpha):
        c = factor_coefficients(k, a)
        powers = np.nonzero(c)[0]
        # phi(x / lam): coefficient of x^j picks up lam^-j
        per_coord.append([(int(j), c[j] * m.lam ** (-int(j))) for j in powers])
    exps, coefs = [], []
    for combo in itertools.product(*per_coord):
        exps.append([j for j, _ in combo])
        coefs.append(math.prod(v for _, v in combo))
    return FuncSum([PolyGauss(np.array(exps, dtype=np.int64), coefs, 0.0, m.n)], m.n)


def indices_up_to(weight, cutoff: float) -> list:
    """Eigen-indices with (lam = 1) eigenvalue <= cutoff, ordered by eigenvalue."""
    alpha = weight.alpha
    ranges = [range(int(cutoff // (2 if a > 0 else 1)) + 1) for a in alpha]
    out = [idx for idx in itertools.product(*ranges) if eigenvalue(idx, weight) <= cutoff]
    return sorted(out, key=lambda idx: (eigenvalue(idx, weight), idx))


@dataclass(frozen=True)
class SpectralExpansion:
    """Coefficients of a function in the orthonormal eigenbasis of -L_{A,lam}."""

    weight: MonomialWeight
    lam: float
    coeffs: dict = field(default_factory=dict)
    dropped_mass: float = 0.0

    @property
    def measure(self) -> WeightedGaussianMeasure:
        return WeightedGaussianMeasure(self.weight, self.lam)

    def norm_sq(self) -> float:
        return float(sum(c * c for c in self.coeffs.values()))

    def eigenvalues(self) -> dict:
        return {idx: eigenvalue(idx, self.weight, self.lam) for idx in self.coeffs}

    def to_funcsum(self) -> FuncSum:
        out = FuncSum.zero(self.weight.n)
        for idx, c in self.coeffs.items():
            if c:
                out = out + basis_function(idx, self.weight, self.lam).scale(c)
        return out

    def without_mean(self) -> "SpectralExpansion":
        zero = (0,) * self.weight.n
        return SpectralExpansion(self.weight, self.lam,
                                 {k: v for k, v in self.coeffs.items() if k != zero},
                                 self.dropped_mass)


def _coordinate_projection(alpha_i: float, kmax: int, nmax: int, lam: float) -> np.ndarray:
    """P[k, n] = E[x^k phi_n(x)] for one coordinate."""
    mom = _moments_1d(alpha_i, kmax + 2 * nmax + 2)
    out = np.zeros((kmax + 1, nmax + 1))
    for n in range(nmax + 1):
        c = factor_coefficients(n, alpha_i)
        for k in range(kmax + 1):
            out[k, n] = np.dot(c, mom[k: k + len(c)])
    # x^k phi_n(x / lam) under mu_lam equals lam^k E[y^k phi_n(y)]
    return out * (lam ** np.arange(kmax + 1))[:, None]


def expand(u: FuncSum, weight, lam: float = 1.0, cutoff: float | None = None) -> SpectralExpansion:
    """Eigen-expansion of u under mu_{A,lam}.

    Polynomial, Neumann-admissible u expands exactly into finitely many
    terms.  Otherwise a ``cutoff`` on the (lam = 1) eigenvalue is required
    and the L^2 mass beyond it is reported as ``dropped_mass``.
    """
    m = _as_measure(weight, lam)
    exact = u.is_polynomial() and is_neumann_admissible(u, m.weight)
    if not exact:
        if cutoff is None:
            raise ValueError("expansion is infinite (Gaussian envelope or odd powers in a "
                             "weighted coordinate); pass a cutoff for the truncated variant")
        coeffs = {}
        for idx in indices_up_to(m.weight, cutoff):
            c = inner(u, basis_function(idx, m.weight, m.lam), m, normalized=True)
            if c:
                coeffs[idx] = c
        total = inner(u, u, m, normalized=True)
        dropped = max(total - sum(c * c for c in coeffs.values()), 0.0)
        return SpectralExpansion(m.weight, m.lam, coeffs, dropped)
    if u.is_zero():
        return SpectralExpansion(m.weight, m.lam, {})
    comp = u.components[0]
    kmax = comp.exps.max(axis=0)
    nmax = [int(k // 2) if a > 0 else int(k) for k, a in zip(kmax, m.alpha)]
    proj = [_coordinate_projection(a, int(k), nm, m.lam) for a, k, nm in zip(m.alpha, kmax, nmax)]
    tensor = np.zeros([nm + 1 for nm in nmax])
    for row, c in zip(comp.exps, comp.coefs):
        term = functools.reduce(np.multiply.outer, [p[k] for p, k in zip(proj, row)])
        tensor += c * term
    coeffs = {tuple(int(i) for i in idx): float(tensor[idx])
              for idx in zip(*np.nonzero(tensor))}
    return SpectralExpansion(m.weight, m.lam, coeffs)


def poisson_solve(rhs: SpectralExpansion) -> SpectralExpansion:
    """Solve -L w = rhs with the constant mode of rhs projected out."""
    rhs = rhs.without_mean()
    coeffs = {idx: c / eigenvalue(idx, rhs.weight, rhs.lam) for idx, c in rhs.coeffs.items()}
    return SpectralExpansion(rhs.weight, rhs.lam, coeffs)


def _gram(funcs, measure) -> np.ndarray:
    k = len(funcs)
    out = np.empty((k, k))
    for i in range(k):
        for j in range(i, k):
            out[i, j] = out[j, i] = inner(funcs[i], funcs[j], measure, normalized=True)
    return out


def _monomial_gram(funcs, measure) -> np.ndarray:
    """Gram matrix of polynomial FuncSums via a shared monomial moment table."""
    n = measure.n
    rows = [c.exps for f in funcs for c in f.components]
    if not rows:
        return np.zeros((len(funcs), len(funcs)))
    mono = np.unique(np.vstack(rows), axis=0)
    index = {tuple(r): i for i, r in enumerate(mono)}
    coef = np.zeros((len(funcs), len(mono)))
    for a, f in enumerate(funcs):
        for comp in f.components:
            if comp.beta != 0:
                raise ValueError("monomial Gram needs polynomial inputs")
            for r, c in zip(comp.exps, comp.coefs):
                coef[a, index[tuple(r)]] += c
    pair = (mono[:, None, :] + mono[None, :, :]).reshape(-1, n)
    mom = np.ones(len(pair))
    for i, a in enumerate(measure.alpha):
        v = coordinate_moments(pair[:, i], a, measure.rate)
        mom *= v / coordinate_moments(np.array([0]), a, measure.rate)[0]
    g = mom.reshape(len(mono), len(mono))
    return coef @ g @ coef.T


def factor_gram(alpha_i: float, nmax: int) -> np.ndarray:
    """Gram matrix of the rounded 1-D factors 0..nmax, integrated in extended precision."""
    cs = [factor_coefficients(n, alpha_i) for n in range(nmax + 1)]
    with mpmath.workdps(_DPS):
        mom = [_mp_moment(k, alpha_i) for k in range(2 * max(len(c) for c in cs))]
        out = np.empty((nmax + 1, nmax + 1))
        for i, ci in enumerate(cs):
            for j, cj in enumerate(cs[: i + 1]):
                v = mpmath.fsum(mpmath.mpf(a) * mpmath.mpf(b) * mom[p + q]
                                for p, a in enumerate(ci) for q, b in enumerate(cj) if a and b)
                out[i, j] = out[j, i] = float(v)
    return out


def orthonormality_defect(weight, cutoff: float = DEFAULT_CUTOFF, precise: bool = True) -> float:
    """max |<phi_i, phi_j> - delta_ij| over the basis up to ``cutoff``.

    With ``precise`` the Gram matrix is assembled from per-coordinate Gram
    matrices evaluated in extended precision (integrals of products factorize).
    Otherwise it is evaluated in float64 from the multivariate basis functions,
    where cancellation at degree 12 costs a few units of 1e-12.
    """
    idxs = indices_up_to(weight, cutoff)
    if precise:
        nmax = np.max(np.array(idxs), axis=0)
        grams = [factor_gram(a, int(k)) for a, k in zip(weight.alpha, nmax)]
        g = np.array([[math.prod(gr[i, j] for gr, i, j in zip(grams, a, b)) for b in idxs]
                      for a in idxs])
    else:
        m = WeightedGaussianMeasure(weight, 1.0)
        g = _monomial_gram([basis_function(idx, weight) for idx in idxs], m)
    return float(np.max(np.abs(g - np.eye(len(idxs)))))


def rayleigh_gap(weight, cutoff: float = DEFAULT_CUTOFF, lam: float = 1.0) -> float:
    """min of E(u) / Var(u) over the span of non-constant basis functions.

    Energy and covariance matrices are assembled from exact integrals of the
    basis functions and their gradients (orthonormality is not assumed), then
    the generalized symmetric eigenproblem is solved.
    """
    if cutoff < 2:
        raise ValueError("cutoff must be >= 2")
    m = _as_measure(weight, lam)
    idxs = [i for i in indices_up_to(m.weight, cutoff) if any(i)]
    basis = [basis_function(idx, m.weight, m.lam) for idx in idxs]
    means = np.array([integrate(b, m, normalized=True) for b in basis])
    cov = _monomial_gram(basis, m) - np.outer(means, means)
    stiff = np.zeros_like(cov)
    for i in range(m.n):
        stiff += _monomial_gram([b.partial(i) for b in basis], m)
    try:
        vals = linalg.eigh(stiff, cov, eigvals_only=True)
    except linalg.LinAlgError as exc:
        raise linalg.LinAlgError(f"singular covariance matrix in Rayleigh problem: {exc}") from exc
    return float(vals[0])


def spectrum_rows(weight, cutoff: float = DEFAULT_CUTOFF, lam: float = 1.0) -> list:
    """[{"index": [...], "eigenvalue": ...}] for every index up to ``cutoff``."""
    return [{"index": list(idx), "eigenvalue": eigenvalue(idx, weight, lam)}
            for idx in indices_up_to(weight, cutoff)]


__all__ = [
    "SpectralExpansion", "apply_generator", "basis_function", "eigenvalue", "expand",
    "factor_coefficients", "indices_up_to", "raw_norm_sq", "factor_gram", "laguerre_norm_sq", "orthonormality_defect",
    "poisson_solve", "rayleigh_gap", "spectrum_rows", "multi_indices",
]
