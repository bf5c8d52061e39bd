"""Distances to Gaussian and affine-Gaussian profiles, and the stability margins.

For a fixed width lam the best profile c g or (c + d.x) g, with
g = exp(-|x|^2 / (2 lam^2)), solves a small linear least-squares problem in
L^2(x^A dx).  All the inner products it needs are sums of Gamma moments with
a lam-dependent rate, so they are precomputed once per function as
(constant, power) pairs and evaluated for many lam at once.  The outer
minimization over lam is a log-spaced scan followed by golden-section
refinement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import linalg

from .funcs import FuncSum
from .functionals import Margin, hup_deltas, hup_integrals
from .measure import MonomialWeight, effective_dimension, half_line_constant, inner

SCAN_POINTS = 64
SCAN_SPAN = 32.0
LAMBDA_RTOL = 1e-10
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0

MODES = ("E", "F", "d2")


@dataclass
class ProfileFit:
    c: float
    d: Optional[np.ndarray]
    lam: float
    distance_sq: float
    scan: Optional[tuple] = field(default=None, repr=False)

    def to_json(self, with_scan: bool = False) -> dict:
        out = {"c": self.c, "d": None if self.d is None else [float(v) for v in self.d],
               "lambda": self.lam, "distance_sq": self.distance_sq}
        if with_scan and self.scan is not None:
            out["scan"] = {"lambda": [float(v) for v in self.scan[0]],
                           "distance_sq": [float(v) for v in self.scan[1]]}
        return out


def _coord_const(k, alpha_i: float) -> np.ndarray:
    """Integral of x^(k + alpha_i) exp(-x^2 / 2) over the coordinate's domain."""
    k = np.asarray(k)
    v = half_line_constant(k + alpha_i)
    if alpha_i > 0:
        return v
    return np.where(k % 2 == 1, 0.0, 2.0 * v)


class ProfileKernel:
    """lam -> Gram matrix and projections of u onto {g, x_1 g, ..., x_N g}."""

    def __init__(self, u: FuncSum, weight: MonomialWeight):
        if u.is_zero():
            raise ValueError("u must be non-zero")
        if any(c.beta <= 0 for c in u.components):
            raise ValueError("every component needs a Gaussian envelope (beta > 0)")
        if u.n != weight.n:
            raise ValueError("dimension mismatch between u and the weight")
        self.u = u
        self.weight = weight
        self.n = weight.n
        n = self.n
        asum = sum(weight.alpha)
        shifts = [np.zeros(n, dtype=np.int64)] + [np.eye(n, dtype=np.int64)[i] for i in range(n)]
        # projection of component c onto x^e g: sum_t C_t s^(-p_t), s = 2 beta_c + 1 / lam^2
        self.terms = []
        for comp in u.components:
            consts, powers = [], []
            for e in shifts:
                ks = comp.exps + e
                cst = comp.coefs.copy()
                for i, a in enumerate(weight.alpha):
                    cst = cst * _coord_const(ks[:, i], a)
                consts.append(cst)
                powers.append((ks.sum(axis=1) + asum + n) / 2.0)
            self.terms.append((2.0 * comp.beta, np.array(consts), np.array(powers)))
        # Gram of x^e g, x^e' g: K(e + e') (2 / lam^2)^(-(|e + e'| + sum alpha + N) / 2)
        self.gram_const = np.empty((n + 1, n + 1))
        self.gram_power = np.empty((n + 1, n + 1))
        for a, ea in enumerate(shifts):
            for b, eb in enumerate(shifts):
                k = ea + eb
                self.gram_const[a, b] = math.prod(float(_coord_const(k[i], w))
                                                  for i, w in enumerate(weight.alpha))
                self.gram_power[a, b] = (k.sum() + asum + n) / 2.0
        self.norm_sq = inner(u, u, weight, normalized=False)

    def projections(self, lams) -> np.ndarray:
        """(L, N+1) array of integrals of u x^e g_lam x^A."""
        lams = np.atleast_1d(np.asarray(lams, dtype=float))
        out = np.zeros((len(lams), self.n + 1))
        for two_beta, consts, powers in self.terms:
            s = two_beta + 1.0 / lams**2
            logs = np.log(s)
            # (L, E, T) contributions
            out += np.einsum("et,let->le", consts, np.exp(-powers[None, :, :] * logs[:, None, None]))
        return out

    def gram(self, lams) -> np.ndarray:
        lams = np.atleast_1d(np.asarray(lams, dtype=float))
        s = 2.0 / lams**2
        return self.gram_const[None] * np.exp(-self.gram_power[None] * np.log(s)[:, None, None])

    def natural_scale(self) -> float:
        """lam_0 = (integral |x|^2 u^2 x^A / (D integral u^2 x^A))^(1/2)."""
        _, mm, l2 = hup_integrals(self.u, self.weight)
        return math.sqrt(mm / (effective_dimension(self.weight) * l2))

    def solve(self, lams, mode: str):
        """(distance_sq, theta) for each lam; theta = (c, d_1, ..., d_N)."""
        r = self.projections(lams)
        g = self.gram(lams)
        nl = len(r)
        theta = np.zeros_like(r)
        if mode == "E":
            theta[:, 0] = r[:, 0] / g[:, 0, 0]
            val = self.norm_sq - r[:, 0] * theta[:, 0]
        elif mode == "F":
            theta = _spd_solve(g, r)
            val = self.norm_sq - np.einsum("li,li->l", r, theta)
        elif mode == "d2":
            h = g.copy()
            h[:, 0, 0] += g[:, 0, 0]
            b = r.copy()
            b[:, 0] += r[:, 0]
            theta = _spd_solve(h, b)
            val = 2.0 * self.norm_sq - np.einsum("li,li->l", b, theta)
        else:
            raise ValueError(f"unknown profile mode {mode!r}")
        assert theta.shape == (nl, self.n + 1)
        return np.maximum(val, 0.0), theta


def _spd_solve(g: np.ndarray, r: np.ndarray) -> np.ndarray:
    out = np.empty_like(r)
    for k in range(len(r)):
        try:
            out[k] = linalg.cho_solve(linalg.cho_factor(g[k]), r[k])
        except linalg.LinAlgError as exc:
            raise linalg.LinAlgError(f"profile Gram matrix is not positive definite: {exc}") from exc
    return out


def _fit(kernel: ProfileKernel, lam: float, mode: str, scan=None) -> ProfileFit:
    val, theta = kernel.solve([lam], mode)
    d = None if mode == "E" else theta[0, 1:].copy()
    return ProfileFit(float(theta[0, 0]), d, float(lam), float(val[0]), scan)


def project_profile(u: FuncSum, weight: MonomialWeight, lam: float, with_linear: bool = False) -> ProfileFit:
    """Best c g_lam (or (c + d.x) g_lam) in L^2(x^A dx) at fixed lam."""
    if not lam > 0:
        raise ValueError("lambda must be positive")
    return _fit(ProfileKernel(u, weight), lam, "F" if with_linear else "E")


def profile_objective(u: FuncSum, weight: MonomialWeight, c: float, d, lam: float,
                      mode: str = "E") -> float:
    """The profile-distance quadratic evaluated directly from residual functions."""
    n = weight.n
    g_beta = 1.0 / (2.0 * lam**2)
    prof_c = FuncSum.gaussian(c, g_beta, n)
    res_c = u - prof_c
    if mode == "E":
        return inner(res_c, res_c, weight, normalized=False)
    res_f = res_c
    for i, di in enumerate(d):
        res_f = res_f - FuncSum.coordinate(i, n, g_beta).scale(di)
    if mode == "F":
        return inner(res_f, res_f, weight, normalized=False)
    if mode == "d2":
        return inner(res_c, res_c, weight, normalized=False) + inner(res_f, res_f, weight, normalized=False)
    raise ValueError(f"unknown profile mode {mode!r}")


def _golden(f, a: float, b: float, tol: float):
    """Minimize f on [a, b] by golden-section search; returns (x, f(x))."""
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    return (c, fc) if fc <= fd else (d, fd)


def minimize_over_lambda(kernel: ProfileKernel, mode: str, keep_scan: bool = False) -> ProfileFit:
    """Log-spaced scan over [lam_0 / 32, 32 lam_0] then golden-section in log lam."""
    lam0 = kernel.natural_scale()
    t = np.linspace(math.log(lam0 / SCAN_SPAN), math.log(lam0 * SCAN_SPAN), SCAN_POINTS)
    vals, _ = kernel.solve(np.exp(t), mode)
    j = int(np.argmin(vals))
    lo, hi = t[max(j - 1, 0)], t[min(j + 1, len(t) - 1)]

    def f(tt):
        return float(kernel.solve([math.exp(tt)], mode)[0][0])

    # golden section on log lam; 1e-10 in log lam is 1e-10 relative in lam
    tbest, fbest = _golden(f, lo, hi, LAMBDA_RTOL)
    if vals[j] < fbest:
        tbest = t[j]
    scan = (np.exp(t), vals) if keep_scan else None
    return _fit(kernel, math.exp(tbest), mode, scan)


def dist_to_E(u: FuncSum, weight: MonomialWeight, keep_scan: bool = False) -> ProfileFit:
    """d_A(u, E)^2 with its optimal (c, lam)."""
    return minimize_over_lambda(ProfileKernel(u, weight), "E", keep_scan)


def dist_to_F(u: FuncSum, weight: MonomialWeight, keep_scan: bool = False) -> ProfileFit:
    """Squared distance to affine-Gaussian profiles (c + d.x) g_lam."""
    return minimize_over_lambda(ProfileKernel(u, weight), "F", keep_scan)


def dist_d2(u: FuncSum, weight: MonomialWeight | None = None, keep_scan: bool = False) -> ProfileFit:
    """Combined classical distance: |u - c g|^2 + |u - (c + d.x) g|^2 over R^N."""
    if weight is not None and not weight.is_zero():
        raise ValueError("the combined distance is defined for the classical case only")
    return minimize_over_lambda(ProfileKernel(u, MonomialWeight.zero(u.n)), "d2", keep_scan)


@dataclass
class StabilityReport:
    alpha: list
    function: list
    delta_A: float
    delta_1: float
    delta_2: float
    lambda_star: float
    norm_sq: float
    fits: dict
    margins: dict

    def to_json(self, with_scan: bool = False) -> dict:
        return {
            "alpha": self.alpha, "function": self.function,
            "delta_A": self.delta_A, "delta_1": self.delta_1, "delta_2": self.delta_2,
            "lambda_star": self.lambda_star, "norm_sq": self.norm_sq,
            "fits": {k: v.to_json(with_scan) for k, v in self.fits.items()},
            "margins": {k: {"lhs": m.lhs, "rhs": m.rhs, "margin": m.margin}
                        for k, m in self.margins.items()},
        }


def stability_margins(u: FuncSum, weight: MonomialWeight, keep_scan: bool = False) -> StabilityReport:
    """All uncertainty deficits, profile distances and stability margins of u.

    Margins (each lhs >= rhs):
      t11        delta_A >= d_A^2
      t6         delta_A - d_A^2 >= 1/2 d~_A^2
      t7         delta_1 >= d_2^2
      t7-split   delta_1 - d_1(E)^2 >= d_1(F)^2
      delta2     delta_2 >= N |u|^2 d_1^2 + d_1^4
    """
    da, d1, d2, lam_star = hup_deltas(u, weight)
    kern = ProfileKernel(u, weight)
    fits = {"E_A": minimize_over_lambda(kern, "E", keep_scan),
            "F_A": minimize_over_lambda(kern, "F", keep_scan)}
    zero = MonomialWeight.zero(weight.n)
    kern0 = kern if weight.is_zero() else ProfileKernel(u, zero)
    if weight.is_zero():
        fits["E_1"], fits["F_1"] = fits["E_A"], fits["F_A"]
    else:
        fits["E_1"] = minimize_over_lambda(kern0, "E", keep_scan)
        fits["F_1"] = minimize_over_lambda(kern0, "F", keep_scan)
    fits["d2"] = minimize_over_lambda(kern0, "d2", keep_scan)
    da2, fa2 = fits["E_A"].distance_sq, fits["F_A"].distance_sq
    e1, f1 = fits["E_1"].distance_sq, fits["F_1"].distance_sq
    l2 = kern0.norm_sq
    margins = {
        "t11": Margin(da, da2),
        "t6": Margin(da - da2, 0.5 * fa2),
        "t7": Margin(d1, fits["d2"].distance_sq),
        "t7-split": Margin(d1 - e1, f1),
        "delta2": Margin(d2, weight.n * l2 * e1 + e1 * e1),
    }
    return StabilityReport(list(weight.alpha), u.to_json(), da, d1, d2, lam_star, l2, fits, margins)


def stability_report(u: FuncSum, weight: MonomialWeight, keep_scan: bool = False) -> dict:
    """Deficits, fits and margins as a JSON-ready dict."""
    return stability_margins(u, weight, keep_scan).to_json(keep_scan)
