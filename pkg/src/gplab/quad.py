"""Tensorized Gauss rules for monomial Gaussian measures.

Independent of the Gamma-moment path in :mod:`gplab.measure`: full-line rules
come from the probabilists' Hermite recurrence, half-line rules for the weight
``x^a exp(-x^2/2)`` on ``(0, inf)`` from recurrence coefficients computed in
extended precision (Chebyshev algorithm on mpmath moments).  Nodes and weights
are then obtained by Golub-Welsch.
"""

from __future__ import annotations

import functools
import itertools
import os
from dataclasses import dataclass

import mpmath
import numpy as np
from scipy.linalg import eigh_tridiagonal

DEFAULT_ORDER = 40
MAX_ORDER = 160


class QuadratureError(RuntimeError):
    pass


def default_order() -> int:
    """Quadrature order, overridable by the GPLAB_QUAD_ORDER env var."""
    raw = os.environ.get("GPLAB_QUAD_ORDER")
    if raw is None:
        return DEFAULT_ORDER
    order = int(raw)
    if order < 1:
        raise ValueError("GPLAB_QUAD_ORDER must be a positive integer")
    return order


@dataclass(frozen=True)
class QuadratureRule1D:
    nodes: np.ndarray
    weights: np.ndarray
    kind: str  # "full-line" or "half-line"
    alpha: float
    order: int

    def scaled(self, lam: float) -> "QuadratureRule1D":
        """Rule for x^alpha exp(-x^2 / (2 lam^2)): x -> lam x."""
        return QuadratureRule1D(self.nodes * lam, self.weights * lam ** (self.alpha + 1.0),
                                self.kind, self.alpha, self.order)

    def integrate(self, values) -> float:
        return float(np.dot(self.weights, values))


def _half_line_recurrence(alpha: float, n: int):
    """Monic recurrence coefficients for x^alpha exp(-x^2/2) on (0, inf)."""
    with mpmath.workdps(2 * n + 40):
        a = mpmath.mpf(alpha)
        mom = [mpmath.power(2, (l + a - 1) / 2) * mpmath.gamma((l + a + 1) / 2)
               for l in range(2 * n)]
        diag = [mpmath.mpf(0)] * n
        off = [mpmath.mpf(0)] * n
        diag[0] = mom[1] / mom[0]
        off[0] = mom[0]
        prev = [mpmath.mpf(0)] * (2 * n)
        cur = list(mom)
        for k in range(1, n):
            nxt = [mpmath.mpf(0)] * (2 * n)
            for l in range(k, 2 * n - k):
                nxt[l] = cur[l + 1] - diag[k - 1] * cur[l] - off[k - 1] * prev[l]
            if nxt[k] <= 0:
                raise QuadratureError(f"moment recurrence broke down at k={k}")
            diag[k] = nxt[k + 1] / nxt[k] - cur[k] / cur[k - 1]
            off[k] = nxt[k] / cur[k - 1]
            prev, cur = cur, nxt
        return (np.array([float(d) for d in diag]), np.array([float(b) for b in off]))


def _golub_welsch(diag: np.ndarray, off: np.ndarray, mu0: float):
    n = len(diag)
    if n == 1:
        return diag.copy(), np.array([mu0])
    try:
        nodes = eigh_tridiagonal(diag, np.sqrt(off[1:]), eigvals_only=True)
    except np.linalg.LinAlgError as exc:
        raise QuadratureError(f"tridiagonal eigensolver failed: {exc}") from exc
    # Christoffel numbers 1 / sum_j p_j(x)^2 from the orthonormal recurrence;
    # eigenvector components lose the tiny tail weights to round-off.
    sq = np.sqrt(off)
    p_prev = np.zeros(n)
    p = np.full(n, 1.0 / np.sqrt(mu0))
    total = p**2
    for k in range(n - 1):
        p_next = ((nodes - diag[k]) * p - (sq[k] if k else 0.0) * p_prev) / sq[k + 1]
        p_prev, p = p, p_next
        total = total + p**2
    return nodes, 1.0 / total


@functools.lru_cache(maxsize=None)
def _rule(kind: str, alpha: float, n: int) -> QuadratureRule1D:
    if kind == "full-line":
        diag = np.zeros(n)
        off = np.arange(n, dtype=float)
        mu0 = np.sqrt(2.0 * np.pi)
    elif kind == "half-line":
        diag, off = _half_line_recurrence(alpha, n)
        mu0 = off[0]
    else:
        raise ValueError(f"unknown rule kind {kind!r}")
    nodes, weights = _golub_welsch(diag, off, float(mu0))
    if kind == "full-line":
        # symmetrize against eigensolver round-off
        nodes = 0.5 * (nodes - nodes[::-1])
        weights = 0.5 * (weights + weights[::-1])
    if np.any(weights <= 0) or np.any(np.diff(nodes) <= 0):
        raise QuadratureError(f"degenerate {kind} rule for alpha={alpha}, n={n}")
    if kind == "half-line" and nodes[0] <= 0:
        raise QuadratureError("half-line rule produced a non-positive node")
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return QuadratureRule1D(nodes, weights, kind, float(alpha), n)


def build_rule(kind: str, alpha_i: float, n: int) -> QuadratureRule1D:
    """n-point Gauss rule for x^alpha_i exp(-x^2/2).

    ``kind`` is ``"full-line"`` (alpha_i must be 0, integrates over R) or
    ``"half-line"`` (integrates over (0, inf)).  Exact for x^k, k <= 2n - 1.
    """
    if n < 1:
        raise ValueError("rule order must be >= 1")
    if alpha_i < 0:
        raise ValueError("alpha_i must be >= 0")
    if kind == "full-line" and alpha_i != 0:
        raise ValueError("full-line rules carry no monomial weight")
    return _rule(kind, float(alpha_i), int(n))


def _rules_for(alpha, rate: float, orders):
    lam = rate ** -0.5
    rules = []
    for a, n in zip(alpha, orders):
        kind = "half-line" if a > 0 else "full-line"
        rules.append(build_rule(kind, a, n).scaled(lam))
    return rules


def resolve_orders(orders, n):
    """Per-coordinate orders from None (default), an int, or a sequence."""
    if orders is None:
        orders = default_order()
    if np.isscalar(orders):
        return (int(orders),) * n
    orders = tuple(int(o) for o in orders)
    if len(orders) != n:
        raise ValueError("need one quadrature order per coordinate")
    return orders


def tensor_grid(alpha, rate: float, orders):
    """Tensor-product nodes (M, N) and weights (M,) for x^A exp(-rate |x|^2 / 2)."""
    rules = _rules_for(alpha, rate, orders)
    nodes = np.array(list(itertools.product(*[r.nodes for r in rules])))
    weights = np.prod(np.array(list(itertools.product(*[r.weights for r in rules]))), axis=1)
    return nodes.reshape(-1, len(rules)), weights


def tensor_integrate(measure, f, orders=None, *, normalized: bool) -> float:
    """Tensor-product Gauss approximation of the integral of ``f`` against mu_{A,lam}.

    ``f`` maps an (M, N) array of points to M values.  Summation runs in
    node order, so results are reproducible bit-for-bit.
    """
    from .measure import normalization

    orders = resolve_orders(orders, measure.n)
    nodes, weights = tensor_grid(measure.alpha, measure.rate, orders)
    vals = np.asarray(f(nodes), dtype=float).reshape(-1)
    bad = ~np.isfinite(vals)
    if np.any(bad):
        raise QuadratureError(f"non-finite integrand at node {nodes[np.argmax(bad)].tolist()}")
    total = float(np.dot(weights, vals))
    return total / normalization(measure) if normalized else total


def adaptive_tensor_integrate(measure, f, *, normalized: bool, start: int | None = None,
                              rtol: float = 1e-10, max_order: int = MAX_ORDER):
    """Double the per-coordinate order until two estimates agree to ``rtol``.

    Returns ``(value, order, history)``.
    """
    order = start or default_order()
    prev = tensor_integrate(measure, f, order, normalized=normalized)
    history = [(order, prev)]
    while order * 2 <= max_order:
        order *= 2
        cur = tensor_integrate(measure, f, order, normalized=normalized)
        history.append((order, cur))
        if abs(cur - prev) <= rtol * max(abs(cur), 1e-300):
            return cur, order, history
        prev = cur
    return prev, order, history


def integrate_funcsum(f, target, orders=None, *, normalized: bool) -> float:
    """Quadrature integral of a FuncSum, one rule per envelope rate.

    Each component p exp(-beta |x|^2) is integrated with the Gauss rule for
    x^A exp(-(base + 2 beta)|x|^2 / 2), evaluating only the polynomial part
    at the nodes.  ``target`` is a measure or (raw ``x^A dx`` mode) a weight.
    """
    from .measure import MonomialWeight, normalization

    if isinstance(target, MonomialWeight):
        if normalized:
            raise ValueError("weight-only integration cannot be normalized")
        alpha, base = target.alpha, 0.0
    else:
        alpha, base = target.alpha, target.rate
    orders = resolve_orders(orders, len(alpha))
    total = 0.0
    for comp in f.components:
        rate = base + 2.0 * comp.beta
        if rate <= 0:
            raise ValueError("divergent integral")
        nodes, weights = tensor_grid(alpha, rate, orders)
        total += float(np.dot(weights, comp.polynomial_part().evaluate(nodes)))
    if normalized:
        total /= normalization(target)
    return total
