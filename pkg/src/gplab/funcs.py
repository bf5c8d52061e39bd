"""Sums of sparse polynomials times isotropic Gaussian envelopes.

A :class:`PolyGauss` is ``p(x) exp(-beta |x|^2)`` with ``p`` stored as an
array of exponent rows and a coefficient vector.  A :class:`FuncSum` is a
finite sum of such terms with distinct ``beta``.  The family is closed under
sums, products, partial derivatives, multiplication by coordinates and
dilation ``x -> s x``, and every integral against a monomial Gaussian measure
is a finite sum of Gamma moments (see :mod:`gplab.measure`).
"""

from __future__ import annotations

import itertools
import json
import numbers
from typing import Iterable, Sequence

import numpy as np


def _canonical(exps: np.ndarray, coefs: np.ndarray):
    if len(coefs) == 0:
        return exps.reshape(0, exps.shape[1]), coefs
    uniq, inv = np.unique(exps, axis=0, return_inverse=True)
    summed = np.bincount(inv.ravel(), weights=coefs, minlength=len(uniq))
    keep = summed != 0.0
    return uniq[keep], summed[keep]


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


class PolyGauss:
    """p(x) exp(-beta |x|^2) with p a sparse polynomial in n variables."""

    __slots__ = ("exps", "coefs", "beta")

    def __init__(self, exps, coefs, beta: float = 0.0, n: int | None = None):
        coefs = np.asarray(coefs, dtype=float).ravel()
        exps = np.asarray(exps, dtype=np.int64)
        if exps.size == 0:
            if n is None:
                raise ValueError("dimension is ambiguous for an empty polynomial")
            exps = exps.reshape(0, n)
        else:
            exps = exps.reshape(len(coefs), -1)
        if n is not None and exps.shape[1] != n:
            raise ValueError(f"exponent rows have length {exps.shape[1]}, expected {n}")
        if exps.shape[1] < 1:
            raise ValueError("need at least one coordinate")
        if np.any(exps < 0):
            raise ValueError("exponents must be non-negative")
        if not beta >= 0:
            raise ValueError(f"envelope rate must be >= 0, got {beta}")
        exps, coefs = _canonical(exps, coefs)
        self.exps = _frozen(exps)
        self.coefs = _frozen(coefs)
        self.beta = float(beta)

    @classmethod
    def from_terms(cls, terms: dict, beta: float = 0.0, n: int | None = None) -> "PolyGauss":
        keys = list(terms)
        if n is None and keys:
            n = len(keys[0])
        return cls(np.array(keys, dtype=np.int64).reshape(len(keys), n or 0),
                   [terms[k] for k in keys], beta, n)

    @property
    def n(self) -> int:
        return self.exps.shape[1]

    @property
    def terms(self) -> dict:
        return {tuple(int(k) for k in row): float(c) for row, c in zip(self.exps, self.coefs)}

    @property
    def degree(self) -> int:
        return int(self.exps.sum(axis=1).max()) if len(self.coefs) else 0

    def is_zero(self) -> bool:
        return len(self.coefs) == 0

    def __repr__(self):
        return f"PolyGauss({self.terms!r}, beta={self.beta})"

    def __eq__(self, other):
        if not isinstance(other, PolyGauss):
            return NotImplemented
        return (self.n == other.n and self.beta == other.beta
                and np.array_equal(self.exps, other.exps)
                and np.array_equal(self.coefs, other.coefs))

    def __hash__(self):
        return hash((self.beta, self.exps.tobytes(), self.coefs.tobytes()))

    def evaluate(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        pts = x.reshape(-1, self.n)
        if self.is_zero():
            vals = np.zeros(len(pts))
        else:
            # per-coordinate power tables, then gather
            mono = None
            for i in range(self.n):
                k = self.exps[:, i]
                kmax = int(k.max())
                if kmax == 0:
                    continue
                table = np.empty((len(pts), kmax + 1))
                table[:, 0] = 1.0
                for j in range(1, kmax + 1):
                    table[:, j] = table[:, j - 1] * pts[:, i]
                col = table[:, k]
                mono = col if mono is None else mono * col
            vals = mono @ self.coefs if mono is not None else np.full(len(pts), self.coefs.sum())
            if self.beta:
                vals = vals * np.exp(-self.beta * np.sum(pts**2, axis=1))
        return vals.reshape(x.shape[:-1])

    def polynomial_part(self) -> "PolyGauss":
        return PolyGauss(self.exps, self.coefs, 0.0, self.n)

    def scale(self, c: float) -> "PolyGauss":
        return PolyGauss(self.exps, self.coefs * c, self.beta, self.n)

    def multiply(self, other: "PolyGauss") -> "PolyGauss":
        exps = (self.exps[:, None, :] + other.exps[None, :, :]).reshape(-1, self.n)
        coefs = np.outer(self.coefs, other.coefs).ravel()
        return PolyGauss(exps, coefs, self.beta + other.beta, self.n)

    def times_coordinate(self, i: int, power: int = 1) -> "PolyGauss":
        exps = self.exps.copy()
        exps[:, i] += power
        return PolyGauss(exps, self.coefs, self.beta, self.n)

    def divide_by_coordinate(self, i: int) -> "PolyGauss":
        """Exact division of the polynomial part by x_i."""
        if np.any(self.exps[:, i] == 0):
            raise ValueError(f"polynomial is not divisible by x_{i + 1}")
        exps = self.exps.copy()
        exps[:, i] -= 1
        return PolyGauss(exps, self.coefs, self.beta, self.n)

    def partial(self, i: int) -> "PolyGauss":
        """d/dx_i of p exp(-beta|x|^2) = (d_i p - 2 beta x_i p) exp(-beta|x|^2)."""
        k = self.exps[:, i]
        live = k > 0
        dexps = self.exps[live].copy()
        dexps[:, i] -= 1
        dcoefs = self.coefs[live] * k[live]
        if self.beta:
            xexps = self.exps.copy()
            xexps[:, i] += 1
            dexps = np.vstack([dexps, xexps])
            dcoefs = np.concatenate([dcoefs, -2.0 * self.beta * self.coefs])
        return PolyGauss(dexps, dcoefs, self.beta, self.n)

    def dilate(self, s: float) -> "PolyGauss":
        """x -> p(s x) exp(-beta s^2 |x|^2)."""
        deg = self.exps.sum(axis=1)
        return PolyGauss(self.exps, self.coefs * float(s) ** deg, self.beta * s * s, self.n)

    def to_json(self) -> dict:
        return {"beta": self.beta,
                "terms": [{"exp": [int(k) for k in row], "coef": float(c)}
                          for row, c in zip(self.exps, self.coefs)]}

    @classmethod
    def from_json(cls, obj: dict, n: int | None = None) -> "PolyGauss":
        if not isinstance(obj, dict) or set(obj) - {"beta", "terms"}:
            raise ValueError(f"expected {{'beta', 'terms'}}, got {obj!r:.80}")
        terms = obj.get("terms", [])
        if any(not isinstance(t, dict) or set(t) != {"exp", "coef"} for t in terms):
            raise ValueError("each term needs exactly 'exp' and 'coef'")
        if n is None:
            if not terms:
                raise ValueError("cannot infer dimension from an empty term list")
            n = len(terms[0]["exp"])
        exps = np.array([t["exp"] for t in terms], dtype=np.int64).reshape(len(terms), n)
        return cls(exps, [float(t["coef"]) for t in terms], float(obj.get("beta", 0.0)), n)


class FuncSum:
    """Finite sum of PolyGauss components with pairwise distinct rates.

    Supports ``+``, ``-``, ``*`` (with scalars or other FuncSums) and calling
    on an array of points of shape ``(..., n)``.
    """

    __slots__ = ("components", "n")

    def __init__(self, components: Iterable[PolyGauss] = (), n: int | None = None):
        comps = list(components)
        if n is None:
            if not comps:
                raise ValueError("dimension is ambiguous for an empty FuncSum")
            n = comps[0].n
        by_beta: dict = {}
        for c in comps:
            if c.n != n:
                raise ValueError("components have mismatched dimensions")
            by_beta.setdefault(c.beta, []).append(c)
        merged = []
        for beta in sorted(by_beta):
            group = by_beta[beta]
            if len(group) == 1:
                pg = group[0]
            else:
                pg = PolyGauss(np.vstack([g.exps for g in group]),
                               np.concatenate([g.coefs for g in group]), beta, n)
            if not pg.is_zero():
                merged.append(pg)
        self.components = tuple(merged)
        self.n = int(n)

    # constructors

    @classmethod
    def zero(cls, n: int) -> "FuncSum":
        return cls((), n)

    @classmethod
    def constant(cls, c: float, n: int) -> "FuncSum":
        return cls([PolyGauss(np.zeros((1, n), dtype=np.int64), [c], 0.0, n)], n)

    @classmethod
    def monomial(cls, exp: Sequence[int], coef: float = 1.0, beta: float = 0.0) -> "FuncSum":
        exp = list(exp)
        return cls([PolyGauss([exp], [coef], beta, len(exp))], len(exp))

    @classmethod
    def coordinate(cls, i: int, n: int, beta: float = 0.0) -> "FuncSum":
        exp = [0] * n
        exp[i] = 1
        return cls.monomial(exp, 1.0, beta)

    @classmethod
    def gaussian(cls, c: float, beta: float, n: int) -> "FuncSum":
        return cls.monomial([0] * n, c, beta)

    @classmethod
    def from_terms(cls, terms: dict, beta: float = 0.0, n: int | None = None) -> "FuncSum":
        pg = PolyGauss.from_terms(terms, beta, n)
        return cls([pg], pg.n)

    # structure

    def __repr__(self):
        return f"FuncSum({list(self.components)!r}, n={self.n})"

    def __eq__(self, other):
        if isinstance(other, numbers.Real):
            other = FuncSum.constant(float(other), self.n)
        if not isinstance(other, FuncSum):
            return NotImplemented
        return self.n == other.n and self.components == other.components

    def __hash__(self):
        return hash((self.n, self.components))

    def allclose(self, other: "FuncSum", rtol: float = 1e-12, atol: float = 1e-12) -> bool:
        """Coefficient-wise comparison of canonical forms."""
        diff = self - other
        ref = max([1.0] + [float(np.max(np.abs(c.coefs))) for c in (self.components + other.components)])
        return all(np.all(np.abs(c.coefs) <= atol + rtol * ref) for c in diff.components)

    @property
    def betas(self) -> tuple:
        return tuple(c.beta for c in self.components)

    def is_zero(self) -> bool:
        return not self.components

    def is_polynomial(self) -> bool:
        return all(c.beta == 0 for c in self.components)

    @property
    def degree(self) -> int:
        return max((c.degree for c in self.components), default=0)

    def canonical(self) -> "FuncSum":
        return FuncSum(self.components, self.n)

    # algebra

    def _coerce(self, other) -> "FuncSum":
        if isinstance(other, FuncSum):
            if other.n != self.n:
                raise ValueError(f"dimension mismatch: {self.n} vs {other.n}")
            return other
        if isinstance(other, PolyGauss):
            return FuncSum([other], self.n)
        if isinstance(other, numbers.Real):
            return FuncSum.constant(float(other), self.n)
        raise TypeError(f"cannot combine FuncSum with {type(other).__name__}")

    def __add__(self, other):
        other = self._coerce(other)
        return FuncSum(self.components + other.components, self.n)

    __radd__ = __add__

    def __neg__(self):
        return self.scale(-1.0)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def scale(self, c: float) -> "FuncSum":
        if c == 0:
            return FuncSum.zero(self.n)
        return FuncSum([p.scale(c) for p in self.components], self.n)

    def __mul__(self, other):
        if isinstance(other, numbers.Real):
            return self.scale(float(other))
        other = self._coerce(other)
        return FuncSum([a.multiply(b) for a in self.components for b in other.components], self.n)

    __rmul__ = __mul__

    def __truediv__(self, c):
        return self.scale(1.0 / float(c))

    def __pow__(self, k: int):
        if int(k) != k or k < 0:
            raise ValueError("only non-negative integer powers are supported")
        out = FuncSum.constant(1.0, self.n)
        for _ in range(int(k)):
            out = out * self
        return out

    # calculus

    def partial(self, i: int) -> "FuncSum":
        return FuncSum([c.partial(i) for c in self.components], self.n)

    def gradient(self) -> list:
        return [self.partial(i) for i in range(self.n)]

    def hessian(self) -> list:
        grad = self.gradient()
        return [[grad[i].partial(j) for j in range(self.n)] for i in range(self.n)]

    def laplacian(self) -> "FuncSum":
        return sum((self.partial(i).partial(i) for i in range(self.n)), FuncSum.zero(self.n))

    def times_coordinate(self, i: int, power: int = 1) -> "FuncSum":
        return FuncSum([c.times_coordinate(i, power) for c in self.components], self.n)

    def divide_by_coordinate(self, i: int) -> "FuncSum":
        return FuncSum([c.divide_by_coordinate(i) for c in self.components], self.n)

    def radial_multiply(self) -> list:
        """The vector field x * f, as a list of FuncSums."""
        return [self.times_coordinate(i) for i in range(self.n)]

    def dilate(self, s: float) -> "FuncSum":
        """The function x -> f(s x)."""
        return FuncSum([c.dilate(s) for c in self.components], self.n)

    def times_gaussian(self, beta: float) -> "FuncSum":
        """f(x) exp(-beta |x|^2); beta may be negative if every rate stays >= 0."""
        return FuncSum([PolyGauss(c.exps, c.coefs, c.beta + beta, self.n) for c in self.components],
                       self.n)

    def evaluate(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape[:-1])
        for c in self.components:
            out = out + c.evaluate(x)
        return out

    __call__ = evaluate

    # serialization

    def to_json(self) -> list:
        return [c.to_json() for c in self.components]

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    @classmethod
    def from_json(cls, obj, n: int | None = None) -> "FuncSum":
        if isinstance(obj, str):
            obj = json.loads(obj)
        if isinstance(obj, dict):
            obj = [obj]
        comps = [PolyGauss.from_json(o, n) for o in obj if o.get("terms") or n is not None]
        if not comps:
            if n is None:
                raise ValueError("cannot infer dimension of an empty function")
            return cls.zero(n)
        return cls(comps, n if n is not None else comps[0].n)


# free-function spellings of the ring and calculus operations

def add(f: FuncSum, g: FuncSum) -> FuncSum:
    return f + g


def scale(f: FuncSum, c: float) -> FuncSum:
    return f.scale(c)


def multiply(f: FuncSum, g: FuncSum) -> FuncSum:
    return f * g


def gradient(f: FuncSum) -> list:
    return f.gradient()


def hessian(f: FuncSum) -> list:
    return f.hessian()


def dot(fs: Sequence[FuncSum], gs: Sequence[FuncSum]) -> FuncSum:
    """Pointwise inner product of two vector fields."""
    if len(fs) != len(gs):
        raise ValueError("vector fields have different lengths")
    out = FuncSum.zero(fs[0].n)
    for a, b in zip(fs, gs):
        out = out + a * b
    return out


def linear(coefs: Sequence[float], const: float = 0.0) -> FuncSum:
    """const + sum_i coefs[i] x_i."""
    n = len(coefs)
    terms = {tuple([0] * n): float(const)}
    for i, c in enumerate(coefs):
        e = [0] * n
        e[i] = 1
        terms[tuple(e)] = float(c)
    return FuncSum.from_terms(terms, 0.0, n)


def is_neumann_admissible(f: FuncSum, weight) -> bool:
    """Even exponents in every weighted coordinate.

    Then d_i f vanishes on {x_i = 0} and d_i f / x_i stays in the family.
    """
    for i, a in enumerate(weight.alpha):
        if a > 0 and any(np.any(c.exps[:, i] % 2) for c in f.components):
            return False
    return True


def multi_indices(n: int, max_degree: int, even_mask: Sequence[bool] = ()) -> list:
    """All exponent tuples of total degree <= max_degree, graded then lexicographic."""
    even_mask = tuple(even_mask) or (False,) * n
    out = []
    for deg in range(max_degree + 1):
        for idx in itertools.product(range(deg + 1), repeat=n):
            if sum(idx) != deg:
                continue
            if any(m and k % 2 for m, k in zip(even_mask, idx)):
                continue
            out.append(idx)
    return out


def random_polygauss(rng: np.random.Generator, weight, degree: int = 6,
                     beta: float | None = None, beta_range=(0.1, 2.0)) -> FuncSum:
    """A random Neumann-admissible PolyGauss.

    Coefficients are uniform in [-1, 1] over every multi-index of total
    degree <= ``degree`` (even exponents in weighted coordinates).  The rate
    is log-uniform in ``beta_range`` unless ``beta`` is given (``beta=0``
    yields a polynomial).
    """
    idx = multi_indices(weight.n, degree, weight.weighted)
    coefs = rng.uniform(-1.0, 1.0, size=len(idx))
    if beta is None:
        lo, hi = beta_range
        beta = float(np.exp(rng.uniform(np.log(lo), np.log(hi))))
    return FuncSum([PolyGauss(np.array(idx, dtype=np.int64), coefs, beta, weight.n)], weight.n)
