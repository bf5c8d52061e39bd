"""Randomized margin suite and the reproducible equality cases."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import __version__
from .funcs import FuncSum, is_neumann_admissible, random_polygauss
from .functionals import (dirichlet_energy, hup_identity_sides, p1_rhs, p2_chain,
                          p2_chain_spectral, poincare_deficit, t2_rhs, t4_rhs, t5_fit,
                          variance)
from .measure import MonomialWeight, WeightedGaussianMeasure
from .spectral import basis_function
from .stability import dist_to_E, stability_margins

IDENTITY_RTOL = 1e-9
EQUALITY_RTOL = 1e-8
LAMBDA_RANGE = (0.5, 2.0)

STATEMENTS = {
    "t1": "E(u) >= Var(u) under mu_A",
    "t2": "E(u) - Var(u) >= 1/2 |grad u - Cov(u,x)|^2 under mu_A",
    "p1": "1/2 |grad u - Cov(u,x)|^2 >= 1/2 Var(u - Cov(u,x).x) under mu_A",
    "t3": "E(u) >= Var(u) / lam^2 under mu_{A,lam}",
    "t4": "E(u) >= (1/lam^2) inf |u-c|^2 + 1/2 |u-c-d.(x-m)|^2 under mu_{A,lam}",
    "t5": "E(u) >= (1/lam^2) inf |u-c|^2 + |u-c-d.x|^2 under mu_lam (alpha = 0)",
    "p2-mid": "E(u) - Var(u) >= 1/2 |grad u - Cov(u,x)|^2 under mu_0 (alpha = 0)",
    "p2-rhs": "1/2 |grad u - Cov(u,x)|^2 >= |u - mean - Cov(u,x).x|^2 under mu_0 (alpha = 0)",
    "p0": "delta_A(u) = (lam*^2/2) int |grad u + x u / lam*^2|^2 x^A dx (identity)",
    "t11": "delta_A(u) >= d_A(u, E)^2",
    "t6": "delta_A(u) - d_A(u, E)^2 >= 1/2 d_A(u, F)^2",
    "t7": "delta_1(u) >= d_2(u, F)^2",
    "t7-split": "delta_1(u) - d_1(u, E)^2 >= d_1(u, F)^2",
    "delta2": "delta_2(u) >= N |u|^2 d_1(u, E)^2 + d_1(u, E)^4",
}


@dataclass
class Record:
    theorem: str
    lhs: float
    rhs: float
    function_id: int

    @property
    def margin(self) -> float:
        return self.lhs - self.rhs

    @property
    def scale(self) -> float:
        return max(abs(self.lhs), abs(self.rhs), 1.0)

    def holds(self, rtol: float = 1e-9) -> bool:
        return self.margin >= -rtol * self.scale


@dataclass
class SuiteConfig:
    alpha: tuple
    lam: Optional[float] = None
    trials: int = 100
    seed: int = 0
    degree: int = 6
    quad_order: Optional[int] = None
    func: Optional[FuncSum] = None

    def to_json(self) -> dict:
        return {"alpha": list(self.alpha), "lambda": self.lam, "trials": self.trials,
                "seed": self.seed, "degree": self.degree, "quad_order": self.quad_order,
                "func": None if self.func is None else self.func.to_json()}


def function_margins(u: FuncSum, weight: MonomialWeight, lam: float, fid: int = 0,
                     quad_order=None) -> list:
    """Every applicable margin for one function, as Records (order is fixed)."""
    out = []
    m1 = WeightedGaussianMeasure(weight, 1.0)
    ml = WeightedGaussianMeasure(weight, lam)
    classical = weight.is_zero()
    if is_neumann_admissible(u, weight):
        energy, var = dirichlet_energy(u, m1), variance(u, m1)
        t2 = t2_rhs(u, m1)
        out.append(Record("t1", energy, var, fid))
        out.append(Record("t2", energy - var, t2, fid))
        out.append(Record("p1", t2, p1_rhs(u, m1), fid))
        energy_l = dirichlet_energy(u, ml)
        out.append(Record("t3", energy_l, variance(u, ml) / lam**2, fid))
        out.append(Record("t4", energy_l, t4_rhs(u, ml), fid))
        if classical:
            out.append(Record("t5", energy_l, t5_fit(u, lam).value / lam**2, fid))
            deficit, mid, rhs = p2_chain(u, 1.0)
            out.append(Record("p2-mid", deficit, mid, fid))
            out.append(Record("p2-rhs", mid, rhs, fid))
    if not u.is_zero() and all(c.beta > 0 for c in u.components):
        lhs, rhs, _ = hup_identity_sides(u, weight, "quadrature", quad_order)
        out.append(Record("p0", lhs, rhs, fid))
        rep = stability_margins(u, weight)
        for name, mg in rep.margins.items():
            out.append(Record(name, mg.lhs, mg.rhs, fid))
    return out


def _record_ok(rec: Record) -> bool:
    if rec.theorem == "p0":
        return abs(rec.margin) <= IDENTITY_RTOL * rec.scale
    return rec.holds()


def run_suite(config: SuiteConfig):
    """Run the suite; returns (report dict, list of Records)."""
    weight = MonomialWeight(config.alpha)
    rng = np.random.default_rng(config.seed)
    records, functions = [], []
    for fid in range(config.trials):
        if config.func is not None:
            u = config.func
        else:
            u = random_polygauss(rng, weight, config.degree)
        if config.lam is not None:
            lam = float(config.lam)
        else:
            lo, hi = LAMBDA_RANGE
            lam = float(math.exp(rng.uniform(math.log(lo), math.log(hi))))
        functions.append((u, lam))
        records.extend(function_margins(u, weight, lam, fid, config.quad_order))
    theorems = {}
    violations = []
    for rec in records:
        t = theorems.setdefault(rec.theorem, {"statement": STATEMENTS[rec.theorem], "count": 0,
                                              "min_margin": math.inf, "min_relative_margin": math.inf,
                                              "worst_function_id": None, "passed": True})
        t["count"] += 1
        t["min_margin"] = min(t["min_margin"], rec.margin)
        rel = rec.margin / rec.scale
        if rec.theorem == "p0":
            rel = -abs(rel)
        if rel < t["min_relative_margin"]:
            t["min_relative_margin"] = rel
            t["worst_function_id"] = rec.function_id
        if not _record_ok(rec):
            t["passed"] = False
            u, lam = functions[rec.function_id]
            violations.append({"theorem": rec.theorem, "function_id": rec.function_id,
                               "lambda": lam, "lhs": rec.lhs, "rhs": rec.rhs,
                               "function": u.to_json()})
    report = {
        "gplab_version": __version__,
        "command": "verify",
        "config": config.to_json(),
        "passed": not violations,
        "theorems": {k: theorems[k] for k in STATEMENTS if k in theorems},
        "violations": violations,
    }
    return report, records


# reproducible equality cases

def _case(statement: str, lhs: float, rhs: float, equality: bool = True, **extra) -> dict:
    diff = abs(lhs - rhs)
    scale = max(abs(lhs), abs(rhs), 1.0)
    out = {"statement": statement, "lhs": lhs, "rhs": rhs, "abs_difference": diff,
           "equality": equality}
    out["passed"] = diff <= EQUALITY_RTOL * scale if equality else lhs - rhs >= -1e-9 * scale
    out.update(extra)
    return out


def case_t1_equality() -> dict:
    w = MonomialWeight((1.0, 0.0))
    u = FuncSum.from_terms({(0, 0): 3.0, (0, 1): 2.0})
    m = WeightedGaussianMeasure(w)
    return _case("energy = variance for u = 3 + 2 x_2, alpha = (1, 0)",
                 dirichlet_energy(u, m), variance(u, m), function=u.to_json(), alpha=list(w.alpha))


def case_t2_equality() -> dict:
    w = MonomialWeight((1.0, 0.0))
    u = FuncSum.from_terms({(0, 2): 1.0, (0, 0): -1.0})
    m = WeightedGaussianMeasure(w)
    return _case("Poincare deficit = 1/2 |grad u - Cov(u,x)|^2 for u = x_2^2 - 1, alpha = (1, 0)",
                 poincare_deficit(u, m), t2_rhs(u, m), function=u.to_json(), alpha=list(w.alpha))


def case_t5_extremizer(lam: float = 1.5, a=(1.0, 1.0)) -> dict:
    n = len(a)
    terms = {}
    for i, ai in enumerate(a):
        e = [0] * n
        e[i] = 2
        terms[tuple(e)] = ai
    terms[(0,) * n] = -lam**2 * sum(a)
    u = FuncSum.from_terms(terms)
    m = WeightedGaussianMeasure(MonomialWeight.zero(n), lam)
    fit = t5_fit(u, lam)
    energy = dirichlet_energy(u, m)
    closed = 4.0 * lam**2 * sum(ai * ai for ai in a)
    return _case("energy = (1/lam^2) inf |u-c|^2 + |u-c-d.x|^2 for u = sum a_i (x_i^2 - lam^2)",
                 energy, fit.value / lam**2, function=u.to_json(), lam=lam,
                 closed_form=closed, minimizer={"c": float(fit.c), "d": [float(v) for v in fit.d]},
                 objective_gradient=[float(v) for v in fit.gradient])


def case_t11_extremizer() -> dict:
    w = MonomialWeight((1.0, 0.0))
    u = FuncSum.from_terms({(0, 1): 1.0}, beta=0.5)
    rep = stability_margins(u, w)
    fit = dist_to_E(u, w)
    return _case("delta_A = d_A(u, E)^2 for u = x_2 exp(-|x|^2/2), alpha = (1, 0)",
                 rep.delta_A, fit.distance_sq, function=u.to_json(), alpha=list(w.alpha),
                 closed_form=math.sqrt(math.pi) / 4.0)


def case_p2_equality() -> dict:
    w = MonomialWeight((0.0,))
    u = basis_function((2,), w)
    deficit, mid, rhs = p2_chain(u)
    spec = p2_chain_spectral(u)
    out = _case("deficit = mid = rhs for u = phi_2 (1-D classical)", deficit, rhs,
                function=u.to_json(), chain=[deficit, mid, rhs], chain_from_coefficients=list(spec))
    out["passed"] = out["passed"] and abs(mid - rhs) <= EQUALITY_RTOL * max(abs(mid), 1.0)
    return out


CASES = {
    "t1-equality": case_t1_equality,
    "t2-equality": case_t2_equality,
    "t5-extremizer": case_t5_extremizer,
    "t11-extremizer": case_t11_extremizer,
    "p2-equality": case_p2_equality,
}


def reproduce(case_id: str) -> dict:
    if case_id not in CASES:
        raise KeyError(f"unknown case {case_id!r}; known: {', '.join(CASES)}")
    out = {"gplab_version": __version__, "command": "reproduce", "case": case_id}
    out.update(CASES[case_id]())
    return out
