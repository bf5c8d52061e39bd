"""Acceptance criteria, one test (or one parametrized family) per criterion."""

import math
import time

import numpy as np
import pytest

from gplab import FuncSum, MonomialWeight, WeightedGaussianMeasure, integrate
from gplab.funcs import gradient, random_polygauss
from gplab.functionals import (delta_A, dirichlet_energy, gamma2_check, gamma2_integral_identity,
                               hup_identity_sides, p2_chain, p2_chain_spectral, poincare_deficit,
                               t2_rhs, variance)
from gplab.measure import abs_scale
from gplab.quad import integrate_funcsum, tensor_integrate
from gplab.spectral import (apply_generator, basis_function, expand, poisson_solve, rayleigh_gap,
                            spectrum_rows)
from gplab.stability import dist_to_E
from gplab.suite import SuiteConfig, case_t5_extremizer, run_suite

CONFIGS = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.5, 2.0)]
PARTIAL = MonomialWeight((1.0, 0.0))


def _ids(a):
    return "alpha=" + ",".join(f"{v:g}" for v in a)


def test_c01_t1_equality(acceptance):
    m = WeightedGaussianMeasure(PARTIAL)
    u = FuncSum.from_terms({(0, 0): 3.0, (0, 1): 2.0})
    e, v = dirichlet_energy(u, m), variance(u, m)
    # quadrature path: pointwise gradient and values at the tensor nodes
    grad = gradient(u)
    eq = tensor_integrate(m, lambda x: sum(g(x) ** 2 for g in grad), normalized=True)
    mean = tensor_integrate(m, u, normalized=True)
    vq = tensor_integrate(m, lambda x: (u(x) - mean) ** 2, normalized=True)
    ok = abs(e - 4) <= 1e-12 and abs(e - v) <= 1e-12 and abs(eq - vq) <= 1e-10 and abs(vq - 4) <= 1e-10
    acceptance("C1 energy = variance, u = 3 + 2 x_2",
               ok, f"exact {e!r} vs {v!r}, quadrature {eq!r} vs {vq!r}")
    assert ok


def test_c02_t2_equality(acceptance):
    m = WeightedGaussianMeasure(PARTIAL)
    u = FuncSum.from_terms({(0, 2): 1.0, (0, 0): -1.0})
    d, r = poincare_deficit(u, m), t2_rhs(u, m)
    ok = abs(d - 2) <= 1e-12 and abs(d - r) <= 1e-12
    acceptance("C2 deficit = t2_rhs = 2, u = x_2^2 - 1", ok, f"{d!r} vs {r!r}")
    assert ok


def test_c03_t11_equality(acceptance):
    u = FuncSum.from_terms({(0, 1): 1.0}, beta=0.5)
    target = 0.5 * 0.5 * math.sqrt(math.pi)
    da = delta_A(u, PARTIAL)
    d2 = dist_to_E(u, PARTIAL).distance_sq
    err = max(abs(da - target), abs(d2 - target)) / target
    ok = err <= 1e-6
    acceptance("C3 delta_A = d_A^2 = sqrt(pi)/4", ok, f"delta_A {da!r}, d_A^2 {d2!r}, rel err {err:.2e}")
    assert ok


@pytest.mark.parametrize("alpha", CONFIGS, ids=_ids)
def test_c04_hup_identity(alpha, acceptance):
    w = MonomialWeight(alpha)
    rng = np.random.default_rng(4)
    worst = 0.0
    for _ in range(100):
        u = random_polygauss(rng, w, 6)
        lhs, rhs, mag = hup_identity_sides(u, w, "quadrature")
        worst = max(worst, abs(lhs - rhs) / max(abs(lhs), abs(rhs), mag))
    ok = worst <= 1e-9
    acceptance(f"C4 uncertainty identity, {_ids(alpha)}", ok, f"max relative residual {worst:.2e} over 100")
    assert ok


@pytest.mark.parametrize("alpha", CONFIGS, ids=_ids)
def test_c05_margin_suite(alpha, acceptance):
    t0 = time.perf_counter()
    report, _ = run_suite(SuiteConfig(alpha=alpha, trials=1000, seed=5))
    dt = time.perf_counter() - t0
    worst = min(((k, v) for k, v in report["theorems"].items() if k != "p0"),
                key=lambda kv: kv[1]["min_relative_margin"])
    ok = report["passed"]
    acceptance(f"C5 margin suite, {_ids(alpha)}", ok,
               f"{len(report['theorems'])} statements x 1000, {len(report['violations'])} violations, "
               f"tightest {worst[0]} {worst[1]['min_relative_margin']:.2e}, {dt:.0f}s")
    assert ok, report["violations"][:3]
    for key in ("t1", "t2", "p1", "t3", "t4", "t6", "t7", "delta2"):
        assert report["theorems"][key]["count"] == 1000
    if alpha == (0.0, 0.0):
        assert report["theorems"]["t5"]["count"] == 1000


def test_c06_spectral_gap(acceptance):
    gaps = {a: rayleigh_gap(MonomialWeight(a)) for a in [(1.0, 0.0), (0.0, 0.0), (1.0, 1.0)]}
    enum = {a: min(r["eigenvalue"] for r in spectrum_rows(MonomialWeight(a), 6) if r["eigenvalue"] > 0)
            for a in gaps}
    ok = (abs(gaps[(1.0, 0.0)] - 1) <= 1e-10 and abs(gaps[(0.0, 0.0)] - 1) <= 1e-10
          and abs(gaps[(1.0, 1.0)] - 2) <= 1e-8 and all(abs(gaps[a] - enum[a]) <= 1e-8 for a in gaps))
    acceptance("C6 spectral gap", ok, ", ".join(f"{_ids(a)}: {g!r} (enumerated {enum[a]})" for a, g in gaps.items()))
    assert ok


@pytest.mark.parametrize("alpha", [(1.0, 0.0), (1.0, 1.0)], ids=_ids)
def test_c07_poisson(alpha, acceptance):
    w = MonomialWeight(alpha)
    m = WeightedGaussianMeasure(w)
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(50):
        rhs = random_polygauss(rng, w, 6, beta=0.0)
        rhs = rhs - integrate(rhs, m, normalized=True)
        sol = poisson_solve(expand(rhs, w)).to_funcsum()
        res = apply_generator(sol, w) + rhs
        worst = max(worst, integrate(res * res, m, normalized=True))
    ok = worst <= 1e-18
    acceptance(f"C7 Poisson residual, {_ids(alpha)}", ok, f"max integral of residual^2 {worst:.2e} over 50")
    assert ok


def test_c08_p2_chain(acceptance):
    w = MonomialWeight((0.0,))
    phi3 = basis_function((3,), w)
    chain, spec = p2_chain(phi3), p2_chain_spectral(phi3)
    ok = all(abs(a - b) <= 1e-12 and abs(b - c) <= 1e-12 for a, b, c in zip(chain, spec, (2.0, 1.5, 1.0)))
    rng = np.random.default_rng(8)
    worst = 0.0
    for _ in range(20):
        c = rng.uniform(-1, 1, 3)
        u = sum((basis_function((k,), w).scale(c[k]) for k in range(3)), FuncSum.zero(1))
        d, mid, r = p2_chain(u)
        worst = max(worst, abs(d - mid), abs(mid - r))
    ok = ok and worst <= 1e-12
    acceptance("C8 P2 chain", ok, f"phi_3 chain {tuple(chain)}, coefficient formulas {tuple(spec)}, "
                                  f"low-mode spread {worst:.1e}")
    assert ok


def test_c09_dual_path(acceptance):
    rng = np.random.default_rng(9)
    worst = 0.0
    for k in range(1000):
        alpha = CONFIGS[k % 4]
        w = MonomialWeight(alpha)
        m = WeightedGaussianMeasure(w, float(np.exp(rng.uniform(math.log(0.5), math.log(2)))))
        f = random_polygauss(rng, w, 6) * random_polygauss(rng, w, 3)
        if k % 3 == 0:
            f = f * FuncSum.coordinate(int(rng.integers(2)), 2)
        exact = integrate(f, m, normalized=True)
        quad = integrate_funcsum(f, m, 40, normalized=True)
        worst = max(worst, abs(exact - quad) / max(abs(exact), abs_scale(f, m, normalized=True)))
    ok = worst <= 1e-9
    acceptance("C9 exact vs quadrature (order 40)", ok, f"max relative difference {worst:.2e} over 1000")
    assert ok


def test_c10_gamma2(acceptance):
    rng = np.random.default_rng(10)
    worst_id, worst_cd = 0.0, math.inf
    for k in range(100):
        w = MonomialWeight(CONFIGS[k % 4])
        u = random_polygauss(rng, w, 5)
        lhs, rhs = gamma2_integral_identity(u, WeightedGaussianMeasure(w))
        worst_id = max(worst_id, abs(lhs - rhs) / max(abs(rhs), 1e-300))
        worst_cd = min(worst_cd, gamma2_check(u, w, samples=10_000, seed=k))
    ok = worst_id <= 1e-8 and worst_cd >= 0.0
    acceptance("C10 Gamma_2 identity and pointwise curvature", ok,
               f"max relative identity error {worst_id:.2e}, min Gamma_2 - Gamma {worst_cd:.3e}")
    assert ok


def test_c11_t5_extremizer(acceptance):
    case = case_t5_extremizer(1.5, (1.0, 1.0))
    grad = max(abs(g) for g in case["objective_gradient"])
    ok = (abs(case["lhs"] - 18) <= 1e-8 and abs(case["closed_form"] - 18) <= 1e-12
          and abs(case["lhs"] - case["rhs"]) <= 1e-8 and grad <= 1e-8)
    acceptance("C11 T5 extremizer", ok, f"energy {case['lhs']!r}, inf-expression {case['rhs']!r}, "
                                        f"minimizer {case['minimizer']}, stationarity {grad:.1e}")
    assert ok
