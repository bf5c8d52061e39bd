import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from gplab import FuncSum, MonomialWeight, WeightedGaussianMeasure, inner, integrate
from gplab.funcs import random_polygauss
from gplab.functionals import dirichlet_energy
from gplab.quad import integrate_funcsum
from gplab.spectral import (apply_generator, basis_function, eigenvalue, expand, factor_coefficients,
                            indices_up_to, laguerre_norm_sq, orthonormality_defect, poisson_solve,
                            raw_norm_sq, rayleigh_gap, spectrum_rows)

W1 = MonomialWeight([0.0])
W1W = MonomialWeight([1.0])


def test_ground_state_is_constant():
    for w in (W1, MonomialWeight([1, 0]), MonomialWeight([2, 0.5])):
        assert basis_function((0,) * w.n, w) == FuncSum.constant(1.0, w.n)
        assert eigenvalue((0,) * w.n, w) == 0


def test_second_hermite():
    phi = basis_function((2,), W1)
    assert phi.allclose(FuncSum.from_terms({(2,): 1 / math.sqrt(2), (0,): -1 / math.sqrt(2)}), atol=1e-15)
    assert eigenvalue((2,), W1) == 2


def test_first_laguerre_factor():
    phi = basis_function((1,), W1W)
    assert phi.allclose(FuncSum.from_terms({(0,): 1.0, (2,): -0.5}), atol=1e-15)
    lphi = apply_generator(phi, W1W)
    assert lphi.allclose(phi.scale(-2.0), atol=1e-14)


def test_eigenvalue_map():
    w = MonomialWeight([1, 0])
    assert eigenvalue((0, 1), w) == 1
    assert eigenvalue((1, 0), w) == 2
    assert eigenvalue((2, 3), w) == 7
    assert eigenvalue((1, 0), w, lam=2.0) == 0.5
    full = MonomialWeight([1, 1])
    assert min(eigenvalue(i, full) for i in indices_up_to(full, 6) if any(i)) == 2
    with pytest.raises(ValueError):
        eigenvalue((1,), w)
    with pytest.raises(ValueError):
        eigenvalue((-1, 0), w)


@pytest.mark.parametrize("alpha", [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.5, 2.5)])
def test_operator_identity_on_basis(alpha):
    w = MonomialWeight(alpha)
    for lam in (1.0, 1.7):
        for idx in indices_up_to(w, 8):
            phi = basis_function(idx, w, lam)
            lhs = apply_generator(phi, w, lam).scale(-1.0)
            assert lhs.allclose(phi.scale(eigenvalue(idx, w, lam)), rtol=1e-11, atol=1e-11), idx


@pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0, 3.5])
def test_normalization_two_paths(alpha):
    for n in range(8):
        assert raw_norm_sq(n, alpha) == pytest.approx(laguerre_norm_sq(n, alpha), rel=1e-13)
    for n in range(13):
        assert raw_norm_sq(n, 0.0) == pytest.approx(math.factorial(n), rel=1e-14)


@pytest.mark.parametrize("alpha", [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.5, 2.5)])
def test_orthonormality(alpha):
    w = MonomialWeight(alpha)
    assert orthonormality_defect(w, 12) <= 1e-12
    # plain float64 evaluation of the multivariate Gram loses a few ulps to cancellation
    assert orthonormality_defect(w, 12, precise=False) <= 1e-11


def test_basis_is_product_of_factors():
    w = MonomialWeight([1.0, 0.0])
    phi = basis_function((2, 3), w)
    f0 = factor_coefficients(2, 1.0)
    f1 = factor_coefficients(3, 0.0)
    terms = {(i, j): a * b for i, a in enumerate(f0) if a for j, b in enumerate(f1) if b}
    assert phi == FuncSum.from_terms(terms)


def test_expand_simple_cases():
    assert expand(FuncSum.constant(1.0, 1), W1).coeffs == {(0,): pytest.approx(1.0)}
    e = expand(FuncSum.monomial([1]), W1)
    assert set(e.coeffs) == {(1,)} and e.coeffs[(1,)] == pytest.approx(1.0)


ALPHAS = st.sampled_from([(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.5, 2.0), (2.5, 0.0)])


@given(seed=st.integers(0, 10_000), alpha=ALPHAS, lam=st.floats(0.5, 2.0))
def test_parseval_and_reconstruction(seed, alpha, lam):
    w = MonomialWeight(alpha)
    m = WeightedGaussianMeasure(w, lam)
    u = random_polygauss(np.random.default_rng(seed), w, degree=6, beta=0.0)
    e = expand(u, m)
    total = inner(u, u, m, normalized=True)
    assert abs(e.norm_sq() - total) <= 1e-12 * total
    assert e.to_funcsum().allclose(u, rtol=1e-10, atol=1e-10)


def test_expand_rejects_infinite_expansions():
    w = MonomialWeight([1.0, 0.0])
    with pytest.raises(ValueError):
        expand(FuncSum.gaussian(1.0, 0.5, 2), w)
    with pytest.raises(ValueError):
        expand(FuncSum.monomial([1, 0]), w)


def test_truncated_expansion_reports_dropped_mass():
    u = FuncSum.gaussian(1.0, 0.25, 1)
    prev = math.inf
    for cutoff in (2, 6, 12):
        e = expand(u, W1, cutoff=cutoff)
        assert e.dropped_mass >= 0
        assert e.dropped_mass < prev
        total = inner(u, u, WeightedGaussianMeasure(W1), normalized=True)
        assert e.norm_sq() + e.dropped_mass == pytest.approx(total, rel=1e-13)
        prev = e.dropped_mass
    assert prev < 1e-6


def test_poisson_eigenfunction_and_linear_cases():
    w = MonomialWeight([1.0, 0.0])
    phi = basis_function((1, 2), w)
    sol = poisson_solve(expand(phi, w))
    assert sol.to_funcsum().allclose(phi.scale(1 / 4), atol=1e-13)
    x = FuncSum.monomial([1])
    assert poisson_solve(expand(x, W1)).to_funcsum().allclose(x, atol=1e-14)


@given(seed=st.integers(0, 10_000))
def test_poisson_residual(seed):
    rng = np.random.default_rng(seed)
    w = MonomialWeight([1.0, 0.0])
    m = WeightedGaussianMeasure(w)
    rhs = random_polygauss(rng, w, degree=5, beta=0.0)
    rhs = rhs - integrate(rhs, m, normalized=True)
    wsol = poisson_solve(expand(rhs, w)).to_funcsum()
    res = apply_generator(wsol, w) + rhs
    assert integrate_funcsum(res * res, m, normalized=True) <= 1e-18


@given(seed=st.integers(0, 10_000), alpha=ALPHAS, lam=st.floats(0.5, 2.0))
def test_generator_is_symmetric(seed, alpha, lam):
    rng = np.random.default_rng(seed)
    w = MonomialWeight(alpha)
    m = WeightedGaussianMeasure(w, lam)
    f = random_polygauss(rng, w, 4, beta=0.3)
    g = random_polygauss(rng, w, 4, beta=0.0)
    a = inner(f, apply_generator(g, m), m, normalized=True)
    b = inner(g, apply_generator(f, m), m, normalized=True)
    # both equal -int grad f . grad g
    scale = max(abs(a), abs(b), abs(inner(f, f, m, normalized=True)), 1.0)
    assert abs(a - b) <= 1e-10 * scale
    energy = dirichlet_energy(f, m)
    assert inner(f, apply_generator(f, m), m, normalized=True) == pytest.approx(-energy, rel=1e-10, abs=1e-12)


def test_generator_rejects_non_admissible():
    with pytest.raises(ValueError):
        apply_generator(FuncSum.monomial([1, 0]), MonomialWeight([1, 0]))


@pytest.mark.parametrize("alpha,gap,tol", [((1.0, 0.0), 1.0, 1e-10), ((0.0, 0.0), 1.0, 1e-10),
                                           ((1.0, 1.0), 2.0, 1e-8), ((0.5, 2.5), 2.0, 1e-8)])
def test_rayleigh_gap(alpha, gap, tol):
    assert abs(rayleigh_gap(MonomialWeight(alpha), 12) - gap) <= tol


def test_rayleigh_gap_scales_with_lambda():
    assert rayleigh_gap(MonomialWeight([1, 0]), 6, lam=2.0) == pytest.approx(0.25, rel=1e-10)


def test_rayleigh_gap_rejects_tiny_cutoff():
    with pytest.raises(ValueError):
        rayleigh_gap(MonomialWeight([1, 0]), 1)


def test_spectrum_rows_sorted():
    rows = spectrum_rows(MonomialWeight([1, 0]), 4)
    vals = [r["eigenvalue"] for r in rows]
    assert vals == sorted(vals) and rows[0] == {"index": [0, 0], "eigenvalue": 0.0}
    assert sum(v == 2 for v in vals) == 2
