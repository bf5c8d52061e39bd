import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from gplab import FuncSum, MonomialWeight, PolyGauss
from gplab.funcs import dot, is_neumann_admissible, linear, multi_indices, random_polygauss

coef = st.floats(-3, 3, allow_nan=False)
exps2 = st.tuples(st.integers(0, 4), st.integers(0, 4))


@st.composite
def funcsums(draw, n=2):
    comps = []
    for _ in range(draw(st.integers(1, 2))):
        terms = draw(st.dictionaries(exps2, coef, min_size=1, max_size=4))
        beta = draw(st.sampled_from([0.0, 0.25, 0.5, 1.0]))
        comps.append(PolyGauss.from_terms(terms, beta, n))
    return FuncSum(comps, n)


points = st.lists(st.tuples(st.floats(-2, 2), st.floats(-2, 2)), min_size=1, max_size=5)


def test_canonical_form_merges_and_drops_zeros():
    p = PolyGauss([[1, 0], [1, 0], [0, 2]], [2.0, -2.0, 1.0], 0.0, 2)
    assert p.terms == {(0, 2): 1.0}
    f = FuncSum.from_terms({(1, 0): 1.0}) + FuncSum.from_terms({(1, 0): -1.0})
    assert f.is_zero()


def test_components_sorted_by_rate():
    f = FuncSum.gaussian(1.0, 2.0, 1) + FuncSum.constant(1.0, 1) + FuncSum.gaussian(1.0, 0.5, 1)
    assert f.betas == (0.0, 0.5, 2.0)


def test_rejects_bad_input():
    with pytest.raises(ValueError):
        PolyGauss([[-1, 0]], [1.0], 0.0, 2)
    with pytest.raises(ValueError):
        PolyGauss([[1, 0]], [1.0], -0.5, 2)
    with pytest.raises(ValueError):
        FuncSum.from_terms({(1, 0): 1.0}).divide_by_coordinate(1)


@given(funcsums(), funcsums(), points)
def test_ring_operations_pointwise(f, g, pts):
    x = np.array(pts)
    assert np.allclose((f + g)(x), f(x) + g(x), rtol=1e-12, atol=1e-12)
    assert np.allclose((f * g)(x), f(x) * g(x), rtol=1e-10, atol=1e-10)
    assert np.allclose((f - g)(x), f(x) - g(x), rtol=1e-12, atol=1e-12)
    assert (f * g).allclose(g * f)


@given(funcsums(), funcsums())
def test_product_rule(f, g):
    for i in range(2):
        assert (f * g).partial(i).allclose(f.partial(i) * g + f * g.partial(i), rtol=1e-10, atol=1e-10)


@given(funcsums(), points)
def test_partial_matches_finite_difference(f, pts):
    x = np.array(pts)
    h = 1e-6
    for i in range(2):
        e = np.zeros(2)
        e[i] = h
        fd = (f(x + e) - f(x - e)) / (2 * h)
        scale = 1 + np.max(np.abs(f(x)))
        assert np.allclose(f.partial(i)(x), fd, atol=1e-5 * scale)


@given(funcsums(), st.floats(0.2, 3.0), points)
def test_dilation(f, s, pts):
    x = np.array(pts)
    assert np.allclose(f.dilate(s)(x), f(s * x), rtol=1e-10, atol=1e-10)


@given(funcsums())
def test_json_roundtrip(f):
    g = FuncSum.from_json(json.loads(f.dumps()), 2)
    assert g == f


def test_json_empty_and_single_component():
    assert FuncSum.from_json([], 2).is_zero()
    f = FuncSum.from_json({"beta": 0.5, "terms": [{"exp": [1, 0], "coef": 2.0}]})
    assert f.betas == (0.5,) and f.components[0].terms == {(1, 0): 2.0}


def test_laplacian_and_hessian():
    f = FuncSum.from_terms({(2, 1): 1.0, (0, 3): 2.0})
    assert f.laplacian() == FuncSum.from_terms({(0, 1): 14.0})
    h = f.hessian()
    assert h[0][1] == h[1][0] == FuncSum.from_terms({(1, 0): 2.0})


def test_linear_and_dot():
    f = linear([1.0, -2.0], 3.0)
    assert f.components[0].terms == {(0, 0): 3.0, (0, 1): -2.0, (1, 0): 1.0}
    g = f.gradient()
    assert dot(g, g) == FuncSum.constant(5.0, 2)


def test_neumann_admissibility():
    w = MonomialWeight([1, 0])
    assert is_neumann_admissible(FuncSum.from_terms({(2, 3): 1.0}), w)
    assert not is_neumann_admissible(FuncSum.from_terms({(1, 0): 1.0}), w)
    assert is_neumann_admissible(FuncSum.from_terms({(1, 0): 1.0}), MonomialWeight([0, 0]))


def test_multi_indices():
    idx = multi_indices(2, 2)
    assert idx == [(0, 0), (0, 1), (1, 0), (0, 2), (1, 1), (2, 0)]
    assert multi_indices(2, 2, (True, False)) == [(0, 0), (0, 1), (0, 2), (2, 0)]


def test_random_polygauss_is_admissible_and_seeded():
    w = MonomialWeight([1, 0.0])
    a = random_polygauss(np.random.default_rng(5), w)
    b = random_polygauss(np.random.default_rng(5), w)
    assert a == b
    assert is_neumann_admissible(a, w)
    assert 0.1 <= a.betas[0] <= 2.0
    assert random_polygauss(np.random.default_rng(1), w, beta=0.0).is_polynomial()
