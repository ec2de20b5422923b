import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose
from scipy import integrate

from betawishart.hypergeom import (
    HypergeomParams,
    TruncationBudget,
    hyper_hetero,
    hyper_one_matrix,
    hetero_terms,
    kummer_transform,
    one_matrix_layers,
    one_matrix_terms,
)
from oracles import scalar_1f1

BETAS = [1, 2, 4]
P = HypergeomParams


def test_hetero_examples():
    v = hyper_hetero(P(), 1, 1, [1.0], [1.0], TruncationBudget(25))
    assert abs(v.value - math.e) < 1e-9
    v = hyper_hetero(P(), 3, 2, [1.0, 1.0, 1.0], [0.1, 0.2], TruncationBudget(30))
    assert_allclose(v.value, math.exp(0.3), rtol=1e-13)
    v = hyper_hetero(P([2.0]), 1, 1, [1.0], [0.5], TruncationBudget(60))
    assert abs(v.value - 4.0) < 1e-4


def test_one_matrix_examples():
    assert_allclose(hyper_one_matrix(P(), 1, [0.7], TruncationBudget(25)).value, math.exp(0.7), rtol=1e-13)
    v = hyper_one_matrix(P([1.5], [1.5]), 2, [0.4, -0.2], TruncationBudget(30))
    assert_allclose(v.value, math.exp(0.2), rtol=1e-13)
    v = hyper_one_matrix(P([1.0, 1.0], [2.0]), 1, [0.5], TruncationBudget(80))
    assert_allclose(v.value, -math.log(0.5) / 0.5, rtol=1e-12)


def test_kummer_examples():
    ap, cp, X, pre = kummer_transform(1.0, 2.0, [1.0], 1, 1)
    assert (ap, cp) == (1.0, 2.0)
    lhs = hyper_one_matrix(P([1.0], [2.0]), 1, [-1.0], TruncationBudget(40)).value
    rhs = pre * hyper_one_matrix(P([ap], [cp]), 1, X, TruncationBudget(40)).value
    assert_allclose([lhs, rhs], [1 - math.exp(-1)] * 2, rtol=1e-12)
    assert_allclose(0.6321206, lhs, atol=1e-7)
    ap, cp, X, pre = kummer_transform(0.7, 2.2, [0.0, 0.0], 2, 2)
    assert pre == 1.0 and np.all(X == 0)


@pytest.mark.parametrize("beta", BETAS)
def test_kummer_route_equivalence(beta):
    budget = TruncationBudget(40)
    direct = hyper_one_matrix(P([1.0], [2.5], beta), 2, [-0.3, -0.7], budget)
    ap, cp, X, pre = kummer_transform(1.0, 2.5, [0.3, 0.7], 2, beta)
    via = hyper_one_matrix(P([ap], [cp], beta), 2, X, budget)
    assert abs(direct.value - pre * via.value) < 1e-8


@pytest.mark.parametrize("beta", BETAS)
def test_kummer_route_equivalence_three_by_three(beta):
    budget = TruncationBudget(40)
    X = [0.9, 0.5, 0.2]
    direct = hyper_one_matrix(P([1.5], [3.5], beta), 3, [-v for v in X], budget)
    ap, cp, Xp, pre = kummer_transform(1.5, 3.5, X, 3, beta)
    via = hyper_one_matrix(P([ap], [cp], beta), 3, Xp, budget)
    assert abs(direct.value - pre * via.value) < 1e-8


@pytest.mark.parametrize("beta", BETAS)
@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_0f0_is_exponential_of_trace(beta, m):
    rng = np.random.default_rng(m + 10 * beta)
    for _ in range(3):
        x = rng.uniform(-2, 2, size=m)
        v = hyper_one_matrix(P((), (), beta), m, x, TruncationBudget(40))
        bound = (v.last_layer_ratio + 1e-13) * math.exp(np.abs(x).sum())
        assert abs(v.value - math.exp(x.sum())) <= bound


@pytest.mark.parametrize("beta", BETAS)
@pytest.mark.parametrize("m", [1, 2, 3])
@pytest.mark.parametrize("a", [0.5, 1.0, 2.5])
def test_1f0_is_determinant_power(beta, m, a):
    rng = np.random.default_rng(int(100 * a) + m + beta)
    x = rng.uniform(-0.6, 0.6, size=m)
    v = hyper_one_matrix(P([a], (), beta), m, x, TruncationBudget(80))
    assert abs(v.value - np.prod((1 - x) ** (-a))) < 1e-6


@pytest.mark.parametrize("beta", BETAS)
@pytest.mark.parametrize("m,n", [(2, 1), (3, 2), (4, 3), (4, 1)])
def test_hetero_reduces_at_identity(beta, m, n):
    rng = np.random.default_rng(m * 10 + n)
    B = rng.uniform(-1, 1.5, size=n)
    params = P([1.3, 0.8], [2.1], beta)
    t1, log1, sign1 = hetero_terms(params, m, n, np.ones(m), B, 30)
    t2, log2, sign2 = one_matrix_terms(params, n, B, 30)
    assert t1 is t2
    # term by term: identical signs, and each magnitude agrees to rounding.
    # log-magnitudes reach ~30, so a few ulps of the log is ~1e-13 relative.
    assert np.array_equal(sign1, sign2)
    live = sign1 != 0
    assert np.max(np.expm1(np.abs(log1[live] - log2[live]))) <= 1e-12
    budget = TruncationBudget(30)
    hetero = hyper_hetero(params, m, n, np.ones(m), B, budget)
    one = hyper_one_matrix(params, n, B, budget)
    assert_allclose(hetero.value, one.value, rtol=1e-12)


@pytest.mark.parametrize("beta", BETAS)
@pytest.mark.parametrize("m,n", [(2, 1), (3, 2), (4, 2), (4, 3), (3, 3)])
def test_shift_identity(beta, m, n):
    rng = np.random.default_rng(7 * m + n + beta)
    A = rng.uniform(-0.5, 0.5, size=m)
    B = rng.uniform(-0.8, 0.8, size=n)
    budget = TruncationBudget(40)
    lhs = hyper_hetero(P((), (), beta), m, n, A + 1.0, B, budget).value
    rhs = math.exp(B.sum()) * hyper_hetero(P((), (), beta), m, n, A, B, budget).value
    assert abs(lhs - rhs) < 1e-8


@pytest.mark.parametrize("beta", BETAS)
def test_positive_layers_and_monotone_in_k(beta):
    # every Pochhammer row is positive once the parameters exceed (m - 1) beta / 2
    X = [0.8, 0.3, 0.1]
    a = 2 * beta / 2 + 0.5
    params = P([a], [a + 1.0], beta)
    layers = one_matrix_layers(params, 3, X, 30)
    assert np.all(layers.sign > 0)
    values = [hyper_one_matrix(params, 3, X, TruncationBudget(K, 0.0)).value for K in range(31)]
    assert np.all(np.diff(values) >= 0)


def test_scalar_euler_integral():
    for x in (-2.0, 0.5, 3.0):
        euler, _ = integrate.quad(lambda u: math.exp(x * u), 0, 1)
        v = hyper_one_matrix(P([1.0], [2.0]), 1, [x], TruncationBudget(60))
        assert_allclose(v.value, euler, rtol=1e-12)


@settings(max_examples=40, deadline=None)
@given(
    a=st.floats(0.1, 4), c=st.floats(0.6, 5), z=st.floats(-4, 4),
)
def test_scalar_1f1_against_taylor_oracle(a, c, z):
    v = hyper_one_matrix(P([a], [c]), 1, [z], TruncationBudget(120))
    assert_allclose(v.value, scalar_1f1(a, c, z), rtol=1e-9, atol=1e-12)


def test_series_value_invariants():
    for K in (0, 5, 40):
        budget = TruncationBudget(K, 1e-12)
        v = hyper_one_matrix(P([1.0], [3.0], 2), 2, [0.4, 0.2], budget)
        assert v.degrees_used <= K
        if v.converged:
            assert v.last_layer_ratio <= budget.layer_tol


def test_early_stop_and_non_convergence():
    v = hyper_one_matrix(P(), 1, [0.01], TruncationBudget(60))
    assert v.converged and v.degrees_used < 20
    # strongly alternating input with too few terms: no decay, no convergence
    v = hyper_one_matrix(P(), 1, [-30.0], TruncationBudget(20))
    assert not v.converged and v.degrees_used == 20


def test_input_validation():
    with pytest.raises(ValueError):
        hyper_hetero(P(), 1, 2, [1.0], [1.0, 1.0])
    with pytest.raises(ValueError):
        hyper_hetero(P(), 2, 1, [1.0], [1.0])
    with pytest.raises(ValueError):
        hyper_one_matrix(P([1.0], [-2.0]), 1, [0.5], TruncationBudget(5))
    # beta = 2: row 2 of (b)_kappa starts at b - 1, a pole for b = 1 once kappa_2 >= 1
    with pytest.raises(ValueError):
        hyper_one_matrix(P([1.0], [1.0], 2), 2, [0.5, 0.5], TruncationBudget(4))
    # ... but a single variable never reaches row 2
    hyper_one_matrix(P([1.0], [1.0], 2), 1, [0.5], TruncationBudget(4))
    with pytest.raises(ValueError):
        TruncationBudget(-1)
    with pytest.raises(ValueError):
        P(beta=3)
