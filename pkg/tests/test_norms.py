"""Weighted operator norm engine: closed forms, power iteration, oracle."""

import math

import numpy as np
import pytest

from bklab.errors import (
    InvalidPError,
    NoConvergenceError,
    NonPositiveWeightError,
    ShapeMismatchError,
)
from bklab.norms import (
    is_contraction,
    l0_opnorm,
    opnorm,
    opnorm_boyd,
    opnorm_exact,
    opnorm_oracle,
)
from bklab.operators import FiberedOperator, compose, modulus_direct
from conftest import random_model, uniform_model

A22 = np.array([[0.2, 0.6], [0.3, 0.1]])
W22 = np.array([1.0, 2.0])


def test_exact_identity_is_one(rng):
    for n in (1, 3, 5):
        w = rng.uniform(0.2, 2.0, n)
        for p in (1.0, 2.0, math.inf):
            assert opnorm_exact(np.eye(n), w, p).value == pytest.approx(1.0, abs=1e-14)


def test_exact_p1_weighted_column_formula():
    # columns: (1*0.2 + 2*0.3)/1 = 0.8 and (1*0.6 + 2*0.1)/2 = 0.4
    res = opnorm_exact(A22, W22, 1.0)
    assert res.value == pytest.approx(0.8, abs=1e-15)
    oracle = opnorm_oracle(A22, W22, 1.0, samples=1000, seed=3)
    assert oracle.value == pytest.approx(0.8, abs=1e-9)


def test_exact_pinf_row_sum_formula():
    res = opnorm_exact(A22, W22, math.inf)
    assert res.value == pytest.approx(0.8, abs=1e-15)


def test_exact_rejects_other_p_and_bad_weights():
    with pytest.raises(InvalidPError):
        opnorm_exact(A22, W22, 1.5)
    with pytest.raises(NonPositiveWeightError):
        opnorm_exact(A22, np.array([1.0, 0.0]), 1.0)
    with pytest.raises(ShapeMismatchError):
        opnorm_exact(np.ones((2, 3)), W22, 1.0)


def test_boyd_diagonal():
    res = opnorm_boyd(np.diag([0.3, 0.9]), np.ones(2), 3.0)
    assert res.converged
    assert res.value == pytest.approx(0.9, abs=1e-10)


def test_boyd_symmetric_stochastic_p2():
    res = opnorm_boyd(np.array([[0.6, 0.4], [0.4, 0.6]]), np.ones(2), 2.0)
    assert res.value == pytest.approx(1.0, abs=1e-12)
    exact = opnorm_exact(np.array([[0.6, 0.4], [0.4, 0.6]]), np.ones(2), 2.0)
    assert abs(res.value - exact.value) < 1e-10


def test_boyd_matches_oracle_at_p15(rng):
    for _ in range(20):
        A = rng.uniform(0.0, 1.0, (4, 4))
        A /= A.sum(axis=1).max() * 1.1  # substochastic
        w = rng.uniform(0.5, 1.5, 4)
        boyd = opnorm_boyd(A, w, 1.5)
        oracle = opnorm_oracle(A, w, 1.5, samples=400, seed=11)
        assert boyd.converged
        assert abs(boyd.value - oracle.value) <= 1e-6 * boyd.value


def test_boyd_estimates_nondecreasing():
    A = np.abs(np.random.default_rng(5).standard_normal((5, 5)))
    w = np.ones(5)
    prev = -1.0
    for iters in range(1, 12):
        est = opnorm_boyd(A, w, 2.5, tol=1e-300, max_iter=iters).value
        assert est >= prev - 1e-14 * max(est, 1.0)
        prev = est


def test_boyd_rejects_endpoint_p():
    for p in (1.0, math.inf, 0.5):
        with pytest.raises(InvalidPError):
            opnorm_boyd(A22, W22, p)


def test_oracle_trivial_cases():
    assert opnorm_oracle(np.zeros((3, 3)), np.ones(3), 2.0, samples=10, seed=0).value == 0.0
    assert opnorm_oracle(np.eye(3), np.ones(3), 1.5, samples=10, seed=0).value == pytest.approx(1.0, abs=1e-12)


def test_oracle_never_exceeds_exact(rng):
    for _ in range(30):
        n = int(rng.integers(1, 6))
        A = rng.standard_normal((n, n))
        w = rng.uniform(0.2, 2.0, n)
        for p in (1.0, 2.0, math.inf):
            oracle = opnorm_oracle(A, w, p, samples=100, seed=1).value
            assert oracle <= opnorm_exact(A, w, p).value + 1e-9


def test_weighted_reduction_identity(rng):
    for _ in range(10):
        n = int(rng.integers(1, 5))
        A = np.abs(rng.standard_normal((n, n)))
        w = rng.uniform(0.2, 2.0, n)
        for p in (1.0, 1.5, 2.0, 3.0):
            d = w ** (1.0 / p)
            B = A * d[:, None] / d[None, :]
            direct = opnorm_oracle(A, w, p, samples=300, seed=4).value
            reduced = opnorm_oracle(B, np.ones(n), p, samples=300, seed=4).value
            assert abs(direct - reduced) <= 1e-8 * (1.0 + reduced)


def test_p2_gap_for_signed_matrix():
    A = np.array([[0.7, 0.7], [0.7, -0.7]])
    w = np.ones(2)
    signed = opnorm_exact(A, w, 2.0).value
    mod = opnorm_exact(np.abs(A), w, 2.0).value
    assert signed == pytest.approx(0.7 * math.sqrt(2.0), abs=1e-12)
    assert mod == pytest.approx(1.4, abs=1e-12)
    assert mod - signed > 0.4


def test_witness_certificates(rng):
    for _ in range(20):
        n = int(rng.integers(1, 6))
        A = rng.standard_normal((n, n))
        w = rng.uniform(0.2, 2.0, n)
        for p, res in [
            (1.0, opnorm_exact(A, w, 1.0)),
            (2.0, opnorm_exact(A, w, 2.0)),
            (math.inf, opnorm_exact(A, w, math.inf)),
            (3.0, opnorm_oracle(A, w, 3.0, samples=60, seed=9)),
        ]:
            assert res.witness_ratio(A, w, p) == pytest.approx(res.value, abs=1e-10, rel=1e-10)
        B = np.abs(A)
        res = opnorm_boyd(B, w, 1.5)
        assert res.witness_ratio(B, w, 1.5) == pytest.approx(res.value, abs=1e-10, rel=1e-10)


def test_l0_opnorm_identity_and_scalar_fibers():
    m = uniform_model(2, 2)
    np.testing.assert_allclose(l0_opnorm(FiberedOperator.identity(2, 2), m.measure, 2.0), [1.0, 1.0])
    m1 = uniform_model(2, 1)
    T = FiberedOperator(np.array([[[0.5]], [[0.25]]]))
    np.testing.assert_allclose(l0_opnorm(T, m1.measure, 1.5), [0.5, 0.25])


def test_l0_opnorm_swap_is_isometry():
    m = uniform_model(2, 2)
    swap = FiberedOperator(np.broadcast_to(np.array([[0.0, 1.0], [1.0, 0.0]]), (2, 2, 2)).copy())
    np.testing.assert_allclose(l0_opnorm(swap, m.measure, 1.0), [1.0, 1.0])
    assert is_contraction(swap, m.measure, 1.0)


def test_l0_opnorm_raises_on_unconverged_fiber():
    m = uniform_model(1, 3)
    T = FiberedOperator(np.abs(np.random.default_rng(2).standard_normal((1, 3, 3))))
    with pytest.raises(NoConvergenceError):
        l0_opnorm(T, m.measure, 1.5, max_iter=1)


def test_submultiplicativity(rng):
    model = random_model(rng, 2, 4)
    for _ in range(10):
        T = FiberedOperator(np.abs(rng.standard_normal((2, 4, 4))))
        S = FiberedOperator(np.abs(rng.standard_normal((2, 4, 4))))
        for p in (1.0, 1.5, 2.0, 3.0, math.inf):
            lhs = l0_opnorm(compose(T, S), model.measure, p)
            rhs = l0_opnorm(T, model.measure, p) * l0_opnorm(S, model.measure, p)
            assert np.all(lhs <= rhs + 1e-10 * (1.0 + rhs))


def test_modulus_norm_equality_at_endpoints(rng):
    model = random_model(rng, 3, 4)
    for _ in range(25):
        T = FiberedOperator(rng.standard_normal((3, 4, 4)))
        for p in (1.0, math.inf):
            lhs = l0_opnorm(T, model.measure, p)
            rhs = l0_opnorm(modulus_direct(T), model.measure, p)
            np.testing.assert_allclose(lhs, rhs, rtol=1e-10, atol=1e-10)


def test_opnorm_method_routing():
    w = np.ones(2)
    assert opnorm(A22, w, 1.0).method == "exact-p1"
    assert opnorm(A22, w, 2.0).method == "exact-p2"
    assert opnorm(A22, w, math.inf).method == "exact-pinf"
    assert opnorm(A22, w, 1.5).method == "boyd"  # nonnegative entries
    signed = np.array([[0.2, -0.6], [0.3, 0.1]])
    assert opnorm(signed, w, 1.5).method == "oracle"
    with pytest.raises(InvalidPError):
        opnorm(A22, w, 2.0, method="bogus")
