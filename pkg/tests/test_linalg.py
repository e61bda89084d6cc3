import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from airlearn.linalg import rank1_sym_update, regularized_spd_solve, relative_frobenius_error

from .oracles import gauss_jordan_inverse


def residual(G, B, gamma, W):
    return np.linalg.norm((G + gamma * np.eye(len(G))) @ W - B) / max(1.0, np.linalg.norm(B))


def test_scalar_solve():
    W = regularized_spd_solve(np.array([[4.0]]), np.array([[2.0]]), 1.0)
    assert W.shape == (1, 1)
    assert W[0, 0] == pytest.approx(0.4, abs=1e-15)


def test_zero_gram_gives_rhs(rng):
    B = rng.standard_normal((3, 2))
    np.testing.assert_allclose(regularized_spd_solve(np.zeros((3, 3)), B, 1.0), B, rtol=0, atol=1e-15)


def test_matches_gauss_jordan_inverse(rng):
    M = rng.standard_normal((8, 8))
    G = M.T @ M
    B = rng.standard_normal((8, 3))
    W = regularized_spd_solve(G, B, 0.5)
    expected = gauss_jordan_inverse(G + 0.5 * np.eye(8)) @ B
    assert relative_frobenius_error(W, expected) <= 1e-10


def test_inputs_not_modified(rng):
    M = rng.standard_normal((6, 6))
    G = M.T @ M
    B = rng.standard_normal((6, 2))
    G0, B0 = G.copy(), B.copy()
    regularized_spd_solve(G, B, 1.0)
    assert np.array_equal(G, G0) and np.array_equal(B, B0)


@pytest.mark.parametrize(
    "G,B,gamma",
    [
        (np.eye(3), np.ones((2, 1)), 1.0),
        (np.ones((3, 2)), np.ones((3, 1)), 1.0),
        (np.eye(3), np.ones((3, 1)), 0.0),
        (np.eye(3), np.ones((3, 1)), -1.0),
    ],
)
def test_contract_violations(G, B, gamma):
    with pytest.raises(ValueError):
        regularized_spd_solve(G, B, gamma)


def test_non_finite_rejected():
    G = np.eye(2)
    G[0, 1] = np.nan
    with pytest.raises(ValueError, match="non-finite"):
        regularized_spd_solve(G, np.ones((2, 1)), 1.0)
    with pytest.raises(ValueError, match="non-finite"):
        regularized_spd_solve(np.eye(2), np.array([[np.inf], [0.0]]), 1.0)


def test_residual_on_ill_conditioned_gram(rng):
    # large Gram entries, tiny gamma: condition number around 1e10
    X = rng.standard_normal((400, 40)) * np.logspace(0, 3, 40)
    G = X.T @ X
    B = rng.standard_normal((40, 7)) * 1e3
    W = regularized_spd_solve(G, B, 1e-2)
    assert residual(G, B, 1e-2, W) <= 1e-10


def test_jitter_fallback_on_indefinite_round_off():
    # eigenvalue pushed just below -gamma, small next to trace(G): the jitter rescues it
    G = np.diag([1e6, -1.0 - 1e-6])
    W = regularized_spd_solve(G, np.eye(2), 1.0)
    assert np.all(np.isfinite(W))


def test_clearly_indefinite_gram_rejected():
    with pytest.raises(ValueError, match="positive"):
        regularized_spd_solve(np.diag([1.0, -5.0]), np.eye(2), 1.0)


def test_rank1_examples():
    G = rank1_sym_update(np.zeros((2, 2)), np.array([1.0, 2.0]), 1.0)
    assert np.array_equal(G, [[1, 2], [2, 4]])
    G2 = rank1_sym_update(G, np.array([1.0, 2.0]), 1.0)
    assert np.array_equal(G2, 2 * np.array([[1, 2], [2, 4]]))
    assert np.array_equal(G, [[1, 2], [2, 4]])  # input untouched


def test_rank1_accumulation_matches_batch_product(rng):
    X = rng.standard_normal((100, 12))
    G = np.zeros((12, 12))
    for x in X:
        G = rank1_sym_update(G, x, 1.0)
    assert relative_frobenius_error(G, X.T @ X) <= 1e-12


def test_rank1_rejects_bad_input():
    with pytest.raises(ValueError):
        rank1_sym_update(np.zeros((2, 2)), np.array([1.0, np.nan]))
    with pytest.raises(ValueError):
        rank1_sym_update(np.zeros((2, 2)), np.array([1.0, 2.0, 3.0]))


finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 6).flatmap(lambda n: st.lists(st.tuples(st.lists(finite, min_size=n, max_size=n), finite), min_size=1, max_size=12)))
def test_symmetry_closure(updates):
    n = len(updates[0][0])
    G = np.zeros((n, n))
    for x, scale in updates:
        G = rank1_sym_update(G, np.array(x), scale)
    assert np.array_equal(G, G.T)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31), st.floats(1e-3, 1e2), st.floats(1.0, 1e3))
def test_monotone_regularization(seed, gamma1, factor):
    r = np.random.default_rng(seed)
    M = r.standard_normal((10, 6))
    G, B = M.T @ M, r.standard_normal((6, 3))
    w1 = np.linalg.norm(regularized_spd_solve(G, B, gamma1))
    w2 = np.linalg.norm(regularized_spd_solve(G, B, gamma1 * factor))
    assert w2 <= w1 * (1 + 1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31), st.integers(1, 12), st.floats(1e-4, 1e4))
def test_solve_residual_property(seed, n, gamma):
    r = np.random.default_rng(seed)
    M = r.standard_normal((2 * n, n)) * r.uniform(0.1, 100)
    G, B = M.T @ M, r.standard_normal((n, 3))
    assert residual(G, B, gamma, regularized_spd_solve(G, B, gamma)) <= 1e-10
