import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given, settings
from hypothesis import strategies as st

from langevin_iact import numkit
from langevin_iact.errors import NotPositiveDefinite, Singular

from conftest import random_spd


def test_cholesky_identity():
    assert np.array_equal(numkit.cholesky(np.eye(2)), np.eye(2))


def test_cholesky_reproduces_input():
    a = np.array([[4.0, 2.0], [2.0, 3.0]])
    L = numkit.cholesky(a)
    assert np.allclose(L @ L.T, a, atol=1e-12, rtol=0)
    assert L[0, 1] == 0.0


def test_cholesky_indefinite():
    with pytest.raises(NotPositiveDefinite):
        numkit.cholesky(np.array([[1.0, 2.0], [2.0, 1.0]]))


def test_solve_singular():
    with pytest.raises(Singular):
        numkit.solve(np.array([[1.0, 2.0], [2.0, 4.0]]), np.ones(2))


@pytest.mark.parametrize("a, expect", [
    (np.diag([3.0, 1.0]), [3.0, 1.0]),
    (np.array([[2.0, 1.0], [1.0, 2.0]]), [3.0, 1.0]),
    (np.eye(3), [1.0, 1.0, 1.0]),
])
def test_sym_eig_small(a, expect):
    w, _ = numkit.sym_eig(a)
    assert np.allclose(w, expect, atol=1e-13)


def test_gen_sym_eig_examples():
    w, _ = numkit.gen_sym_eig(np.diag([2.0, 6.0]), np.diag([1.0, 2.0]))
    assert np.allclose(w, [3.0, 2.0])
    w, _ = numkit.gen_sym_eig(np.eye(3), np.eye(3))
    assert np.allclose(w, 1.0)


@pytest.mark.parametrize("n", [2, 5, 12, 30])
def test_sym_eig_matches_scipy(rng, n):
    a = rng.standard_normal((n, n))
    a = a + a.T
    w, V = numkit.sym_eig(a)
    ref = np.sort(sla.eigvalsh(a))[::-1]
    assert np.allclose(w, ref, atol=1e-11 * np.abs(ref).max())
    assert np.allclose(a @ V, V * w, atol=1e-10)
    assert np.allclose(V.T @ V, np.eye(n), atol=1e-11)


@pytest.mark.parametrize("n", [2, 4, 10, 25])
def test_gen_sym_eig_residual_and_scipy(rng, n):
    a = rng.standard_normal((n, n))
    a = a + a.T
    b = random_spd(rng, n, cond=1e3)
    w, X = numkit.gen_sym_eig(a, b)
    scale = np.abs(w).max()
    assert np.abs(a @ X - (b @ X) * w).max() <= 1e-9 * scale
    assert np.allclose(X.T @ b @ X, np.eye(n), atol=1e-9)
    ref = np.sort(sla.eigh(a, b, eigvals_only=True))[::-1]
    assert np.allclose(w, ref, atol=1e-10 * scale)


def test_mat_exp_examples():
    assert np.array_equal(numkit.mat_exp(np.zeros((3, 3))), np.eye(3))
    assert np.allclose(numkit.mat_exp(np.diag([1.0, 2.0])), np.diag([np.e, np.e**2]), rtol=1e-14)


def test_mat_exp_closed_form_critical():
    # gamma = 2, omega = 1: e^{tA} = e^{-t} [[1 + t, t], [-t, 1 - t]]
    t = 0.5
    A = np.array([[0.0, 1.0], [-1.0, -2.0]])
    ref = np.exp(-t) * np.array([[1 + t, t], [-t, 1 - t]])
    assert np.allclose(numkit.mat_exp(A, t), ref, atol=1e-15)


@pytest.mark.parametrize("n,scale", [(3, 0.1), (6, 3.0), (12, 40.0), (40, 1.0)])
def test_mat_exp_matches_scipy(rng, n, scale):
    a = scale * rng.standard_normal((n, n)) / np.sqrt(n)
    ref = sla.expm(a)
    assert np.allclose(numkit.mat_exp(a), ref, rtol=1e-11, atol=1e-12 * np.abs(ref).max())


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 6), st.floats(-2, 2), st.floats(-2, 2), st.integers(0, 2**31))
def test_mat_exp_semigroup(n, s, t, seed):
    a = np.random.default_rng(seed).standard_normal((n, n))
    lhs = numkit.mat_exp(a, s + t)
    rhs = numkit.mat_exp(a, s) @ numkit.mat_exp(a, t)
    assert np.allclose(lhs, rhs, rtol=1e-10, atol=1e-10 * max(1.0, np.abs(lhs).max()))


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2**31))
def test_mat_exp_commutes_and_det(n, seed):
    a = np.random.default_rng(seed).standard_normal((n, n))
    e = numkit.mat_exp(a)
    assert np.allclose(a @ e, e @ a, atol=1e-10 * max(1.0, np.abs(e).max()))
    assert np.isclose(np.linalg.det(e), np.exp(np.trace(a)), rtol=1e-9)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 8), st.integers(0, 2**31))
def test_gen_sym_eig_trace_invariant(n, seed):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((n, n))
    a = a + a.T
    b = random_spd(rng, n, cond=100.0)
    w, _ = numkit.gen_sym_eig(a, b)
    assert np.isclose(w.sum(), np.trace(np.linalg.solve(b, a)), rtol=1e-9, atol=1e-9)
    assert np.all(np.diff(w) <= 1e-12)


def test_mat_coth_scalar_and_limit():
    assert np.isclose(numkit.mat_coth_apply(np.array([[1.0]]))[0, 0], 1 / np.tanh(1.0), rtol=1e-14)
    big = numkit.mat_coth_apply(np.diag([30.0, 40.0]))
    assert np.allclose(big, np.eye(2), atol=1e-14)


def test_mat_coth_matches_scipy(rng):
    a = rng.standard_normal((5, 5))
    ref = sla.solve(sla.expm(2 * a) - np.eye(5), sla.expm(2 * a) + np.eye(5))
    assert np.allclose(numkit.mat_coth_apply(a), ref, rtol=1e-9)
