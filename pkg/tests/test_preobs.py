import math

import numpy as np
import pytest

from langevin_iact.errors import EmptyBasis
from langevin_iact.iact import acor_tau
from langevin_iact.model import Quadratic, SimParams
from langevin_iact.preobs import (
    Custom,
    Hermite1D,
    Indicators,
    Monomials,
    PhaseHermite,
    build_basis,
    center,
    evaluate_series,
    hermite,
)
from langevin_iact.propagate import simulate


@pytest.fixture(scope="module")
def ou_traj():
    prm = SimParams(gamma=2.0, dt=0.5, n_steps=400_000, seed=8)
    return simulate(Quadratic(np.eye(1)), prm, "ou-exact")


def se_of(x):
    x = x - x.mean()
    return math.sqrt(acor_tau(x).tau * x.var() / x.size)


def test_hermite_values():
    assert hermite(2, 0.0) == -1.0
    assert hermite(3, 2.0) == 2.0
    assert np.array_equal(hermite(0, np.array([3.0, -1.0])), [1.0, 1.0])
    x = np.linspace(-2, 2, 9)
    assert np.allclose(hermite(4, x), x**4 - 6 * x**2 + 3)


def test_monomial_count_and_order():
    b = build_basis(Monomials(2, 2))
    assert b.size == 5
    assert b.names == ("x", "y", "x^2", "x*y", "y^2")
    q = np.array([[2.0, 3.0]])
    assert np.allclose(b.evaluate(q), [[2, 3, 4, 6, 9]])
    assert build_basis(Monomials(1, 7)).size == 7
    assert build_basis(Monomials(1, 2, positions_only=False)).size == 5


def test_indicator_sets():
    b = build_basis(Indicators())
    q = np.array([[1.0, 0.0], [0.0, 1.0], [0.0, -1.0]])
    assert np.array_equal(b.evaluate(q), np.eye(3))
    pts = np.random.default_rng(0).normal(scale=3, size=(1000, 2))
    assert np.all(b.evaluate(pts).sum(axis=1) == 1.0)


def test_empty_bases_rejected():
    for d in (Hermite1D(0), PhaseHermite(0), Monomials(1, 0), Indicators(members=()), Custom(())):
        with pytest.raises(EmptyBasis):
            build_basis(d)


def test_constant_custom_is_degenerate():
    b = build_basis(Custom((("one", lambda q, p: np.ones(q.shape[0])),)))
    s = center(b.evaluate(np.zeros((10, 1))), b.names)
    assert np.all(s.values == 0.0) and s.degenerate[0]


def test_single_function_centres(ou_traj):
    b = build_basis(Custom((("q", lambda q, p: q[:, 0]),)))
    s = evaluate_series(b, ou_traj)
    assert np.allclose(s.column(0), ou_traj.q[:, 0] - ou_traj.q[:, 0].mean())


def test_phase_hermite_means_vanish(ou_traj):
    b = build_basis(PhaseHermite(2))
    assert b.names == ("He2(q)He0(p)", "He1(q)He1(p)", "He0(q)He2(p)")
    U = b.evaluate(ou_traj.q, ou_traj.p)
    for j in range(3):
        assert abs(U[:, j].mean()) <= 4 * se_of(U[:, j])


def test_hermite_orthogonality_under_exact_sampler(ou_traj):
    q = ou_traj.q[:, 0]
    for j in range(1, 4):
        for k in range(j, 4):
            f = hermite(j, q) * hermite(k, q)
            target = math.factorial(k) if j == k else 0.0
            assert abs(f.mean() - target) <= 4 * se_of(f)


def test_dimension_check():
    b = build_basis(Indicators())
    with pytest.raises(ValueError):
        b.evaluate(np.zeros((3, 1)))
