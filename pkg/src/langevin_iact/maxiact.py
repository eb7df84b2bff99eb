"""Worst-case IAcT over the span of a basis.

For ``u = basis . x`` the IAcT is the Rayleigh quotient
``x.D.x / x.C0.x``; its maximum is the top eigenvalue of the symmetric
generalised problem ``(D + D^T)/2 x = lam C0 x``.  ``D`` is assembled from
the bilinear acor numerator at a common number of reductions, chosen by one
of two rules (:func:`tau_max_algorithm1`, :func:`tau_max_algorithm2`).

:func:`tau2_max_over_basis` is a window-free alternative for phase-space
bases that needs only lag-0, lag-1 and replica-step second moments.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from . import iact, numkit
from .errors import DegenerateBasis, DegenerateCovariance, DenominatorNonPositive, TooShort
from .preobs import BasisSeries, BasisSet, center
from .propagate import ReplicaPair

log = logging.getLogger(__name__)

C0_RTOL = 1e-10


@dataclass(frozen=True)
class MaxIactResult:
    tau_max: float
    x: np.ndarray
    D: np.ndarray
    C0: np.ndarray
    spectrum: np.ndarray
    reducs_used: int
    retried: bool = False
    rank: int = 0
    positive: bool = True
    iterations: int = 1

    n_samples: int = 0

    @property
    def stderr(self) -> float:
        return iact.tau_stderr(self.tau_max, self.reducs_used, max(self.n_samples, 1))


@dataclass(frozen=True)
class Tau2Estimate:
    v_var: float
    lag1: float
    ttv: float
    tau2: float
    contraction_z: float = 0.0

    @property
    def contraction_ok(self) -> bool:
        """``<Tv,Tv> <= <v,v>`` holds within four standard errors."""
        return self.contraction_z <= 4.0


def _series_matrix(series) -> np.ndarray:
    X = series.values if isinstance(series, BasisSeries) else np.asarray(series, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.shape[1] < 1:
        raise DegenerateBasis("empty basis")
    return X


def estimate_matrices(series, reducs: int) -> tuple[np.ndarray, np.ndarray]:
    """``D`` and ``C0`` of a centred basis series at ``reducs`` reductions."""
    X = _series_matrix(series)
    n = X.shape[0]
    C0 = X.T @ X / n
    R = iact.reduce_times(X, reducs)
    _, Dr = iact.window_matrix(R)
    D = Dr / 2**reducs
    return 0.5 * (D + D.T), 0.5 * (C0 + C0.T)


def _retained(C0: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenpairs of ``C0`` kept by the relative threshold."""
    m = C0.shape[0]
    w, V = numkit.sym_eig(C0)
    cut = C0_RTOL * max(np.trace(C0), 0.0) / m
    keep = w > max(cut, 1e-300)
    return w[keep], V[:, keep]


def solve_max(D: np.ndarray, C0: np.ndarray) -> tuple[np.ndarray, np.ndarray, int]:
    """Maximise ``x.D.x / x.C0.x`` inside the numerically supported span of ``C0``.

    Directions of ``C0`` with eigenvalue below ``C0_RTOL * trace / m`` are
    dropped.  Returns the descending spectrum, the ``C0``-normalised
    eigenvectors (columns, original coordinates) and the retained rank.
    By Sylvester's law the spectrum has the same signs as the eigenvalues of
    ``D`` restricted to the retained subspace.
    """
    w, V = _retained(C0)
    if w.size == 0:
        raise DegenerateBasis("C0 has no retained directions")
    Ds = V.T @ (0.5 * (D + D.T)) @ V
    Ds = 0.5 * (Ds + Ds.T)
    spec, Y = numkit.gen_sym_eig(Ds, np.diag(w))
    X = V @ Y
    # unit C0-norm in the retained space
    norms = np.sqrt(np.einsum("ij,ij->j", Y, w[:, None] * Y))
    X = X / norms
    return spec, X, w.size


def _result(D, C0, reducs, retried, n, iterations=1, positive=True) -> MaxIactResult:
    spec, X, rank = solve_max(D, C0)
    return MaxIactResult(
        tau_max=float(spec[0]), x=X[:, 0], D=D, C0=C0, spectrum=spec, reducs_used=reducs,
        retried=retried, rank=rank, positive=positive, iterations=iterations, n_samples=n,
    )


def _column_estimates(X: np.ndarray) -> list[iact.IactEstimate | None]:
    out = []
    for j in range(X.shape[1]):
        try:
            out.append(iact.acor_tau(X[:, j]))
        except (iact.DegenerateSeries,):
            out.append(None)
    return out


def tau_max_algorithm1(series) -> MaxIactResult:
    """Common reducs = the largest per-column reducs; back off one reduction
    at a time while the symmetrised ``D`` has a non-positive eigenvalue on the
    retained subspace."""
    X = _series_matrix(series)
    n = X.shape[0]
    ests = [e for e in _column_estimates(X) if e is not None]
    if not ests:
        raise DegenerateBasis("every basis column is constant")
    reducs = max(e.reducs for e in ests)
    retried = False
    while True:
        D, C0 = estimate_matrices(X, reducs)
        spec, _, _ = solve_max(D, C0)
        if spec[-1] > 0:
            return _result(D, C0, reducs, retried, n)
        if reducs == 0:
            log.warning("D has a non-positive eigenvalue even without reductions; "
                        "more samples or a smaller step size may be needed")
            return _result(D, C0, reducs, retried, n, positive=False)
        reducs -= 1
        retried = True


def tau_max_algorithm2(series) -> MaxIactResult:
    """Start from the reducs of the column with the largest IAcT, then use the
    reducs chosen for the maximising combination until it stops decreasing."""
    X = _series_matrix(series)
    n = X.shape[0]
    ests = _column_estimates(X)
    valid = [e for e in ests if e is not None]
    if not valid:
        raise DegenerateBasis("every basis column is constant")
    reducs = max(valid, key=lambda e: e.tau).reducs
    iterations = 0
    while True:
        iterations += 1
        D, C0 = estimate_matrices(X, reducs)
        res = _result(D, C0, reducs, iterations > 1, n, iterations=iterations)
        new = iact.acor_tau(X @ res.x).reducs
        if new >= reducs or iterations > reducs:
            return res
        reducs = new


def tau2_from_replicas(pair: ReplicaPair, v) -> Tau2Estimate:
    """Window-free IAcT of ``(1 - T0) v`` from a replica chain.

    ``v`` is either a callable ``v(q, p)`` or a coefficient vector for a
    :class:`BasisSet` passed as ``(basis, x)``.
    """
    a, b = _scalar_pair_series(pair, v)
    return _tau2_from_series(a, b)


def _scalar_pair_series(pair: ReplicaPair, v):
    main = pair.main
    if callable(v):
        a = np.asarray(v(main.q, main.p), dtype=float)
        b = np.asarray(v(pair.replica_q, pair.replica_p), dtype=float)
    else:
        basis, x = v
        a = basis.evaluate(main.q, main.p) @ np.asarray(x, dtype=float)
        b = basis.evaluate(pair.replica_q, pair.replica_p) @ np.asarray(x, dtype=float)
    mu = a.mean()
    return a - mu, b - mu


def _tau2_from_series(a: np.ndarray, b: np.ndarray) -> Tau2Estimate:
    n = a.shape[0]
    if n < 3:
        raise TooShort("need at least three samples")
    v_var = float(a @ a) / n
    lag1 = float(a[:-1] @ a[1:]) / (n - 1)
    # a[n] and b[n] are independent successors of the same state
    ttv = float(a @ b) / n
    den = v_var - 2.0 * lag1 + ttv
    if not den > 0:
        raise DenominatorNonPositive(f"<(1-T)v,(1-T)v> estimate is {den:.3e}")
    diff = a * a - a * b
    diff = diff - diff.mean()
    try:
        est = iact.acor_tau(diff)
        se = math.sqrt(max(est.d_hat, 0.0) / diff.shape[0])
    except (iact.DegenerateSeries, TooShort):
        se = 0.0
    z = (ttv - v_var) / se if se > 0 else (math.inf if ttv > v_var else 0.0)
    return Tau2Estimate(v_var, lag1, ttv, (v_var - ttv) / den, z)


def tau2_matrices(pair: ReplicaPair, basis: BasisSet):
    """``V = <u,u^T>``, symmetrised ``L = <u,T u^T>`` and ``W = <Tu,Tu^T>``."""
    U = basis.evaluate(pair.main.q, pair.main.p)
    mu = U.mean(axis=0)
    A = U - mu
    B = basis.evaluate(pair.replica_q, pair.replica_p) - mu
    n = A.shape[0]
    V = A.T @ A / n
    L = A[:-1].T @ A[1:] / (n - 1)
    W = A.T @ B / n
    return 0.5 * (V + V.T), 0.5 * (L + L.T), 0.5 * (W + W.T)


def tau2_max_over_basis(pair: ReplicaPair, basis: BasisSet) -> MaxIactResult:
    """Maximum of ``x.(V-W).x / x.(V-2L+W).x`` over coefficient vectors."""
    V, L, W = tau2_matrices(pair, basis)
    num = V - W
    den = V - 2.0 * L + W
    den = 0.5 * (den + den.T)
    spec, X, rank = solve_max(num, den)
    return MaxIactResult(
        tau_max=float(spec[0]), x=X[:, 0], D=num, C0=den, spectrum=spec, reducs_used=0,
        rank=rank, n_samples=len(pair),
    )


def gamma_star(positions, mass=None, beta: float = 1.0) -> float:
    """Damping heuristic ``(beta * lambda_max(Cov[Q] M))^{-1/2}``."""
    Q = np.asarray(positions, dtype=float)
    if Q.ndim == 1:
        Q = Q[:, None]
    n, dim = Q.shape
    if n < 1000:
        raise TooShort("need at least 1000 position samples")
    cov = np.atleast_2d(np.cov(Q, rowvar=False))
    M = np.eye(dim) if mass is None else numkit.as_matrix(mass)
    Mh = numkit.cholesky(M)
    w, _ = numkit.sym_eig(Mh.T @ cov @ Mh)
    if not w[0] > 0:
        raise DegenerateCovariance("position covariance has no positive eigenvalue")
    return 1.0 / math.sqrt(beta * w[0])


def tau_max_of_values(values, names=(), algorithm: int = 1) -> MaxIactResult:
    """Convenience: centre raw basis values and run the chosen algorithm."""
    s = center(values, names)
    return tau_max_algorithm1(s) if algorithm == 1 else tau_max_algorithm2(s)
