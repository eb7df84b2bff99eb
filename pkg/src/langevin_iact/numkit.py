"""Small dense linear algebra kernels.

Everything here works on plain ``numpy`` float arrays of modest size (up to a
few dozen rows).  The routines favour robustness over speed: a cyclic Jacobi
eigensolver, an unblocked Cholesky factorization, Gaussian elimination with
partial pivoting, and a degree-13 Padé scaling-and-squaring matrix
exponential.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import NoConvergence, NotPositiveDefinite, Singular

__all__ = [
    "as_matrix",
    "cholesky",
    "solve",
    "solve_lower",
    "solve_upper",
    "sym_eig",
    "gen_sym_eig",
    "mat_exp",
    "mat_coth_apply",
]

TINY = 1e-300
SYM_RTOL = 1e-12
JACOBI_MAX_SWEEPS = 100
JACOBI_RTOL = 1e-12

# Padé(13) numerator coefficients, Higham (2005)
_PADE13 = (
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
)
_THETA13 = 5.371920351148152


def as_matrix(a) -> np.ndarray:
    """Return ``a`` as a finite 2-D float array (copy)."""
    m = np.array(a, dtype=float, copy=True)
    if m.ndim == 0:
        m = m.reshape(1, 1)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise ValueError(f"expected a non-empty 2-D matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def _square(a) -> np.ndarray:
    m = as_matrix(a)
    if m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    return m


def _check_symmetric(m: np.ndarray, rtol: float = SYM_RTOL) -> None:
    scale = max(np.abs(m).max(), TINY)
    if np.abs(m - m.T).max() > rtol * scale:
        raise ValueError("matrix is not symmetric")


def cholesky(a) -> np.ndarray:
    """Lower-triangular ``L`` with ``L @ L.T == a``.

    Raises :class:`NotPositiveDefinite` when a pivot is not strictly positive.
    """
    m = _square(a)
    _check_symmetric(m)
    n = m.shape[0]
    L = np.zeros_like(m)
    for j in range(n):
        pivot = m[j, j] - L[j, :j] @ L[j, :j]
        if not pivot > 0.0:
            raise NotPositiveDefinite(f"non-positive pivot {pivot:.3e} at column {j}")
        L[j, j] = math.sqrt(pivot)
        if j + 1 < n:
            L[j + 1 :, j] = (m[j + 1 :, j] - L[j + 1 :, :j] @ L[j, :j]) / L[j, j]
    return L


def solve_lower(L: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Forward substitution for ``L x = b`` (``b`` may have several columns)."""
    b = np.array(b, dtype=float, copy=True)
    n = L.shape[0]
    for i in range(n):
        b[i] = (b[i] - L[i, :i] @ b[:i]) / L[i, i]
    return b


def solve_upper(U: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Back substitution for ``U x = b``."""
    b = np.array(b, dtype=float, copy=True)
    n = U.shape[0]
    for i in range(n - 1, -1, -1):
        b[i] = (b[i] - U[i, i + 1 :] @ b[i + 1 :]) / U[i, i]
    return b


def solve(a, b) -> np.ndarray:
    """Solve ``a x = b`` by Gaussian elimination with partial pivoting.

    Raises :class:`Singular` when a pivot is negligible relative to the
    largest entry of its column block.
    """
    m = _square(a)
    rhs = np.array(b, dtype=float, copy=True)
    vector = rhs.ndim == 1
    if vector:
        rhs = rhs[:, None]
    n = m.shape[0]
    if rhs.shape[0] != n:
        raise ValueError("dimension mismatch")
    scale = max(np.abs(m).max(), TINY)
    tol = n * np.finfo(float).eps * scale
    for k in range(n):
        piv = k + int(np.argmax(np.abs(m[k:, k])))
        if abs(m[piv, k]) <= tol:
            raise Singular(f"matrix is numerically singular (pivot {m[piv, k]:.3e})")
        if piv != k:
            m[[k, piv]] = m[[piv, k]]
            rhs[[k, piv]] = rhs[[piv, k]]
        f = m[k + 1 :, k] / m[k, k]
        m[k + 1 :, k:] -= np.outer(f, m[k, k:])
        rhs[k + 1 :] -= np.outer(f, rhs[k])
    x = solve_upper(m, rhs)
    return x[:, 0] if vector else x


def _off_norm(m: np.ndarray) -> float:
    return float(np.linalg.norm(m - np.diag(np.diag(m))))


def sym_eig(a) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.

    Returns
    -------
    w : ndarray, shape (n,)
        Eigenvalues in descending order.
    V : ndarray, shape (n, n)
        Orthonormal eigenvectors stored as columns, ``a @ V = V @ diag(w)``.
    """
    m = _square(a)
    _check_symmetric(m, rtol=1e-10)
    m = 0.5 * (m + m.T)
    n = m.shape[0]
    V = np.eye(n)
    norm = max(np.linalg.norm(m), TINY)
    tol = JACOBI_RTOL * norm
    for _ in range(JACOBI_MAX_SWEEPS):
        off = _off_norm(m)
        if off <= tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = m[p, q]
                if abs(apq) <= TINY:
                    continue
                theta = (m[q, q] - m[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                mp = m[:, p].copy()
                mq = m[:, q].copy()
                m[:, p] = c * mp - s * mq
                m[:, q] = s * mp + c * mq
                mp = m[p, :].copy()
                mq = m[q, :].copy()
                m[p, :] = c * mp - s * mq
                m[q, :] = s * mp + c * mq
                vp = V[:, p].copy()
                vq = V[:, q].copy()
                V[:, p] = c * vp - s * vq
                V[:, q] = s * vp + c * vq
    else:
        off = _off_norm(m)
        if off > tol:
            raise NoConvergence(f"Jacobi did not converge in {JACOBI_MAX_SWEEPS} sweeps")
    w = np.diag(m).copy()
    order = np.argsort(-w, kind="stable")
    return w[order], V[:, order]


def gen_sym_eig(a, b) -> tuple[np.ndarray, np.ndarray]:
    """Solve ``a x = lam b x`` for symmetric ``a`` and SPD ``b``.

    Uses the Cholesky reduction ``b = L L^T``; the eigenvectors returned are
    ``b``-orthonormal (``X.T @ b @ X = I``), eigenvalues descending.
    """
    A = _square(a)
    B = _square(b)
    if A.shape != B.shape:
        raise ValueError("a and b must have the same shape")
    L = cholesky(B)
    Y = solve_lower(L, A)
    C = solve_lower(L, Y.T)
    C = 0.5 * (C + C.T)
    w, Z = sym_eig(C)
    X = solve_upper(L.T, Z)
    return w, X


def mat_exp(a, t: float = 1.0) -> np.ndarray:
    """``exp(t * a)`` by scaling and squaring with a [13/13] Padé approximant."""
    A = _square(a) * float(t)
    n = A.shape[0]
    norm1 = np.abs(A).sum(axis=0).max()
    s = 0
    if norm1 > _THETA13:
        s = int(math.ceil(math.log2(norm1 / _THETA13)))
        A = A / 2.0**s
    b = _PADE13
    ident = np.eye(n)
    A2 = A @ A
    A4 = A2 @ A2
    A6 = A4 @ A2
    U = A @ (A6 @ (b[13] * A6 + b[11] * A4 + b[9] * A2) + b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * ident)
    V = A6 @ (b[12] * A6 + b[10] * A4 + b[8] * A2) + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * ident
    E = solve(V - U, V + U)
    for _ in range(s):
        E = E @ E
    return E


def mat_coth_apply(a) -> np.ndarray:
    """Hyperbolic cotangent of a matrix, ``(E + I)(E - I)^{-1}`` with ``E = exp(2a)``.

    Computed as the solution ``X`` of ``(E - I) X = (E + I)``; the two factors
    commute so the order does not matter.  Raises :class:`Singular` when
    ``a`` has an eigenvalue at ``0`` (or ``i k pi``).
    """
    A = _square(a)
    n = A.shape[0]
    E = mat_exp(A, 2.0)
    ident = np.eye(n)
    return solve(E - ident, E + ident)
