"""Closed-form IAcTs for a harmonic mode sampled with the exact propagator.

Everything is in dimensionless variables: ``gamma`` stands for the damping
divided by the mode frequency and ``dt`` for the frequency times the step.
In these units the stationary distribution is the standard normal in
``(q, p)`` and the degree-``k`` Hermite products
``He_{k-j}(q) He_j(p)`` span a subspace mapped into itself by the dynamics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import numkit
from .errors import AllZero

# damping that minimises the phase-space maximum IAcT, in units of omega_1
PHASE_SPACE_OPTIMAL_RATIO = math.sqrt(6.0) / 2.0


@dataclass(frozen=True)
class ModeSpec:
    k: int
    gamma: float
    dt: float

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")
        if not self.dt > 0:
            raise ValueError("dt must be positive")


def build_A(k: int, gamma: float) -> np.ndarray:
    """Matrix of the generator's adjoint on the degree-``k`` Hermite block.

    Column ``j`` (basis function ``He_{k-j}(q) He_j(p)``) has ``-j gamma`` on
    the diagonal, ``j`` just above it and ``-(k-j)`` just below it, so
    ``A_1 = [[0, 1], [-1, -gamma]]``.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    A = np.zeros((k + 1, k + 1))
    for j in range(k + 1):
        A[j, j] = -j * gamma
        if j >= 1:
            A[j - 1, j] = j
        if j < k:
            A[j + 1, j] = -(k - j)
    return A


def c_k0(k: int) -> np.ndarray:
    """Gram matrix of the degree-``k`` block: ``diag((k-j)! j!)``."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return np.diag([float(math.factorial(k - j) * math.factorial(j)) for j in range(k + 1)])


def build_B(k: int, gamma: float) -> np.ndarray:
    """Matrix of the generator itself on the block, ``C^{-1} A^T C``."""
    C = c_k0(k)
    return np.diag(1.0 / np.diag(C)) @ build_A(k, gamma).T @ C


def d_k(spec: ModeSpec) -> np.ndarray:
    """``D_k = -coth(dt/2 A_k^T) C_{k,0}``, the IAcT numerator matrix of the block."""
    A = build_A(spec.k, spec.gamma)
    return numkit.mat_coth_apply(-(spec.dt / 2.0) * A.T) @ c_k0(spec.k)


def tau_hermite(spec: ModeSpec) -> float:
    """Exact IAcT of ``He_k(q)``: the (1,1) entry of ``coth(-dt/2 A_k)``."""
    A = build_A(spec.k, spec.gamma)
    return float(numkit.mat_coth_apply(-(spec.dt / 2.0) * A)[0, 0])


def tau_of_expansion(coeffs, gamma: float, dt: float) -> float:
    """IAcT of ``u(q) = sum_k c_k He_k(q)``; ``coeffs[k-1]`` is ``c_k``.

    The blocks are mutually orthogonal, so the result is the
    ``k! c_k^2``-weighted mean of the per-degree IAcTs.
    """
    c = np.asarray(coeffs, dtype=float)
    num = 0.0
    den = 0.0
    for k, ck in enumerate(c, start=1):
        if ck == 0.0:
            continue
        w = math.factorial(k) * ck * ck
        num += w * tau_hermite(ModeSpec(k, gamma, dt))
        den += w
    if den == 0.0:
        raise AllZero("all expansion coefficients vanish")
    return num / den


def tau_max_block(spec: ModeSpec) -> float:
    """Largest IAcT over the whole degree-``k`` phase-space block."""
    D = d_k(spec)
    w, _ = numkit.gen_sym_eig(0.5 * (D + D.T), c_k0(spec.k))
    return float(w[0])


def t_leading(k: int, gamma: float) -> float:
    """Leading coefficient ``T_k`` in ``tau(He_k) = T_k / dt + O(dt)``."""
    A = build_A(k, gamma)
    e1 = np.zeros(k + 1)
    e1[0] = 1.0
    return float(-2.0 * numkit.solve(A, e1)[0])


def t_max(gamma: float) -> float:
    return max(t_leading(1, gamma), t_leading(2, gamma))


def optimal_gamma(omega1: float) -> float:
    """Damping minimising the configurational maximum IAcT: the lowest frequency."""
    if not omega1 > 0:
        raise ValueError("omega1 must be positive")
    return float(omega1)


def phase_space_optimal_gamma(omega1: float) -> float:
    if not omega1 > 0:
        raise ValueError("omega1 must be positive")
    return PHASE_SPACE_OPTIMAL_RATIO * omega1


def lag_correlation(gamma: float, dt: float, lag: int) -> float:
    """Stationary ``corr(q_0, q_lag)`` of the exact chain (``(e^{lag dt A})_{11}``)."""
    from .propagate import ou_transition

    E, _ = ou_transition(gamma, 1.0, dt)
    return float(np.linalg.matrix_power(E, lag)[0, 0])
