"""Integrated autocorrelation time by recursive pairwise reduction.

This is the acor scheme: sum a windowed autocovariance over lags
``0..MAXLAG``; if the resulting estimate is long compared with the window
(``tau * WINMULT > MAXLAG``) replace the series by sums of consecutive pairs
and try again.  The asymptotic-variance numerator estimated on the reduced
series is rescaled by ``2**reducs`` so it refers to the original series, and
the IAcT is that numerator divided by the lag-0 variance of the original.

The bilinear version :func:`cross_D` applies the same reductions to two
series in lockstep, which is what the matrix estimators need.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSeries, LagTooLarge, TooShort

MAXLAG = 10
WINMULT = 5
MINFAC = 10


@dataclass(frozen=True)
class IactEstimate:
    tau: float
    reducs: int
    d_hat: float
    c0_hat: float
    n_effective: int
    reliable: bool = True

    @property
    def stderr(self) -> float:
        return tau_stderr(self.tau, self.reducs, self.n_effective * 2**self.reducs)


def tau_stderr(tau: float, reducs: int, n: int) -> float:
    """Asymptotic standard error of a windowed IAcT estimate.

    Uses the large-sample formula ``Var[tau_hat] ~ 2 (2W + 1) tau^2 / N``
    with effective window ``W = MAXLAG * 2**reducs`` lags of the original
    series.
    """
    window = MAXLAG * 2**reducs
    return abs(tau) * math.sqrt(2.0 * (2 * window + 1) / n)


def _as_series(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError("expected a 1-D series")
    return x


def cross_cov(a, b, k: int) -> float:
    """Lag-``k`` cross covariance ``sum_n a[n] b[n+k] / (N - k)`` of centred series."""
    a = _as_series(a)
    b = _as_series(b)
    if a.shape != b.shape:
        raise ValueError("series lengths differ")
    n = a.shape[0]
    if k < 0:
        raise ValueError("lag must be >= 0")
    if k >= n:
        raise LagTooLarge(f"lag {k} needs more than {n} samples")
    return float(a[: n - k] @ b[k:]) / (n - k)


def reduce(x) -> np.ndarray:
    """Sums of consecutive pairs; an odd trailing element is dropped."""
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    if n < 2:
        raise TooShort("need at least two samples to reduce")
    h = n // 2
    return x[: 2 * h : 2] + x[1 : 2 * h : 2]


def _reduce_centered(x: np.ndarray) -> np.ndarray:
    y = reduce(x)
    return y - y.mean(axis=0)


def _window_sum(x: np.ndarray) -> tuple[float, float]:
    """``(C(0), C(0) + 2 sum_{k=1..MAXLAG} C(k))`` of a centred series."""
    n = x.shape[0]
    if n <= MAXLAG:
        raise TooShort(f"series of length {n} is shorter than the lag window")
    c0 = float(x @ x) / n
    d = c0
    for k in range(1, MAXLAG + 1):
        d += 2.0 * float(x[: n - k] @ x[k:]) / (n - k)
    return c0, d


def window_matrix(X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Lag-0 covariance matrix and the symmetrised windowed sum
    ``C(0) + sum_{k=1..MAXLAG} [C(k) + C(k)^T]`` for the columns of ``X``."""
    n = X.shape[0]
    if n <= MAXLAG:
        raise TooShort(f"series of length {n} is shorter than the lag window")
    c0 = X.T @ X / n
    d = c0.copy()
    for k in range(1, MAXLAG + 1):
        ck = X[: n - k].T @ X[k:] / (n - k)
        d += ck + ck.T
    return c0, d


def reduce_times(X: np.ndarray, reducs: int) -> np.ndarray:
    """Apply ``reducs`` centred pairwise reductions along axis 0."""
    for _ in range(reducs):
        if X.shape[0] < 2:
            raise TooShort("series exhausted by reductions")
        X = _reduce_centered(X)
    return X


def acor_tau(series, forced_reducs: int | None = None) -> IactEstimate:
    """IAcT estimate of a centred scalar series.

    With ``forced_reducs`` the given number of reductions is applied and the
    reliability test is skipped.
    """
    x = _as_series(series)
    n = x.shape[0]
    if forced_reducs is None and n < MINFAC * MAXLAG:
        raise TooShort(f"need at least {MINFAC * MAXLAG} samples, got {n}")
    c0 = float(x @ x) / n
    if not c0 > 0:
        raise DegenerateSeries("series has zero variance")

    if forced_reducs is not None:
        if forced_reducs < 0:
            raise ValueError("reducs must be >= 0")
        s = reduce_times(x, forced_reducs)
        _, d = _window_sum(s)
        d_hat = d / 2**forced_reducs
        return IactEstimate(d_hat / c0, forced_reducs, d_hat, c0, s.shape[0], True)

    s = x
    r = 0
    reliable = False
    while True:
        cs, d = _window_sum(s)
        tau_level = d / cs if cs > 0 else 0.0
        if tau_level * WINMULT <= MAXLAG:
            reliable = True
            break
        if s.shape[0] // 2 < MINFAC * MAXLAG:
            break
        s = _reduce_centered(s)
        r += 1
    d_hat = d / 2**r
    return IactEstimate(d_hat / c0, r, d_hat, c0, s.shape[0], reliable)


def cross_D(a, b, reducs: int) -> float:
    """Symmetrised windowed cross numerator ``(D_ab + D_ba) / 2`` after
    ``reducs`` lockstep reductions, rescaled to the original series."""
    a = _as_series(a)
    b = _as_series(b)
    if a.shape != b.shape:
        raise ValueError("series lengths differ")
    X = reduce_times(np.column_stack([a, b]), reducs)
    _, d = window_matrix(X)
    return float(0.5 * (d[0, 1] + d[1, 0])) / 2**reducs
