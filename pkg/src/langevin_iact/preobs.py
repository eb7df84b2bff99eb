"""Preobservables: basis functions evaluated along trajectories."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import EmptyBasis
from .propagate import Trajectory

SQRT3 = math.sqrt(3.0)

# f(q, p) -> values, with q, p of shape (N, dim)
BasisFn = Callable[[np.ndarray, np.ndarray], np.ndarray]


def hermite(k: int, x):
    """Probabilists' Hermite polynomial ``He_k`` by the three-term recurrence."""
    if k < 0:
        raise ValueError("degree must be >= 0")
    x = np.asarray(x, dtype=float)
    prev = np.ones_like(x)
    if k == 0:
        return prev if prev.ndim else float(prev)
    cur = x.copy()
    for j in range(1, k):
        prev, cur = cur, x * cur - j * prev
    return cur if cur.ndim else float(cur)


@dataclass(frozen=True)
class Hermite1D:
    """``He_1(q), ..., He_max_degree(q)`` of a scalar position."""

    max_degree: int


@dataclass(frozen=True)
class PhaseHermite:
    """The degree-``k`` block ``He_{k-j}(q) He_j(p)``, ``j = 0..k``."""

    k: int


@dataclass(frozen=True)
class Monomials:
    """All monomials of total degree 1..max_degree.

    Variables are the positions, or positions then momenta when
    ``positions_only`` is false.  Ordered by degree, then lexicographically
    with the first variable's exponent descending (``x, y, x^2, xy, y^2``).
    """

    dimension: int
    max_degree: int
    positions_only: bool = True


@dataclass(frozen=True)
class Indicators:
    """Conformation indicators.  ``partition="three-gauss"`` gives the sets
    A, B, C of the three-well target; ``members`` selects a subset."""

    partition: str = "three-gauss"
    members: tuple[str, ...] = ("A", "B", "C")


@dataclass(frozen=True)
class Custom:
    functions: tuple[tuple[str, BasisFn], ...] = field(default_factory=tuple)
    positions_only: bool = True


@dataclass(frozen=True)
class BasisSet:
    descriptor: object
    names: tuple[str, ...]
    functions: tuple[BasisFn, ...]
    dimension: int | None
    positions_only: bool

    @property
    def size(self) -> int:
        return len(self.functions)

    def __len__(self) -> int:
        return self.size

    def evaluate(self, q, p=None) -> np.ndarray:
        """Raw (uncentred) values, shape ``(N, m)``."""
        q = np.atleast_2d(np.asarray(q, dtype=float))
        p = np.zeros_like(q) if p is None else np.atleast_2d(np.asarray(p, dtype=float))
        if self.dimension is not None and q.shape[1] != self.dimension:
            raise ValueError(f"basis expects dimension {self.dimension}, got {q.shape[1]}")
        out = np.empty((q.shape[0], self.size))
        for j, fn in enumerate(self.functions):
            out[:, j] = fn(q, p)
        return out


def _three_gauss_sets(q: np.ndarray) -> np.ndarray:
    """Label 0/1/2 for A/B/C, first match wins on the shared boundaries."""
    x, y = q[:, 0], q[:, 1]
    in_a = np.abs(y) <= SQRT3 * x
    in_b = (y >= 0) & (y >= SQRT3 * x)
    return np.where(in_a, 0, np.where(in_b, 1, 2))


def _monomial_exponents(nvars: int, degree: int):
    for total in range(1, degree + 1):
        combos = [c for c in itertools.product(range(total, -1, -1), repeat=nvars) if sum(c) == total]
        yield from combos


def _monomial_fn(exps, dim):
    def fn(q, p):
        z = np.hstack([q, p])[:, : len(exps)]
        out = np.ones(q.shape[0])
        for i, e in enumerate(exps):
            if e:
                out = out * z[:, i] ** e
        return out

    return fn


def _monomial_name(exps, names):
    parts = []
    for n, e in zip(names, exps):
        if e == 1:
            parts.append(n)
        elif e > 1:
            parts.append(f"{n}^{e}")
    return "*".join(parts)


def build_basis(descriptor) -> BasisSet:
    if isinstance(descriptor, Hermite1D):
        if descriptor.max_degree < 1:
            raise EmptyBasis("Hermite1D needs max_degree >= 1")
        fns = tuple((lambda q, p, k=k: hermite(k, q[:, 0])) for k in range(1, descriptor.max_degree + 1))
        names = tuple(f"He{k}(q)" for k in range(1, descriptor.max_degree + 1))
        return BasisSet(descriptor, names, fns, 1, True)

    if isinstance(descriptor, PhaseHermite):
        k = descriptor.k
        if k < 1:
            raise EmptyBasis("PhaseHermite needs k >= 1")
        fns = tuple((lambda q, p, j=j: hermite(k - j, q[:, 0]) * hermite(j, p[:, 0])) for j in range(k + 1))
        names = tuple(f"He{k - j}(q)He{j}(p)" for j in range(k + 1))
        return BasisSet(descriptor, names, fns, 1, False)

    if isinstance(descriptor, Monomials):
        dim, deg = descriptor.dimension, descriptor.max_degree
        if deg < 1:
            raise EmptyBasis("Monomials needs max_degree >= 1")
        if dim < 1:
            raise ValueError("dimension must be >= 1")
        nvars = dim if descriptor.positions_only else 2 * dim
        if dim == 1:
            vnames = ["q", "p"]
        elif dim == 2:
            vnames = ["x", "y", "px", "py"]
        else:
            vnames = [f"q{i}" for i in range(dim)] + [f"p{i}" for i in range(dim)]
        exps = list(_monomial_exponents(nvars, deg))
        fns = tuple(_monomial_fn(e, dim) for e in exps)
        names = tuple(_monomial_name(e, vnames) for e in exps)
        return BasisSet(descriptor, names, fns, dim, descriptor.positions_only)

    if isinstance(descriptor, Indicators):
        if descriptor.partition != "three-gauss":
            raise ValueError(f"unknown partition {descriptor.partition!r}")
        if not descriptor.members:
            raise EmptyBasis("no indicator members selected")
        labels = {"A": 0, "B": 1, "C": 2}
        fns = []
        for m in descriptor.members:
            if m not in labels:
                raise ValueError(f"unknown conformation {m!r}")
            fns.append(lambda q, p, c=labels[m]: (_three_gauss_sets(q) == c).astype(float))
        names = tuple(f"1_{m}" for m in descriptor.members)
        return BasisSet(descriptor, names, tuple(fns), 2, True)

    if isinstance(descriptor, Custom):
        if not descriptor.functions:
            raise EmptyBasis("custom basis has no functions")
        names = tuple(n for n, _ in descriptor.functions)
        fns = tuple(f for _, f in descriptor.functions)
        return BasisSet(descriptor, names, fns, None, descriptor.positions_only)

    raise TypeError(f"unknown basis descriptor {descriptor!r}")


@dataclass(frozen=True)
class BasisSeries:
    """Column-centred basis evaluations, shape ``(N, m)``."""

    values: np.ndarray
    means: np.ndarray
    names: tuple[str, ...] = ()
    degenerate: np.ndarray | None = None

    @property
    def n_samples(self) -> int:
        return self.values.shape[0]

    @property
    def size(self) -> int:
        return self.values.shape[1]

    def column(self, j: int) -> np.ndarray:
        return self.values[:, j]

    def combine(self, x) -> np.ndarray:
        """The centred scalar series of the preobservable ``u . x``."""
        return self.values @ np.asarray(x, dtype=float)


def center(values, names=()) -> BasisSeries:
    values = np.array(values, dtype=float)
    if values.ndim == 1:
        values = values[:, None]
    means = values.mean(axis=0)
    values -= means
    scale = np.maximum(np.abs(means), 1.0)
    degenerate = np.all(np.abs(values) <= 1e-12 * scale, axis=0)
    return BasisSeries(values, means, tuple(names), degenerate)


def evaluate_series(basis: BasisSet, traj: Trajectory) -> BasisSeries:
    return center(basis.evaluate(traj.q, traj.p), basis.names)
