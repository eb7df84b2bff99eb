"""Target distributions and simulation parameters.

Three potential families are supported:

* ``Quadratic`` -- ``V(q) = q.K.q / 2`` with SPD stiffness ``K``;
* ``LeMa`` -- the 1-D asymmetric multimodal potential ``q**4/4 + sin(1 + 5q)``;
* ``ThreeGauss`` -- ``-log`` of three unit Gaussians centred on the vertices
  of an equilateral triangle at distance ``d`` from the origin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import numkit

SQRT3 = math.sqrt(3.0)


def _spd(a, name: str) -> np.ndarray:
    m = numkit.as_matrix(a)
    numkit.cholesky(m)  # raises NotPositiveDefinite
    return m


@dataclass(frozen=True)
class SimParams:
    """Parameters for one Langevin chain.

    ``n_steps`` samples are recorded after ``burn_in`` discarded steps.
    ``mass`` defaults to the identity of the model dimension when ``None``.
    """

    gamma: float
    dt: float
    beta: float = 1.0
    mass: np.ndarray | None = None
    seed: int = 0
    burn_in: int = 50_000
    n_steps: int = 100_000
    no_noise: bool = False

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")
        if not self.beta > 0:
            raise ValueError("beta must be positive")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.n_steps < 1:
            raise ValueError("n_steps must be >= 1")
        if self.burn_in < 0:
            raise ValueError("burn_in must be >= 0")
        if self.mass is not None:
            object.__setattr__(self, "mass", _spd(self.mass, "mass"))

    def mass_matrix(self, dim: int) -> np.ndarray:
        if self.mass is None:
            return np.eye(dim)
        if self.mass.shape != (dim, dim):
            raise ValueError(f"mass matrix shape {self.mass.shape} does not match dimension {dim}")
        return self.mass

    def mass_factor(self, dim: int) -> np.ndarray:
        """Lower Cholesky factor ``M_h`` with ``M_h M_h^T = M``."""
        return numkit.cholesky(self.mass_matrix(dim))

    def replace(self, **changes) -> "SimParams":
        kw = {
            "gamma": self.gamma,
            "dt": self.dt,
            "beta": self.beta,
            "mass": self.mass,
            "seed": self.seed,
            "burn_in": self.burn_in,
            "n_steps": self.n_steps,
            "no_noise": self.no_noise,
        }
        kw.update(changes)
        return SimParams(**kw)


@dataclass(frozen=True)
class PhasePoint:
    q: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        q = np.atleast_1d(np.asarray(self.q, dtype=float))
        p = np.atleast_1d(np.asarray(self.p, dtype=float))
        if q.shape != p.shape or q.ndim != 1:
            raise ValueError("q and p must be 1-D vectors of equal length")
        if not (np.all(np.isfinite(q)) and np.all(np.isfinite(p))):
            raise ValueError("phase point has non-finite entries")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "p", p)

    @property
    def dim(self) -> int:
        return self.q.shape[0]

    @classmethod
    def zeros(cls, dim: int) -> "PhasePoint":
        return cls(np.zeros(dim), np.zeros(dim))


class PotentialModel:
    """Energy/force pair.  Subclasses provide vectorised ``energy`` and ``force``.

    Both methods accept a single position of shape ``(dim,)`` or a batch of
    shape ``(n, dim)``.
    """

    dim: int
    kind: str

    def _check(self, q) -> np.ndarray:
        q = np.asarray(q, dtype=float)
        if q.shape[-1:] != (self.dim,):
            raise ValueError(f"expected positions with last axis {self.dim}, got {q.shape}")
        return q

    def energy(self, q):
        raise NotImplementedError

    def force(self, q):
        raise NotImplementedError

    def describe(self) -> dict:
        return {"model": self.kind}


@dataclass(frozen=True, eq=False)
class Quadratic(PotentialModel):
    K: np.ndarray = field(default_factory=lambda: np.eye(1))
    kind = "quadratic"

    def __post_init__(self):
        K = numkit.as_matrix(self.K)
        if K.shape[0] != K.shape[1]:
            raise ValueError("K must be square")
        # K = 0 is allowed as a free-particle testing case
        if np.any(K):
            K = _spd(K, "K")
        object.__setattr__(self, "K", K)

    @property
    def dim(self) -> int:
        return self.K.shape[0]

    def energy(self, q):
        q = self._check(q)
        return 0.5 * np.einsum("...i,ij,...j->...", q, self.K, q)

    def force(self, q):
        q = self._check(q)
        return -q @ self.K.T

    def frequencies_sq(self, mass=None) -> np.ndarray:
        """Eigenvalues of ``M^{-1} K`` (the squared normal-mode frequencies)."""
        M = np.eye(self.dim) if mass is None else numkit.as_matrix(mass)
        w, _ = numkit.gen_sym_eig(self.K, M)
        return w[::-1]

    def describe(self) -> dict:
        return {"model": self.kind, "K": self.K.tolist()}


@dataclass(frozen=True, eq=False)
class LeMa(PotentialModel):
    kind = "lema"
    dim = 1

    def energy(self, q):
        x = self._check(q)[..., 0]
        return 0.25 * x**4 + np.sin(1.0 + 5.0 * x)

    def force(self, q):
        q = self._check(q)
        x = q[..., 0]
        return (-(x**3) - 5.0 * np.cos(1.0 + 5.0 * x))[..., None]


@dataclass(frozen=True, eq=False)
class ThreeGauss(PotentialModel):
    d: float = 4.8
    kind = "three-gauss"
    dim = 2

    def __post_init__(self):
        if not self.d >= 0:
            raise ValueError("separation d must be >= 0")

    @property
    def centers(self) -> np.ndarray:
        d = self.d
        return np.array([[d, 0.0], [-d / 2, SQRT3 * d / 2], [-d / 2, -SQRT3 * d / 2]])

    def _logterms(self, q):
        diff = q[..., None, :] - self.centers
        return -0.5 * np.sum(diff * diff, axis=-1), diff

    def energy(self, q):
        q = self._check(q)
        e, _ = self._logterms(q)
        top = e.max(axis=-1)
        return -(top + np.log(np.exp(e - top[..., None]).sum(axis=-1)))

    def force(self, q):
        q = self._check(q)
        e, diff = self._logterms(q)
        w = np.exp(e - e.max(axis=-1, keepdims=True))
        w /= w.sum(axis=-1, keepdims=True)
        return -np.einsum("...k,...ki->...i", w, diff)

    def describe(self) -> dict:
        return {"model": self.kind, "d": self.d}


def energy(model: PotentialModel, q):
    return model.energy(q)


def force(model: PotentialModel, q):
    return model.force(q)
