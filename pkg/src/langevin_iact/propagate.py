"""Markov chain generators: BAOAB, BAOAB with a one-step replica, and the
exact Ornstein-Uhlenbeck propagator for a scalar harmonic mode.

Random numbers
--------------
Every chain owns a PCG64 bit generator seeded from
``SeedSequence(seed, spawn_key=(chain, stream))``; stream 0 drives the chain
and stream 1 drives the replica noise.  Normal variates come from numpy's
``Generator.standard_normal`` (the ziggurat method), drawn in blocks of
``BLOCK`` steps.  A given ``(seed, chain)`` therefore reproduces the same
trajectory bit for bit on any platform with the same numpy version.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _kernels as K
from . import numkit
from .errors import CovarianceNotPSD, NonFinite
from .model import LeMa, PhasePoint, PotentialModel, Quadratic, SimParams, ThreeGauss

BLOCK = 1 << 16
STEPPERS = ("baoab", "ou-exact")


def chain_rng(seed: int, chain: int = 0, stream: int = 0) -> np.random.Generator:
    """Independent generator for ``(seed, chain, stream)``."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(chain), int(stream)))
    return np.random.Generator(np.random.PCG64(ss))


@dataclass(frozen=True)
class Trajectory:
    """Recorded states ``q[n], p[n]`` (arrays of shape ``(N, dim)``)."""

    q: np.ndarray
    p: np.ndarray
    params: SimParams
    model: dict

    def __len__(self) -> int:
        return self.q.shape[0]

    @property
    def dim(self) -> int:
        return self.q.shape[1]

    def state(self, n: int) -> PhasePoint:
        return PhasePoint(self.q[n], self.p[n])

    @property
    def states(self) -> list[PhasePoint]:
        return [self.state(n) for n in range(len(self))]


@dataclass(frozen=True)
class ReplicaPair:
    """A chain plus, for each recorded step, an independent alternative
    successor of the previous state (``replica_q[n]``, ``replica_p[n]``)."""

    main: Trajectory
    replica_q: np.ndarray
    replica_p: np.ndarray

    def __len__(self) -> int:
        return len(self.main)


def _kernel_spec(model: PotentialModel) -> tuple[int, np.ndarray]:
    if isinstance(model, Quadratic):
        return K.QUADRATIC, np.ascontiguousarray(model.K, dtype=float).ravel()
    if isinstance(model, LeMa):
        return K.LEMA, np.zeros(1)
    if isinstance(model, ThreeGauss):
        return K.THREE_GAUSS, np.array([float(model.d)])
    raise TypeError(f"no compiled force for {type(model).__name__}")


class _Baoab:
    def __init__(self, model: PotentialModel, params: SimParams):
        self.model = model
        self.params = params
        self.dim = model.dim
        self.code, self.prm = _kernel_spec(model)
        M = params.mass_matrix(self.dim)
        self.minv = np.ascontiguousarray(numkit.solve(M, np.eye(self.dim)))
        self.mh = np.ascontiguousarray(params.mass_factor(self.dim))
        self.c1 = math.exp(-params.gamma * params.dt)
        self.c3 = 0.0 if params.no_noise else math.sqrt((1.0 - self.c1 * self.c1) / params.beta)

    def init_state(self, z: PhasePoint):
        q = z.q.astype(float).copy()
        p = z.p.astype(float).copy()
        f = np.empty(self.dim)
        K.force_into(self.code, self.prm, q, f)
        return q, p, f

    def run(self, state, noise, q_out, p_out, stride, record):
        q, p, f = state
        bad = K.baoab_block(
            self.code, self.prm, q, p, f, self.minv, self.mh, self.params.dt,
            self.c1, self.c3, noise, q_out, p_out, stride, record,
        )
        if bad >= 0:
            raise NonFinite(f"BAOAB state became non-finite (dt={self.params.dt} may be unstable)")

    def run_replica(self, state, noise, noise2, q_out, p_out, q2_out, p2_out):
        q, p, f = state
        bad = K.baoab_replica_block(
            self.code, self.prm, q, p, f, self.minv, self.mh, self.params.dt,
            self.c1, self.c3, noise, noise2, q_out, p_out, q2_out, p2_out,
        )
        if bad >= 0:
            raise NonFinite(f"BAOAB state became non-finite (dt={self.params.dt} may be unstable)")


def _damped_parts(g: float, t: float) -> tuple[float, float]:
    """``exp(-g t/2) cosh(delta t/2)`` and ``exp(-g t/2) sinhc(delta t/2)``
    with ``delta = sqrt(g^2 - 4)`` real, zero, or imaginary."""
    disc = g * g - 4.0
    decay = -0.5 * g * t
    if abs(disc) < 1e-12:
        e = math.exp(decay)
        return e, e
    if disc > 0:
        x = 0.5 * math.sqrt(disc) * t
        if x < 1e-3:
            e = math.exp(decay)
            return e * math.cosh(x), e * (1.0 + x * x / 6.0 + x**4 / 120.0)
        up = math.exp(decay + x)
        dn = math.exp(decay - x)
        return 0.5 * (up + dn), 0.5 * (up - dn) / x
    th = 0.5 * math.sqrt(-disc) * t
    e = math.exp(decay)
    sinc = 1.0 - th * th / 6.0 + th**4 / 120.0 if th < 1e-3 else math.sin(th) / th
    return e * math.cos(th), e * sinc


def ou_transition(gamma: float, omega: float, dt: float, beta: float = 1.0, mass: float = 1.0):
    """Exact one-step mean map and noise covariance for
    ``dQ = P/m dt, dP = -m omega^2 Q dt - gamma P dt + sqrt(2 gamma m / beta) dW``.

    Returns ``(E, Sigma)`` with ``Z_{n+1} = E Z_n + R``, ``R ~ N(0, Sigma)``.
    The closed forms are evaluated in the dimensionless variables
    ``gamma/omega``, ``omega dt`` where the stationary covariance is ``I``.
    """
    if not (gamma > 0 and omega > 0 and dt > 0):
        raise ValueError("gamma, omega and dt must be positive")
    g = gamma / omega
    t = omega * dt
    ech, esc = _damped_parts(g, t)
    E = ech * np.eye(2) + 0.5 * t * esc * np.array([[g, 2.0], [-2.0, -g]])
    Sigma = (
        -math.expm1(-g * t) * np.eye(2)
        - 0.5 * g * t * t * esc * esc * np.array([[g, -2.0], [-2.0, g]])
        + g * t * esc * ech * np.array([[-1.0, 0.0], [0.0, 1.0]])
    )
    s = np.array([math.sqrt(beta * mass) * omega, math.sqrt(beta / mass)])
    E = E * s[None, :] / s[:, None]
    Sigma = Sigma / np.outer(s, s)
    return E, Sigma


def _chol2(S: np.ndarray) -> np.ndarray:
    scale = max(abs(S[0, 0]), abs(S[1, 1]), 1e-300)
    tol = 1e-12 * scale
    if S[0, 0] < -tol:
        raise CovarianceNotPSD(f"negative variance {S[0, 0]:.3e}")
    l00 = math.sqrt(max(S[0, 0], 0.0))
    l10 = S[1, 0] / l00 if l00 > 0 else 0.0
    rest = S[1, 1] - l10 * l10
    if rest < -tol:
        raise CovarianceNotPSD(f"covariance not PSD (Schur complement {rest:.3e})")
    return np.array([[l00, 0.0], [l10, math.sqrt(max(rest, 0.0))]])


class _OuExact:
    def __init__(self, params: SimParams, omega: float):
        m = params.mass_matrix(1)[0, 0]
        self.params = params
        self.dim = 1
        self.trans, sigma = ou_transition(params.gamma, omega, params.dt, params.beta, m)
        self.trans = np.ascontiguousarray(self.trans)
        self.chol = _chol2(sigma)
        if params.no_noise:
            self.chol = np.zeros((2, 2))

    def init_state(self, z: PhasePoint):
        if z.dim != 1:
            raise ValueError("exact OU propagation needs a scalar mode")
        return np.array([z.q[0], z.p[0]], dtype=float)

    def run(self, state, noise, q_out, p_out, stride, record):
        buf = np.empty((q_out.shape[0], 2)) if record else np.empty((0, 2))
        K.linear_block(state, self.trans, self.chol, noise, buf, stride, record)
        if record:
            q_out[:, 0] = buf[:, 0]
            p_out[:, 0] = buf[:, 1]
        if not np.all(np.isfinite(state)):
            raise NonFinite("exact OU state became non-finite")

    def run_replica(self, state, noise, noise2, q_out, p_out, q2_out, p2_out):
        n = noise.shape[0]
        a = np.empty((n, 2))
        b = np.empty((n, 2))
        K.linear_replica_block(state, self.trans, self.chol, noise, noise2, a, b)
        q_out[:, 0], p_out[:, 0] = a[:, 0], a[:, 1]
        q2_out[:, 0], p2_out[:, 0] = b[:, 0], b[:, 1]


def _omega_of(model: PotentialModel, params: SimParams, omega: float | None) -> float:
    if omega is not None:
        return float(omega)
    if not isinstance(model, Quadratic) or model.dim != 1:
        raise ValueError("the exact OU stepper needs a 1-D quadratic model")
    return math.sqrt(model.K[0, 0] / params.mass_matrix(1)[0, 0])


def _make_stepper(model, params, stepper, omega):
    if stepper == "baoab":
        return _Baoab(model, params)
    if stepper == "ou-exact":
        return _OuExact(params, _omega_of(model, params, omega))
    raise ValueError(f"unknown stepper {stepper!r}; expected one of {STEPPERS}")


def _draw(rng: np.random.Generator, n: int, noise_dim: int, no_noise: bool) -> np.ndarray:
    if no_noise:
        return np.zeros((n, noise_dim))
    return rng.standard_normal((n, noise_dim))


def baoab_step(model: PotentialModel, params: SimParams, z: PhasePoint, rng: np.random.Generator) -> PhasePoint:
    """One BAOAB step (B, A, O, A, B) with the closing kick at the new position."""
    st = _Baoab(model, params)
    state = st.init_state(z)
    noise = _draw(rng, 1, st.dim, params.no_noise)
    st.run(state, noise, np.empty((0, st.dim)), np.empty((0, st.dim)), 1, False)
    return PhasePoint(state[0], state[1])


def baoab_step_replica(model: PotentialModel, params: SimParams, z: PhasePoint, rng: np.random.Generator):
    """Two successors of ``z`` that differ only in their O-step noise.

    The first draw from ``rng`` goes to the main branch, so the main branch
    equals :func:`baoab_step` with the same generator state.
    """
    st = _Baoab(model, params)
    state = st.init_state(z)
    noise = _draw(rng, 1, st.dim, params.no_noise)
    noise2 = _draw(rng, 1, st.dim, params.no_noise)
    bufs = [np.empty((1, st.dim)) for _ in range(4)]
    st.run_replica(state, noise, noise2, *bufs)
    return PhasePoint(bufs[0][0], bufs[1][0]), PhasePoint(bufs[2][0], bufs[3][0])


def ou_exact_step(params: SimParams, omega: float, z: PhasePoint, rng: np.random.Generator) -> PhasePoint:
    """One exact step of the scalar Langevin OU mode with frequency ``omega``."""
    st = _OuExact(params, omega)
    state = st.init_state(z)
    noise = _draw(rng, 1, 2, params.no_noise)
    K.linear_block(state, st.trans, st.chol, noise, np.empty((0, 2)), 1, False)
    return PhasePoint(state[:1], state[1:])


def _burn(st, state, rng, params, noise_dim):
    left = params.burn_in
    while left > 0:
        n = min(left, BLOCK)
        st.run(state, _draw(rng, n, noise_dim, params.no_noise), np.empty((0, st.dim)), np.empty((0, st.dim)), 1, False)
        left -= n


def simulate(
    model: PotentialModel,
    params: SimParams,
    stepper: str = "baoab",
    *,
    z0: PhasePoint | None = None,
    chain: int = 0,
    omega: float | None = None,
    stride: int = 1,
) -> Trajectory:
    """Run ``burn_in`` steps from ``z0`` (default origin), then record
    ``n_steps`` states, keeping every ``stride``-th step."""
    if stride < 1:
        raise ValueError("stride must be >= 1")
    st = _make_stepper(model, params, stepper, omega)
    dim = model.dim
    noise_dim = 2 if stepper == "ou-exact" else dim
    z0 = PhasePoint.zeros(dim) if z0 is None else z0
    rng = chain_rng(params.seed, chain, 0)
    state = st.init_state(z0)
    _burn(st, state, rng, params, noise_dim)

    N = params.n_steps
    q = np.empty((N, dim))
    p = np.empty((N, dim))
    rec_block = max(1, BLOCK // stride)
    done = 0
    while done < N:
        n = min(N - done, rec_block)
        noise = _draw(rng, n * stride, noise_dim, params.no_noise)
        st.run(state, noise, q[done : done + n], p[done : done + n], stride, True)
        done += n
    return Trajectory(q, p, params, model.describe())


def simulate_replica(
    model: PotentialModel,
    params: SimParams,
    stepper: str = "baoab",
    *,
    z0: PhasePoint | None = None,
    chain: int = 0,
    omega: float | None = None,
) -> ReplicaPair:
    """Like :func:`simulate` but also records a replica successor per step.

    The main chain is bit-identical to :func:`simulate` with the same seed and
    chain index; replica noise comes from a separate stream.
    """
    st = _make_stepper(model, params, stepper, omega)
    dim = model.dim
    noise_dim = 2 if stepper == "ou-exact" else dim
    z0 = PhasePoint.zeros(dim) if z0 is None else z0
    rng = chain_rng(params.seed, chain, 0)
    rng2 = chain_rng(params.seed, chain, 1)
    state = st.init_state(z0)
    _burn(st, state, rng, params, noise_dim)

    N = params.n_steps
    q, p, q2, p2 = (np.empty((N, dim)) for _ in range(4))
    done = 0
    while done < N:
        n = min(N - done, BLOCK)
        sl = slice(done, done + n)
        noise = _draw(rng, n, noise_dim, params.no_noise)
        noise2 = _draw(rng2, n, noise_dim, params.no_noise)
        st.run_replica(state, noise, noise2, q[sl], p[sl], q2[sl], p2[sl])
        done += n
    return ReplicaPair(Trajectory(q, p, params, model.describe()), q2, p2)


_MAGIC = b"LDTRAJ01"


def write_trajectory(path, traj: Trajectory) -> None:
    """Binary dump: magic, ``<u64 dim, <u64 N, <u64 header length``, a JSON
    header of parameters, then ``N`` rows of ``q..., p...`` as ``<f8``."""
    prm = traj.params
    header = json.dumps(
        {
            "gamma": prm.gamma,
            "dt": prm.dt,
            "beta": prm.beta,
            "seed": prm.seed,
            "burn_in": prm.burn_in,
            "n_steps": prm.n_steps,
            "mass": None if prm.mass is None else prm.mass.tolist(),
            "model": traj.model,
        },
        sort_keys=True,
    ).encode()
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<QQQ", traj.dim, len(traj), len(header)))
        fh.write(header)
        fh.write(np.hstack([traj.q, traj.p]).astype("<f8").tobytes())


def read_trajectory(path) -> Trajectory:
    raw = Path(path).read_bytes()
    if raw[:8] != _MAGIC:
        raise ValueError("not a trajectory file")
    dim, n, hlen = struct.unpack_from("<QQQ", raw, 8)
    off = 8 + 24
    header = json.loads(raw[off : off + hlen])
    data = np.frombuffer(raw, dtype="<f8", offset=off + hlen).reshape(n, 2 * dim)
    params = SimParams(
        gamma=header["gamma"], dt=header["dt"], beta=header["beta"], seed=header["seed"],
        burn_in=header["burn_in"], n_steps=header["n_steps"], mass=header["mass"],
    )
    return Trajectory(data[:, :dim].astype(float), data[:, dim:].astype(float), params, header["model"])
