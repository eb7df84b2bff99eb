import math

import numpy as np
import pytest
import scipy.integrate as si
import scipy.linalg as sla

from langevin_iact.errors import NonFinite
from langevin_iact.iact import acor_tau
from langevin_iact.model import LeMa, PhasePoint, Quadratic, SimParams, ThreeGauss
from langevin_iact.propagate import (
    baoab_step,
    baoab_step_replica,
    chain_rng,
    ou_exact_step,
    ou_transition,
    read_trajectory,
    simulate,
    simulate_replica,
    write_trajectory,
)


def mean_se(x):
    """Mean and IAcT-corrected standard error of a correlated series."""
    x = np.asarray(x, dtype=float)
    tau = acor_tau(x - x.mean()).tau
    return x.mean(), math.sqrt(max(tau, 1.0) * x.var() / x.size)


def test_baoab_hand_example():
    m = Quadratic(np.zeros((1, 1)))
    prm = SimParams(gamma=1.0, dt=1.0, no_noise=True)
    z = baoab_step(m, prm, PhasePoint([0.0], [1.0]), chain_rng(0))
    assert z.q[0] == pytest.approx(0.5 + 0.5 * math.exp(-1.0), abs=1e-15)
    assert z.p[0] == pytest.approx(math.exp(-1.0), abs=1e-15)


@pytest.mark.parametrize("model", [LeMa(), ThreeGauss(4.8), Quadratic(np.array([[2.0]]))], ids=["lema", "tg", "quad"])
def test_zero_friction_is_velocity_verlet(model, rng):
    dt = 0.05
    prm = SimParams(gamma=1e-300, dt=dt, no_noise=True)
    q = rng.normal(size=model.dim)
    p = rng.normal(size=model.dim)
    z = baoab_step(model, prm, PhasePoint(q, p), chain_rng(0))
    ph = p + 0.5 * dt * model.force(q)
    q1 = q + dt * ph
    p1 = ph + 0.5 * dt * model.force(q1)
    assert np.allclose(z.q, q1, atol=1e-14)
    assert np.allclose(z.p, p1, atol=1e-14)


def test_energy_conservation_order_two():
    m = Quadratic(np.array([[1.0]]))
    errs = []
    for dt in (0.02, 0.01):
        prm = SimParams(gamma=1e-300, dt=dt, no_noise=True, burn_in=0, n_steps=1000)
        tr = simulate(m, prm, z0=PhasePoint([1.0], [0.0]))
        H = 0.5 * tr.q[:, 0] ** 2 + 0.5 * tr.p[:, 0] ** 2
        errs.append(np.abs(H - 0.5).max())
    assert errs[0] < 1e-3
    assert 3.0 < errs[0] / errs[1] < 5.0


def test_determinism_and_chain_independence():
    prm = SimParams(gamma=1.0, dt=0.2, burn_in=100, n_steps=2000, seed=7)
    a = simulate(LeMa(), prm)
    b = simulate(LeMa(), prm)
    c = simulate(LeMa(), prm, chain=1)
    assert np.array_equal(a.q, b.q) and np.array_equal(a.p, b.p)
    assert not np.array_equal(a.q, c.q)


def test_single_step_record_and_stride():
    prm = SimParams(gamma=1.0, dt=0.2, burn_in=10, n_steps=1)
    assert len(simulate(LeMa(), prm)) == 1
    full = simulate(LeMa(), prm.replace(n_steps=30))
    strided = simulate(LeMa(), prm.replace(n_steps=10), stride=3)
    assert np.array_equal(strided.q, full.q[2::3])


def test_stepper_validation():
    prm = SimParams(gamma=1.0, dt=0.2, n_steps=5, burn_in=0)
    with pytest.raises(ValueError):
        simulate(LeMa(), prm, "leapfrog")
    with pytest.raises(ValueError):
        simulate(LeMa(), prm, "ou-exact")


def test_unstable_step_raises():
    prm = SimParams(gamma=1.0, dt=5.0, n_steps=1000, burn_in=0, no_noise=True)
    with pytest.raises(NonFinite):
        simulate(Quadratic(np.array([[100.0]])), prm, z0=PhasePoint([1.0], [0.0]))


def test_ou_transition_limits():
    E, S = ou_transition(2.0, 1.0, 1e3)
    assert np.allclose(E, 0.0, atol=1e-12)
    assert np.allclose(S, np.eye(2), atol=1e-12)
    g, dt = 1.3, 1e-5
    _, S = ou_transition(g, 1.0, dt)
    assert np.allclose(S, np.diag([0.0, 2 * g * dt]), atol=10 * dt**2)


@pytest.mark.parametrize("gamma,omega,dt,beta,mass", [
    (0.5, 1.0, 0.5, 1.0, 1.0),
    (2.0, 1.0, 0.5, 1.0, 1.0),
    (5.0, 1.0, 0.3, 1.0, 1.0),
    (1.0, 2.0, 0.2, 0.5, 3.0),
    (3.0, 0.7, 1.1, 2.0, 0.5),
])
def test_ou_transition_matches_generator(gamma, omega, dt, beta, mass):
    A = np.array([[0.0, 1.0 / mass], [-mass * omega**2, -gamma]])
    b = np.array([0.0, math.sqrt(2 * gamma * mass / beta)])
    E, S = ou_transition(gamma, omega, dt, beta, mass)
    assert np.allclose(E, sla.expm(dt * A), atol=1e-13)

    def integrand(s):
        v = sla.expm(s * A) @ b
        return np.outer(v, v).ravel()

    ref = si.quad_vec(integrand, 0.0, dt, epsabs=1e-14, epsrel=1e-12)[0].reshape(2, 2)
    assert np.allclose(S, ref, atol=1e-11)


def test_ou_transition_continuous_through_critical():
    Ec, Sc = ou_transition(2.0, 1.0, 0.5)
    for g in (2.0 - 1e-7, 2.0 + 1e-7):
        E, S = ou_transition(g, 1.0, 0.5)
        assert np.allclose(E, Ec, atol=1e-6) and np.allclose(S, Sc, atol=1e-6)


def test_ou_exact_stationary_covariance():
    prm = SimParams(gamma=2.0, dt=0.5, n_steps=1_000_000, seed=3)
    tr = simulate(Quadratic(np.eye(1)), prm, "ou-exact")
    z = np.hstack([tr.q, tr.p])
    for f, target in ((z[:, 0] ** 2, 1.0), (z[:, 1] ** 2, 1.0), (z[:, 0] * z[:, 1], 0.0)):
        m, se = mean_se(f)
        assert abs(m - target) <= 4 * se


def test_ou_exact_step_without_noise_is_mean_map():
    prm = SimParams(gamma=1.0, dt=0.3, no_noise=True)
    E, _ = ou_transition(1.0, 1.0, 0.3)
    z1 = ou_exact_step(prm, 1.0, PhasePoint([0.5], [-0.2]), chain_rng(5))
    assert np.allclose(np.r_[z1.q, z1.p], E @ np.array([0.5, -0.2]), atol=1e-15)


def test_baoab_harmonic_stationary_moments():
    # BAOAB samples the configurational marginal of a harmonic potential
    # exactly; the momentum variance is 1 - dt^2/4
    dt = 0.2
    prm = SimParams(gamma=1.0, dt=dt, n_steps=1_000_000, seed=11)
    tr = simulate(Quadratic(np.eye(1)), prm)
    m, se = mean_se(tr.q[:, 0] ** 2)
    assert abs(m - 1.0) <= 3 * se
    m, se = mean_se(tr.p[:, 0] ** 2)
    assert abs(m - (1.0 - dt * dt / 4.0)) <= 3 * se
    # cross-check against the exact propagator at the same damping
    ex = simulate(Quadratic(np.eye(1)), prm.replace(seed=12), "ou-exact")
    mq, se_b = mean_se(tr.q[:, 0] ** 2)
    me, se_e = mean_se(ex.q[:, 0] ** 2)
    assert abs(mq - me) <= 3 * math.hypot(se_b, se_e)


def test_replica_no_noise_identical():
    prm = SimParams(gamma=1.0, dt=0.2, no_noise=True)
    a, b = baoab_step_replica(LeMa(), prm, PhasePoint([0.3], [0.1]), chain_rng(0))
    assert np.array_equal(a.q, b.q) and np.array_equal(a.p, b.p)


def test_replica_main_branch_matches_single_step():
    prm = SimParams(gamma=1.0, dt=0.2)
    z = PhasePoint([0.3, -0.1], [0.1, 0.4])
    a, b = baoab_step_replica(ThreeGauss(4.8), prm, z, chain_rng(9))
    c = baoab_step(ThreeGauss(4.8), prm, z, chain_rng(9))
    assert np.array_equal(a.q, c.q) and np.array_equal(a.p, c.p)
    assert not np.array_equal(a.p, b.p)


@pytest.mark.parametrize("stepper", ["baoab", "ou-exact"])
def test_simulate_replica_main_chain_bit_identical(stepper):
    prm = SimParams(gamma=1.5, dt=0.3, burn_in=50, n_steps=70_000, seed=4)
    a = simulate(Quadratic(np.eye(1)), prm, stepper)
    pair = simulate_replica(Quadratic(np.eye(1)), prm, stepper)
    assert np.array_equal(pair.main.q, a.q) and np.array_equal(pair.main.p, a.p)


def test_replica_product_matches_exact_propagator():
    gamma, dt = 2.0, 0.5
    prm = SimParams(gamma=gamma, dt=dt, n_steps=400_000, seed=21)
    pair = simulate_replica(Quadratic(np.eye(1)), prm, "ou-exact")
    E, _ = ou_transition(gamma, 1.0, dt)
    target = E[0, 0] ** 2 + E[0, 1] ** 2
    m, se = mean_se(pair.main.q[:, 0] * pair.replica_q[:, 0])
    assert abs(m - target) <= 4 * se


def test_trajectory_roundtrip(tmp_path):
    prm = SimParams(gamma=1.0, dt=0.5, burn_in=10, n_steps=100, seed=2)
    tr = simulate(ThreeGauss(4.8), prm)
    path = tmp_path / "t.bin"
    write_trajectory(path, tr)
    back = read_trajectory(path)
    assert np.array_equal(back.q, tr.q) and np.array_equal(back.p, tr.p)
    assert back.params.gamma == 1.0 and back.params.seed == 2
