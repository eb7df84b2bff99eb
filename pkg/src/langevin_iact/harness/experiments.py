"""Experiment drivers.  Each returns one or more :class:`Table` objects.

Every task draws from its own ``(seed, chain)`` stream and results are
assembled in a fixed order, so tables do not depend on the pool width.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .. import __version__, analytic, iact, maxiact
from ..errors import LangevinIactError
from ..model import Quadratic
from ..preobs import build_basis, center, hermite
from ..propagate import simulate
from .config import ExperimentConfig, parse_basis, parse_named_bases
from .tables import Table

log = logging.getLogger(__name__)

# chain index of the preliminary gamma* run, kept apart from sweep chains
REFERENCE_CHAIN = 1_000_000

SANITY_COEFFS = (0.0, -1.0 / math.sqrt(2.0), 1.0 / math.sqrt(6.0))


def _map(fn, items, threads: int) -> list:
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _meta(cfg: ExperimentConfig, **extra) -> dict:
    meta = {"code_version": __version__}
    meta.update(cfg.metadata())
    meta.update({f"result.{k}": v for k, v in extra.items() if v is not None})
    return meta


def _marker(exc: Exception) -> str:
    return f"error:{type(exc).__name__}"


# -- sanity check ----------------------------------------------------------


def sanity_observable(q: np.ndarray) -> np.ndarray:
    x = q[:, 0]
    return hermite(3, x) / math.sqrt(6.0) - hermite(2, x) / math.sqrt(2.0)


def run_sanity(cfg: ExperimentConfig) -> Table:
    """Relative error of acor estimates vs sample size on the exact OU chain."""
    M = cfg.realizations
    if M < 2:
        raise ValueError("the relative error needs at least two realizations")
    ladder = sorted(cfg.n_ladder)
    model = Quadratic(np.array([[cfg.omega**2]]))

    def task(item):
        level, i = item
        params = cfg.sim_params(n_steps=ladder[level])
        traj = simulate(model, params, "ou-exact", chain=level * M + i, omega=cfg.omega)
        u = sanity_observable(traj.q)
        try:
            return iact.acor_tau(u - u.mean()).tau
        except LangevinIactError as exc:
            log.warning("sanity realization N=%d i=%d failed: %s", ladder[level], i, exc)
            return math.nan

    items = [(lv, i) for lv in range(len(ladder)) for i in range(M)]
    taus = np.array(_map(task, items, cfg.threads)).reshape(len(ladder), M)

    exact = analytic.tau_of_expansion(SANITY_COEFFS, cfg.gamma / cfg.omega, cfg.dt * cfg.omega)
    rows = []
    for N, t in zip(ladder, taus):
        ok = t[np.isfinite(t)]
        n_ok = ok.size
        mean = float(ok.mean()) if n_ok else math.nan
        sd = float(ok.std(ddof=1)) if n_ok > 1 else math.nan
        rows.append((N, n_ok, M - n_ok, mean, sd, sd / math.sqrt(n_ok) if n_ok > 1 else math.nan, sd / mean, exact))

    rel = np.array([r[6] for r in rows])
    good = np.isfinite(rel) & (rel > 0)
    slope = slope_se = math.nan
    if good.sum() >= 2:
        x = np.log(np.array(ladder, dtype=float)[good])
        y = np.log(rel[good])
        coef, res, *_ = np.polyfit(x, y, 1, full=True)
        slope = float(-coef[0])
        if good.sum() > 2:
            resid = y - np.polyval(coef, x)
            s2 = float(resid @ resid) / (x.size - 2)
            slope_se = math.sqrt(s2 / float(((x - x.mean()) ** 2).sum()))
    header = ("N", "realizations", "failed", "mean_tau", "std_tau", "stderr_mean", "rel_error", "analytic_tau")
    return Table("sanity", header, rows, _meta(cfg, slope=slope, slope_stderr=slope_se, analytic_tau=exact))


# -- gamma* and sweeps -----------------------------------------------------


def reference_gamma_star(cfg: ExperimentConfig, d: float | None = None) -> float:
    """gamma* from a preliminary run at ``gamma_ref`` with ``n_ref`` samples."""
    if cfg.gamma_star is not None:
        return float(cfg.gamma_star)
    params = cfg.sim_params(gamma=cfg.gamma_ref, n_steps=cfg.n_ref)
    traj = simulate(cfg.potential(d), params, cfg.stepper, chain=REFERENCE_CHAIN)
    return maxiact.gamma_star(traj.q, beta=cfg.beta)


def _tau_max(values, names, algorithm: int):
    s = center(values, names)
    return maxiact.tau_max_algorithm1(s) if algorithm == 1 else maxiact.tau_max_algorithm2(s)


def run_gamma_sweep(cfg: ExperimentConfig, gamma_star: float | None = None, d: float | None = None) -> Table:
    """Configurational maximum IAcT over a grid of damping coefficients."""
    if not cfg.gamma_grid:
        raise ValueError("empty gamma grid")
    basis = build_basis(parse_basis(cfg.basis))
    if not basis.positions_only:
        raise ValueError("a tau_q,max sweep needs a position-only basis")
    model = cfg.potential(d)
    gs = reference_gamma_star(cfg, d) if gamma_star is None else gamma_star
    grid = sorted(cfg.gamma_grid)
    n = cfg.n_sweep or cfg.n_steps

    def task(item):
        idx, g = item
        try:
            traj = simulate(model, cfg.sim_params(gamma=g, n_steps=n), cfg.stepper, chain=idx)
            res = _tau_max(basis.evaluate(traj.q), basis.names, cfg.algorithm)
            status = "ok" if res.positive else "nonpositive"
            return (g, g / gs, res.tau_max, res.stderr, res.reducs_used, status)
        except LangevinIactError as exc:
            return (g, g / gs, math.nan, math.nan, -1, _marker(exc))

    rows = _map(task, list(enumerate(grid)), cfg.threads)
    rows.sort(key=lambda r: r[0])
    finite = [r for r in rows if math.isfinite(r[2])]
    best = min(finite, key=lambda r: r[2])[0] if finite else math.nan
    header = ("gamma", "gamma_over_gamma_star", "tau_q_max", "stderr", "reducs", "status")
    return Table("sweep", header, rows, _meta(cfg, gamma_star=gs, minimizer=best, d_used=model.describe().get("d")))


# -- basis comparison ------------------------------------------------------


def default_bases(model: str) -> tuple[str, ...]:
    if model == "lema":
        return ("cubic@monomials:degree=3", "quintic@monomials:degree=5", "septic@monomials:degree=7")
    if model == "three-gauss":
        return (
            "linear@monomials:dim=2,degree=1",
            "quadratic@monomials:dim=2,degree=2",
            "indicators@indicators:members=ABC",
            "1_A@indicators:members=A",
            "1_B@indicators:members=B",
            "1_C@indicators:members=C",
        )
    return ("linear@monomials:degree=1",)


def run_basis_comparison(cfg: ExperimentConfig, gamma: float | None = None) -> Table:
    """Maximum IAcT of several bases on one trajectory, plus a half-sample rerun."""
    named = parse_named_bases(cfg.bases or default_bases(cfg.model))
    sets = [(name, build_basis(desc)) for name, desc in named]
    if len({b.positions_only for _, b in sets}) > 1:
        raise ValueError("cannot mix position-only and phase-space bases in one table")
    g = cfg.gamma if gamma is None else gamma
    traj = simulate(cfg.potential(), cfg.sim_params(gamma=g), cfg.stepper, chain=0)
    half = len(traj) // 2

    def one(values, names):
        try:
            r = _tau_max(values, names, cfg.algorithm)
            return r.tau_max, r.stderr, r.reducs_used, "ok" if r.positive else "nonpositive"
        except LangevinIactError as exc:
            return math.nan, math.nan, -1, _marker(exc)

    def task(item):
        name, basis = item
        vals = basis.evaluate(traj.q, traj.p)
        full = one(vals, basis.names)
        row = (name, basis.size) + full[:3]
        if cfg.half_check:
            h = one(vals[:half], basis.names)
            row += h[:2]
        else:
            row += (math.nan, math.nan)
        return row + (full[3],)

    rows = _map(task, sets, cfg.threads)
    header = ("basis", "size", "tau_max", "stderr", "reducs", "tau_max_half", "stderr_half", "status")
    return Table("basis", header, rows, _meta(cfg, gamma_used=g))


# -- analytic tables -------------------------------------------------------


def run_analytic_table(cfg: ExperimentConfig) -> tuple[Table, Table]:
    """``T_k(gamma)`` curves and exact ``tau(He_k)`` for each step size."""
    grid = sorted(cfg.gamma_grid) if cfg.gamma_grid else [float(g) for g in np.linspace(0.5, 4.0, 36)]
    t_rows = []
    tau_rows = []
    for k in range(1, cfg.k_max + 1):
        for g in grid:
            try:
                t_rows.append((k, g, analytic.t_leading(k, g), "ok"))
            except LangevinIactError as exc:
                t_rows.append((k, g, math.nan, _marker(exc)))
            for dt in cfg.dt_list:
                try:
                    tau = analytic.tau_hermite(analytic.ModeSpec(k, g, dt))
                    tau_rows.append((k, g, dt, tau, dt * tau, "ok"))
                except LangevinIactError as exc:
                    tau_rows.append((k, g, dt, math.nan, math.nan, _marker(exc)))
    meta = _meta(cfg)
    return (
        Table("analytic_T", ("k", "gamma", "T_k", "status"), t_rows, meta),
        Table("analytic_tau", ("k", "gamma", "dt", "tau", "dt_times_tau", "status"), tau_rows, meta),
    )


# -- paper-protocol drivers ------------------------------------------------


def lema_config(full: bool = False, **changes) -> ExperimentConfig:
    scale = 1 if full else 10
    base = ExperimentConfig(
        experiment="lema", model="lema", dt=0.2, gamma_ref=1.0,
        n_ref=2_000_000 // scale, n_steps=10_000_000 // scale, n_sweep=10_000_000 // scale,
        basis="monomials:degree=7", bases=default_bases("lema"),
        gamma_grid=tuple(float(g) for g in np.geomspace(0.2, 5.0, 25)), full=full,
    )
    return base.with_(**changes)


def three_gauss_config(full: bool = False, **changes) -> ExperimentConfig:
    scale = 1 if full else 10
    grid = tuple(round(0.05 + 0.01 * i, 10) for i in range(16)) + tuple(round(0.3 + 0.1 * i, 10) for i in range(20))
    base = ExperimentConfig(
        experiment="three-gauss", model="three-gauss", d=4.8, d_sweep=4.4, dt=0.5, gamma_ref=1.0,
        n_ref=2_000_000 // scale, n_steps=10_000_000 // scale, n_sweep=20_000_000 // scale,
        basis="monomials:dim=2,degree=2", bases=default_bases("three-gauss"), gamma_grid=grid, full=full,
    )
    return base.with_(**changes)


def sanity_config(full: bool = False, **changes) -> ExperimentConfig:
    top = 22 if full else 18
    base = ExperimentConfig(
        experiment="sanity", model="quadratic", omega=1.0, gamma=2.0, dt=0.5, stepper="ou-exact",
        realizations=1000 if full else 100, n_ladder=tuple(2**e for e in range(13, top + 1)), full=full,
    )
    return base.with_(**changes)


def run_lema(cfg: ExperimentConfig) -> list[Table]:
    """gamma* protocol, basis comparison at gamma*, then the septic sweep."""
    gs = reference_gamma_star(cfg)
    cmp_ = run_basis_comparison(cfg, gamma=gs)
    cmp_.meta["result.gamma_star"] = gs
    cmp_.name = "lema_basis"
    sweep = run_gamma_sweep(cfg, gamma_star=gs)
    sweep.name = "lema_sweep"
    return [cmp_, sweep]


def run_three_gauss(cfg: ExperimentConfig) -> list[Table]:
    """Basis comparison at gamma*(d), then the quadratic sweep at ``d_sweep``."""
    gs = reference_gamma_star(cfg)
    cmp_ = run_basis_comparison(cfg, gamma=gs)
    cmp_.meta["result.gamma_star"] = gs
    cmp_.name = "three_gauss_basis"
    d2 = cfg.d if cfg.d_sweep is None else cfg.d_sweep
    sweep_cfg = cfg.with_(gamma_star=None) if d2 != cfg.d else cfg
    sweep = run_gamma_sweep(sweep_cfg, d=d2)
    sweep.name = "three_gauss_sweep"
    return [cmp_, sweep]
