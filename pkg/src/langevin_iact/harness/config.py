"""Experiment configuration: flat ``key = value`` files plus CLI overrides."""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from ..model import LeMa, PotentialModel, Quadratic, SimParams, ThreeGauss
from ..preobs import Custom, Hermite1D, Indicators, Monomials, PhaseHermite

EXPERIMENTS = ("sanity", "lema", "three-gauss", "sweep", "basis-compare", "analytic", "analytic-table")


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str = "sweep"
    model: str = "lema"
    d: float = 4.8
    omega: float = 1.0
    gamma: float = 1.0
    dt: float = 0.2
    beta: float = 1.0
    seed: int = 20240601
    burn_in: int = 50_000
    n_steps: int = 1_000_000
    n_sweep: int | None = None
    d_sweep: float | None = None
    stepper: str = "baoab"
    basis: str = "monomials:degree=7"
    bases: tuple[str, ...] = ()
    gamma_grid: tuple[float, ...] = ()
    gamma_ref: float = 1.0
    n_ref: int = 200_000
    gamma_star: float | None = None
    realizations: int = 100
    n_ladder: tuple[int, ...] = tuple(2**e for e in range(13, 19))
    k_max: int = 4
    dt_list: tuple[float, ...] = (0.1, 0.5)
    algorithm: int = 1
    half_check: bool = True
    threads: int = 1
    no_noise: bool = False
    full: bool = False
    out: str = "results"

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}")
        if self.realizations < 1:
            raise ValueError("realizations must be >= 1")
        if self.experiment == "sweep" and not self.gamma_grid:
            raise ValueError("a sweep needs a non-empty gamma_grid")

    def sim_params(self, gamma: float | None = None, n_steps: int | None = None) -> SimParams:
        return SimParams(
            gamma=self.gamma if gamma is None else gamma,
            dt=self.dt,
            beta=self.beta,
            seed=self.seed,
            burn_in=self.burn_in,
            n_steps=self.n_steps if n_steps is None else n_steps,
            no_noise=self.no_noise,
        )

    def potential(self, d: float | None = None) -> PotentialModel:
        return make_model(self.model, d=self.d if d is None else d, omega=self.omega)

    def metadata(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def with_(self, **changes) -> "ExperimentConfig":
        return replace(self, **changes)


def make_model(name: str, d: float = 4.8, omega: float = 1.0) -> PotentialModel:
    if name == "lema":
        return LeMa()
    if name == "three-gauss":
        return ThreeGauss(d)
    if name == "quadratic":
        return Quadratic(np.array([[omega * omega]]))
    raise ValueError(f"unknown model {name!r}")


def parse_basis(text: str):
    """``kind[:key=val,...]`` -> basis descriptor.

    Kinds: ``monomials`` (``degree``, ``dim``, ``phase``), ``hermite``
    (``degree``), ``phase-hermite`` (``k``), ``indicators`` (``members``,
    e.g. ``ABC`` or ``A``), ``position`` (the single function q_0).
    """
    kind, _, rest = text.strip().partition(":")
    opts = {}
    for item in filter(None, (s.strip() for s in rest.split(","))):
        key, _, val = item.partition("=")
        opts[key.strip()] = val.strip()
    if kind == "monomials":
        return Monomials(int(opts.get("dim", 1)), int(opts.get("degree", 1)), opts.get("phase", "0") in ("0", "false", "no"))
    if kind == "hermite":
        return Hermite1D(int(opts.get("degree", 1)))
    if kind == "phase-hermite":
        return PhaseHermite(int(opts.get("k", 1)))
    if kind == "indicators":
        return Indicators("three-gauss", tuple(opts.get("members", "ABC")))
    if kind == "position":
        return Custom((("q0", lambda q, p: q[:, 0]),))
    raise ValueError(f"unknown basis kind {kind!r}")


def parse_named_bases(items) -> list[tuple[str, object]]:
    """``name@descriptor`` entries; the name defaults to the descriptor text."""
    out = []
    for item in items:
        name, sep, desc = item.partition("@")
        if not sep:
            name, desc = item, item
        out.append((name.strip(), parse_basis(desc)))
    return out


def _split_list(text: str) -> list[str]:
    sep = ";" if ";" in text else ","
    return [s.strip() for s in text.split(sep) if s.strip()]


def _parse_grid(text: str) -> tuple[float, ...]:
    """Comma list, or ``geom:a:b:n`` / ``lin:a:b:n`` / ``step:a:b:h``."""
    text = text.strip()
    if text.startswith(("geom:", "lin:", "step:")):
        kind, a, b, n = text.split(":")
        a, b = float(a), float(b)
        if kind == "geom":
            return tuple(float(v) for v in np.geomspace(a, b, int(n)))
        if kind == "lin":
            return tuple(float(v) for v in np.linspace(a, b, int(n)))
        h = float(n)
        count = int(math.floor((b - a) / h + 1e-9)) + 1
        return tuple(round(a + i * h, 12) for i in range(count))
    vals: list[float] = []
    for part in _split_list(text):
        vals.extend(_parse_grid(part) if ":" in part else (float(part),))
    return tuple(sorted(set(vals)))


_BOOL = {"1": True, "true": True, "yes": True, "on": True, "0": False, "false": False, "no": False, "off": False}


def _coerce(name: str, text: str):
    text = text.strip()
    if name in ("gamma_grid",):
        return _parse_grid(text)
    if name in ("dt_list",):
        return tuple(float(v) for v in _split_list(text))
    if name in ("n_ladder",):
        return tuple(int(float(v)) for v in _split_list(text))
    if name == "bases":
        return tuple(s.strip() for s in text.split(";") if s.strip())
    if name in ("gamma_star", "d_sweep"):
        return None if text.lower() in ("", "none", "auto") else float(text)
    if name == "n_sweep":
        return None if text.lower() in ("", "none", "auto") else int(float(text))
    ftype = {f.name: f.type for f in fields(ExperimentConfig)}[name]
    if ftype == "bool":
        return _BOOL[text.lower()]
    if ftype == "int":
        return int(float(text))
    if ftype == "float":
        return float(text)
    return text


def parse_pairs(lines) -> dict:
    known = {f.name for f in fields(ExperimentConfig)}
    out = {}
    for raw in lines:
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"expected key=value, got {raw!r}")
        key, val = line.split("=", 1)
        key = key.strip().replace("-", "_")
        if key not in known:
            raise ValueError(f"unknown config key {key!r}")
        out[key] = _coerce(key, val)
    return out


def load_config(path: str | Path | None = None, base: ExperimentConfig | None = None, **overrides) -> ExperimentConfig:
    values = {} if base is None else base.metadata()
    if path is not None:
        values.update(parse_pairs(Path(path).read_text().splitlines()))
    values.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig(**values)
