"""Command-line entry point: ``langevin-iact <experiment> [options]``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import experiments as ex
from .config import ExperimentConfig, load_config, parse_pairs
from .tables import write_csv

COMMANDS = ("sanity", "lema", "three-gauss", "sweep", "basis-compare", "analytic")


def _base_config(command: str, full: bool) -> ExperimentConfig:
    if command == "sanity":
        return ex.sanity_config(full)
    if command == "lema":
        return ex.lema_config(full)
    if command == "three-gauss":
        return ex.three_gauss_config(full)
    if command == "sweep":
        return ex.lema_config(full, experiment="sweep")
    if command == "basis-compare":
        return ex.lema_config(full, experiment="basis-compare")
    return ExperimentConfig(experiment="analytic", full=full)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="langevin-iact", description="Worst-case IAcT experiments for Langevin samplers.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", type=Path, help="flat key=value configuration file")
    ap.add_argument("--seed", type=int, help="master seed (u64)")
    ap.add_argument("--out", type=Path, default=None, help="output directory for CSV files")
    ap.add_argument("--full", action="store_true", help="paper-scale sample sizes")
    ap.add_argument("--threads", type=int, default=None, help="work pool width")
    ap.add_argument("--no-noise", action="store_true", help="deterministic dynamics (testing)")
    ap.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override one config entry")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def resolve_config(args) -> ExperimentConfig:
    cfg = _base_config(args.command, args.full)
    if args.config is not None:
        cfg = load_config(args.config, base=cfg)
    if args.set:
        cfg = cfg.with_(**parse_pairs(args.set))
    overrides = {"seed": args.seed, "threads": args.threads, "out": None if args.out is None else str(args.out)}
    if args.no_noise:
        overrides["no_noise"] = True
    cfg = cfg.with_(**{k: v for k, v in overrides.items() if v is not None})
    if cfg.seed < 0 or cfg.seed >= 2**64:
        raise ValueError("seed must fit in an unsigned 64-bit integer")
    return cfg


def run(cfg: ExperimentConfig, command: str):
    if command == "sanity":
        return [ex.run_sanity(cfg)]
    if command == "lema":
        return ex.run_lema(cfg)
    if command == "three-gauss":
        return ex.run_three_gauss(cfg)
    if command == "sweep":
        return [ex.run_gamma_sweep(cfg)]
    if command == "basis-compare":
        return [ex.run_basis_comparison(cfg)]
    return list(ex.run_analytic_table(cfg))


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve_config(args)
    except (ValueError, KeyError, OSError) as exc:
        print(f"langevin-iact: configuration error: {exc}", file=sys.stderr)
        return 2
    out = Path(cfg.out)
    for table in run(cfg, args.command):
        path = write_csv(out / f"{table.name}.csv", table)
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
