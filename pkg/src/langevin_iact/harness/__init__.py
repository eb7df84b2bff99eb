"""Experiment drivers, configuration and CSV output."""

from .config import ExperimentConfig, load_config, parse_basis
from .experiments import (
    run_analytic_table,
    run_basis_comparison,
    run_gamma_sweep,
    run_lema,
    run_sanity,
    run_three_gauss,
)
from .tables import Table, read_csv, write_csv

__all__ = [
    "ExperimentConfig", "Table", "load_config", "parse_basis", "read_csv", "run_analytic_table",
    "run_basis_comparison", "run_gamma_sweep", "run_lema", "run_sanity", "run_three_gauss", "write_csv",
]
