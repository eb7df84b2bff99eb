"""Worst-case integrated autocorrelation times for underdamped Langevin samplers."""

from .analytic import ModeSpec, optimal_gamma, t_leading, t_max, tau_hermite, tau_max_block, tau_of_expansion
from .iact import IactEstimate, acor_tau, cross_D
from .maxiact import (
    MaxIactResult,
    gamma_star,
    tau2_from_replicas,
    tau2_max_over_basis,
    tau_max_algorithm1,
    tau_max_algorithm2,
)
from .model import LeMa, PhasePoint, Quadratic, SimParams, ThreeGauss
from .preobs import Custom, Hermite1D, Indicators, Monomials, PhaseHermite, build_basis, evaluate_series
from .propagate import Trajectory, ou_transition, simulate, simulate_replica

__version__ = "0.1.0"

__all__ = [
    "Custom", "Hermite1D", "IactEstimate", "Indicators", "LeMa", "MaxIactResult", "ModeSpec",
    "Monomials", "PhaseHermite", "PhasePoint", "Quadratic", "SimParams", "ThreeGauss", "Trajectory",
    "acor_tau", "build_basis", "cross_D", "evaluate_series", "gamma_star", "optimal_gamma",
    "ou_transition", "simulate", "simulate_replica", "t_leading", "t_max", "tau2_from_replicas",
    "tau2_max_over_basis", "tau_hermite", "tau_max_algorithm1", "tau_max_algorithm2",
    "tau_max_block", "tau_of_expansion",
]
