"""Simulation of quantum and classical correlation dynamics in an electron-nuclear spin pair."""
from ._kernels import BACKEND
from .correlations import (
    OptimizerConfig,
    classical_correlation,
    correlation_report,
    discord_analytic_bell,
    geometric_discord,
    mutual_information,
    quantum_discord,
)
from .dynamics import EnsembleModel, PhysicsParams, PulseEvent, PulseSequence, run_sequence
from .states import BellCoeffs, bell_diagonal_to_density, coeffs_from_density, thermal_state

__version__ = "0.1.0"
