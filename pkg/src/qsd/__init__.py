"""Minimum-error discrimination of quantum states.

Fixed-point optimization of the measurement, duality-gap certificates,
an SDP export for external solvers, independent oracles, and the
three-state qubit case study.
"""

from ._dispatch import BACKEND
from .certificate import Certificate, certify, dual_upper_bound, helstrom_residuals, slackness_residual
from .errors import QsdError
from .model import (
    Ensemble,
    Povm,
    ValidationReport,
    bloch_state,
    confusion_matrix,
    pure_state,
    success_probability,
    validate_ensemble,
    validate_povm,
)
from .solver import (
    RandomJitter,
    SolveReport,
    SolverConfig,
    default_initial_povm,
    iterate_once,
    lagrange_operator,
    solve,
)

__all__ = [
    "BACKEND",
    "Certificate",
    "Ensemble",
    "Povm",
    "QsdError",
    "RandomJitter",
    "SolveReport",
    "SolverConfig",
    "ValidationReport",
    "bloch_state",
    "certify",
    "confusion_matrix",
    "default_initial_povm",
    "dual_upper_bound",
    "helstrom_residuals",
    "iterate_once",
    "lagrange_operator",
    "pure_state",
    "slackness_residual",
    "solve",
    "success_probability",
    "validate_ensemble",
    "validate_povm",
]
