"""Optimality certificates for a candidate POVM.

A Hermitian ``lam`` with ``lam - xi_j rho_j >= 0`` for every ``j`` is dual
feasible, and then ``P_s(any POVM) <= Tr lam``. Any ``lam`` becomes feasible
after the shift ``lam + delta*I`` with ``delta`` the worst negative residual,
so every iterate yields a rigorous upper bound; a gap ``Tr lam' - P_s`` below
``eps`` certifies the POVM as optimal to within ``eps``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch
from .hermitian import RANK_CUTOFF, max_abs, min_eigenvalue
from .model import Ensemble, Povm, _check_pair, success_probability
from .solver import lagrange_operator


@dataclass
class Certificate:
    feasible_dual: np.ndarray
    upper_bound: float
    gap: float
    helstrom_residuals: list
    slackness_residual: float
    shift: float
    success_probability: float

    def certifies(self, tol: float = 1e-8) -> bool:
        return self.gap <= tol

    def to_dict(self) -> dict:
        from .problemfile import matrix_to_json

        return {
            "upper_bound": self.upper_bound,
            "gap": self.gap,
            "success_probability": self.success_probability,
            "shift": self.shift,
            "helstrom_residuals": list(self.helstrom_residuals),
            "slackness_residual": self.slackness_residual,
            "feasible_dual": matrix_to_json(self.feasible_dual),
        }


def _check_lambda(e: Ensemble, lam) -> np.ndarray:
    lam = np.asarray(lam, dtype=np.complex128)
    if lam.shape != (e.dim, e.dim):
        raise DimensionMismatch(f"lambda has shape {lam.shape}, ensemble dim is {e.dim}")
    return lam


def helstrom_residuals(e: Ensemble, lam) -> list:
    """``min_eig(lam - xi_j rho_j)`` for every source; all >= 0 means dual feasible."""
    lam = _check_lambda(e, lam)
    return [min_eigenvalue(lam - w) for w in e.weighted_states()]


def slackness_residual(e: Ensemble, m: Povm, lam) -> float:
    """``max_j ||(lam - xi_j rho_j) Pi_j||`` in the max-abs entry norm."""
    _check_pair(e, m)
    lam = _check_lambda(e, lam)
    return max(max_abs((lam - w) @ p) for w, p in zip(e.weighted_states(), m.elements))


def dual_upper_bound(e: Ensemble, lam) -> tuple[np.ndarray, float]:
    lam = _check_lambda(e, lam)
    delta = max(0.0, -min(helstrom_residuals(e, lam)))
    shifted = lam + delta * np.eye(e.dim)
    return shifted, float(np.trace(shifted).real)


def certify(e: Ensemble, m: Povm, rank_cutoff: float = RANK_CUTOFF) -> Certificate:
    lam = lagrange_operator(e, m, rank_cutoff)
    residuals = helstrom_residuals(e, lam)
    delta = max(0.0, -min(residuals))
    shifted = lam + delta * np.eye(e.dim)
    bound = float(np.trace(shifted).real)
    ps = success_probability(e, m)
    return Certificate(
        feasible_dual=shifted,
        upper_bound=bound,
        gap=bound - ps,
        helstrom_residuals=residuals,
        slackness_residual=slackness_residual(e, m, lam),
        shift=delta,
        success_probability=ps,
    )
