"""The discrimination game: prior-weighted sources, measurement strategies,
and the success-probability objective ``P_s = sum_j xi_j Tr(rho_j Pi_j)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import CountMismatch, DimensionMismatch
from .hermitian import max_abs

STATE_TOL = 1e-10
POVM_TOL = 1e-9


def _stack(matrices, what: str) -> np.ndarray:
    try:
        arr = np.asarray(matrices, dtype=np.complex128)
    except ValueError as exc:
        raise DimensionMismatch(f"{what} must all have the same shape") from exc
    if arr.ndim != 3 or arr.shape[1] != arr.shape[2] or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise DimensionMismatch(f"{what} must be a non-empty list of equal-size square matrices, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{what} contain non-finite entries")
    arr = 0.5 * (arr + arr.conj().swapaxes(1, 2))
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class Ensemble:
    """M sources ``rho_j`` selected with prior probabilities ``xi_j``.

    Matrices are symmetrized on construction; the numeric invariants (PSD,
    unit trace, normalized priors) are checked by :func:`validate_ensemble`.
    """

    states: np.ndarray
    priors: np.ndarray

    def __init__(self, states, priors):
        states = _stack(states, "states")
        priors = np.array(priors, dtype=float).reshape(-1)
        if priors.shape[0] != states.shape[0]:
            raise CountMismatch(f"{states.shape[0]} states but {priors.shape[0]} priors")
        if not np.all(np.isfinite(priors)):
            raise ValueError("priors contain non-finite entries")
        priors.flags.writeable = False
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "priors", priors)

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    @property
    def size(self) -> int:
        return self.states.shape[0]

    def weighted_states(self) -> np.ndarray:
        """``xi_j * rho_j`` stacked along axis 0."""
        return self.priors[:, None, None] * self.states


@dataclass(frozen=True)
class Povm:
    elements: np.ndarray

    def __init__(self, elements):
        object.__setattr__(self, "elements", _stack(elements, "POVM elements"))

    @property
    def dim(self) -> int:
        return self.elements.shape[1]

    @property
    def size(self) -> int:
        return self.elements.shape[0]

    def __len__(self):
        return self.size

    def __getitem__(self, j):
        return self.elements[j]

    def weights(self) -> np.ndarray:
        """``Tr Pi_j`` for every element."""
        return np.real(np.trace(self.elements, axis1=1, axis2=2))


@dataclass
class ValidationReport:
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok

    def add(self, message: str) -> None:
        self.violations.append(message)


def pure_state(ket) -> np.ndarray:
    """Density matrix ``|psi><psi|`` of a (normalized on the fly) state vector."""
    v = np.asarray(ket, dtype=np.complex128).reshape(-1)
    v = v / np.linalg.norm(v)
    return np.outer(v, v.conj())


def bloch_state(r) -> np.ndarray:
    """Qubit density matrix ``(I + r.sigma)/2`` for a Bloch vector with ``|r| <= 1``."""
    x, y, z = r
    return 0.5 * np.array([[1 + z, x - 1j * y], [x + 1j * y, 1 - z]], dtype=np.complex128)


def bloch_vector(rho) -> np.ndarray:
    rho = np.asarray(rho)
    return np.array([2 * rho[1, 0].real, 2 * rho[1, 0].imag, (rho[0, 0] - rho[1, 1]).real])


def validate_ensemble(e: Ensemble) -> ValidationReport:
    report = ValidationReport()
    for j, rho in enumerate(e.states):
        w = np.linalg.eigvalsh(rho)
        if w[0] < -STATE_TOL:
            report.add(f"state {j} min eigenvalue {w[0]:.6g}")
        tr_dev = abs(np.trace(rho).real - 1.0)
        if tr_dev > STATE_TOL:
            report.add(f"state {j} trace deviation {tr_dev:.6g}")
    for j, xi in enumerate(e.priors):
        if xi < 0:
            report.add(f"prior {j} negative {xi:.6g}")
    total = float(np.sum(e.priors))
    if abs(total - 1.0) > STATE_TOL:
        report.add(f"priors sum {total:.6g}")
    return report


def validate_povm(m: Povm, dim: int) -> ValidationReport:
    report = ValidationReport()
    if m.dim != dim:
        report.add(f"dimension {m.dim} differs from {dim}")
        return report
    for j, el in enumerate(m.elements):
        w0 = np.linalg.eigvalsh(el)[0]
        if w0 < -POVM_TOL:
            report.add(f"element {j} min eigenvalue {w0:.6g}")
    dev = max_abs(np.sum(m.elements, axis=0) - np.eye(dim))
    if dev > POVM_TOL:
        report.add(f"completeness deviation {dev:.6g}")
    return report


def _check_pair(e: Ensemble, m: Povm) -> None:
    if e.dim != m.dim:
        raise DimensionMismatch(f"ensemble dim {e.dim} vs POVM dim {m.dim}")
    if e.size != m.size:
        raise CountMismatch(f"{e.size} states vs {m.size} POVM elements")


def _diagonal_terms(e: Ensemble, m: Povm) -> np.ndarray:
    # Re Tr(rho_j Pi_j) per j
    return np.einsum("jab,jba->j", e.states, m.elements).real


def success_probability(e: Ensemble, m: Povm) -> float:
    _check_pair(e, m)
    return float(np.dot(e.priors, _diagonal_terms(e, m)))


def confusion_matrix(e: Ensemble, m: Povm) -> np.ndarray:
    """Row ``j`` holds ``P(k|j) = Tr(rho_j Pi_k)``; tiny negatives are clamped to 0."""
    if e.dim != m.dim:
        raise DimensionMismatch(f"ensemble dim {e.dim} vs POVM dim {m.dim}")
    c = np.einsum("jab,kba->jk", e.states, m.elements).real
    return np.where(c < 0, 0.0, c)


def uniform_povm(size: int, dim: int) -> Povm:
    return Povm(np.broadcast_to(np.eye(dim) / size, (size, dim, dim)))
