"""Dense complex-Hermitian linear algebra at small dimension.

Matrices are plain ``numpy`` complex arrays. Functions accept anything
array-like and return fresh arrays; nothing is modified in place.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import ConvergenceFailure, DimensionMismatch, NotPositiveSemidefinite

#: Relative eigenvalue cutoff used for numerical rank decisions.
RANK_CUTOFF = 1e-12
HERMITICITY_TOL = 1e-12


class EigenDecomposition(NamedTuple):
    eigenvalues: np.ndarray  # real, ascending
    eigenvectors: np.ndarray  # unitary, eigenvectors as columns


def _square(a) -> np.ndarray:
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise DimensionMismatch(f"expected a non-empty square matrix, got shape {a.shape}")
    return a


def hermiticity_deviation(a) -> float:
    """Max-abs entry of ``A - A^dagger``."""
    a = _square(a)
    return float(np.max(np.abs(a - a.conj().T)))


def as_hermitian(a) -> np.ndarray:
    """Return the Hermitian part ``(A + A^dagger)/2`` as a read-only complex array.

    Rejects NaN/Inf entries. Use :func:`hermiticity_deviation` beforehand when
    the size of the discarded anti-Hermitian part matters.
    """
    a = _square(a)
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix contains non-finite entries")
    h = 0.5 * (a + a.conj().T)
    h.flags.writeable = False
    return h


def _hermitize(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.conj().swapaxes(-1, -2))


def eig_hermitian(a) -> EigenDecomposition:
    a = _square(a)
    try:
        w, v = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc
    return EigenDecomposition(w, v)


def min_eigenvalue(a) -> float:
    return float(eig_hermitian(a).eigenvalues[0])


def _check_psd(w: np.ndarray, rank_cutoff: float) -> None:
    scale = max(1.0, float(w[-1]))
    if w[0] < -rank_cutoff * scale:
        raise NotPositiveSemidefinite(
            f"min eigenvalue {w[0]:.3e} below -{rank_cutoff:g} * {scale:.3e}"
        )


def sqrt_psd(a, rank_cutoff: float = RANK_CUTOFF) -> np.ndarray:
    """PSD square root; eigenvalues below ``rank_cutoff * max eigenvalue`` map to zero."""
    w, v = eig_hermitian(a)
    _check_psd(w, rank_cutoff)
    keep = w > rank_cutoff * max(float(w[-1]), 0.0)
    root = np.where(keep, np.sqrt(np.where(keep, w, 0.0)), 0.0)
    return _hermitize((v * root) @ v.conj().T)


def pinv_psd(a, rank_cutoff: float = RANK_CUTOFF) -> np.ndarray:
    """Moore-Penrose pseudo-inverse of a PSD matrix with a relative rank cutoff."""
    w, v = eig_hermitian(a)
    _check_psd(w, rank_cutoff)
    keep = w > rank_cutoff * max(float(w[-1]), 0.0)
    inv = np.where(keep, 1.0 / np.where(keep, w, 1.0), 0.0)
    return _hermitize((v * inv) @ v.conj().T)


def trace_product(a, b) -> float:
    """``Re Tr(AB)``; asserts the imaginary part vanishes for Hermitian inputs."""
    a = _square(a)
    b = _square(b)
    if a.shape != b.shape:
        raise DimensionMismatch(f"shapes {a.shape} and {b.shape} differ")
    t = np.sum(a * b.T)
    scale = max(1.0, float(np.max(np.abs(a))) * float(np.max(np.abs(b))) * a.shape[0])
    assert abs(t.imag) <= 1e-10 * scale, f"Tr(AB) has imaginary part {t.imag:.3e}"
    return float(t.real)


def max_abs(a) -> float:
    """Max-abs entry norm used for all residuals."""
    return float(np.max(np.abs(a))) if np.size(a) else 0.0
