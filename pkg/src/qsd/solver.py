"""Fixed-point iteration for the optimal minimum-error POVM.

Each step builds the Lagrange operator

    lam = ( sum_j xi_j^2 rho_j Pi_j rho_j )^(1/2)

and updates every element as ``Pi_j <- xi_j^2 lam^-1 rho_j Pi_j rho_j lam^-1``.
Summing the update over ``j`` gives the identity on the support of ``lam``,
which is why the squared priors appear inside the square root: positivity and
completeness survive every step. In floating point, an element's null space
is magnified by ``(xi_j rho_j lam^-1)^2`` each step, so negative eigenvalues
left by roundoff are clipped to zero after every update, and the elements are
then rescaled by ``(sum_j Pi_j)^-1/2`` so that roundoff does not show up as a
completeness error when ``lam`` is ill conditioned. Stationary points satisfy
``xi_j rho_j Pi_j = lam Pi_j``, the Lagrange conditions for maximizing
``P_s`` under the POVM constraints.

A stationary point is not necessarily the optimum, so the loop stops on a
certified duality gap (see :mod:`qsd.certificate`) rather than on step size.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import _dispatch, _fallback
from .errors import InvalidJitter
from .hermitian import RANK_CUTOFF, pinv_psd, sqrt_psd
from .model import Ensemble, Povm, _check_pair, success_probability

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class RandomJitter:
    """Start from ``I/M`` plus a small random Hermitian perturbation."""

    seed: int
    amplitude: float = 1e-3


@dataclass(frozen=True)
class SolverConfig:
    max_iterations: int = 10_000
    gap_tolerance: float = 1e-8
    rank_cutoff: float = RANK_CUTOFF
    init_mode: str | RandomJitter = "uniform"

    def __post_init__(self):
        if int(self.max_iterations) < 1:
            raise ValueError("max_iterations must be >= 1")
        if not self.gap_tolerance > 0 or not self.rank_cutoff > 0:
            raise ValueError("tolerances must be positive")
        if not (self.init_mode == "uniform" or isinstance(self.init_mode, RandomJitter)):
            raise ValueError(f"unknown init_mode {self.init_mode!r}")


@dataclass
class SolveReport:
    povm: Povm
    success_probability: float
    lagrange_operator: np.ndarray
    iterations_used: int
    gap: float
    converged: bool
    trace: list = field(default_factory=list)
    backend: str = ""


def default_initial_povm(size: int, dim: int, mode="uniform") -> Povm:
    if size < 1 or dim < 1:
        raise ValueError("need size >= 1 and dim >= 1")
    base = np.eye(dim, dtype=np.complex128) / size
    if mode == "uniform":
        return Povm(np.broadcast_to(base, (size, dim, dim)))
    if not isinstance(mode, RandomJitter):
        raise ValueError(f"unknown init mode {mode!r}")

    rng = np.random.default_rng(mode.seed)
    g = rng.standard_normal((size, dim, dim)) + 1j * rng.standard_normal((size, dim, dim))
    h = 0.5 * (g + g.conj().swapaxes(1, 2))
    h /= np.linalg.norm(h, ord=2, axis=(1, 2))[:, None, None]  # spectral norm 1
    raw = base[None] + mode.amplitude * h
    if np.linalg.eigvalsh(raw)[:, 0].min() < 0:
        raise InvalidJitter(f"amplitude {mode.amplitude} makes an element non-PSD")
    w, v = np.linalg.eigh(raw.sum(axis=0))
    s_inv_half = (v / np.sqrt(w)) @ v.conj().T
    return Povm(s_inv_half @ raw @ s_inv_half)


def lagrange_operator(e: Ensemble, m: Povm, rank_cutoff: float = RANK_CUTOFF) -> np.ndarray:
    """``( sum_j xi_j^2 rho_j Pi_j rho_j )^(1/2)``."""
    _check_pair(e, m)
    wst = e.weighted_states()
    return sqrt_psd((wst @ m.elements @ wst).sum(axis=0), rank_cutoff)


def iterate_once(e: Ensemble, m: Povm, cfg: SolverConfig | None = None) -> Povm:
    cfg = cfg or SolverConfig()
    lam = lagrange_operator(e, m, cfg.rank_cutoff)
    lam_inv = pinv_psd(lam, cfg.rank_cutoff)
    wst = e.weighted_states()
    new = lam_inv @ wst @ m.elements @ wst @ lam_inv
    kernel = np.eye(e.dim) - lam_inv @ lam
    if np.max(np.abs(kernel)) > 1e-8:
        new = new + kernel @ m.elements @ kernel
    return Povm(_fallback.renormalize(_fallback.clip_psd(0.5 * (new + new.conj().swapaxes(-1, -2)))))


def solve(e: Ensemble, cfg: SolverConfig | None = None, initial: Povm | None = None) -> SolveReport:
    cfg = cfg or SolverConfig()
    start = initial if initial is not None else default_initial_povm(e.size, e.dim, cfg.init_mode)
    _check_pair(e, start)
    povm, lam, k, trace, gap, converged = _dispatch.run_fixed_point(
        e.weighted_states(), start.elements, int(cfg.max_iterations),
        float(cfg.gap_tolerance), float(cfg.rank_cutoff),
    )
    povm = Povm(povm)
    if k > 1:
        drops = np.flatnonzero(np.diff(trace) < -1e-12)
        if drops.size:
            log.debug("P_s decreased on %d of %d steps (largest drop %.3e)",
                      drops.size, k - 1, float(-np.diff(trace).max()))
    if not converged:
        log.info("no certified convergence after %d iterations (gap %.3e)", k, gap)
    return SolveReport(
        povm=povm,
        success_probability=success_probability(e, povm),
        lagrange_operator=lam,
        iterations_used=k,
        gap=float(gap),
        converged=bool(converged),
        trace=[float(x) for x in trace],
        backend=_dispatch.BACKEND,
    )
