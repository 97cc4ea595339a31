"""Independent checks: brute-force optimum oracles and a Monte-Carlo
simulation of the discrimination game.

Nothing here uses the fixed-point solver; the oracles only ever produce
valid POVMs, so their values are lower bounds on the optimum.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidDistribution, UnsupportedDimension
from .model import Ensemble, Povm, bloch_vector, confusion_matrix, success_probability

log = logging.getLogger(__name__)


@dataclass
class OracleResult:
    best_value: float
    best_povm: Povm
    evaluations: int


@dataclass
class GameStats:
    trials: int
    successes: int
    empirical_rate: float
    std_error: float

    def to_dict(self) -> dict:
        return {
            "trials": self.trials,
            "successes": self.successes,
            "empirical_rate": self.empirical_rate,
            "std_error": self.std_error,
        }


def _trivial(e: Ensemble) -> OracleResult:
    povm = Povm([np.eye(e.dim)])
    return OracleResult(success_probability(e, povm), povm, 1)


def projective_oracle_qubit(e: Ensemble, grid_density: int, assignment=None) -> OracleResult:
    """Best two-outcome projective measurement on a ``grid_density**2`` Bloch grid.

    ``assignment`` maps the projector index (0 for ``+n``, 1 for ``-n``) to a
    source label; without it every ordered pair of distinct labels is tried.
    Sources not assigned get a zero element.
    """
    if e.dim != 2:
        raise UnsupportedDimension(f"projective qubit oracle needs dim 2, got {e.dim}")
    if e.size == 1:
        return _trivial(e)
    theta = np.linspace(0.0, np.pi, grid_density)
    phi = np.linspace(0.0, 2 * np.pi, grid_density, endpoint=False)
    th, ph = np.meshgrid(theta, phi, indexing="ij")
    n = np.stack([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)], axis=-1).reshape(-1, 3)
    r = np.array([bloch_vector(rho) for rho in e.states])
    proj = n @ r.T  # n . r_j for every grid point and source

    if assignment is None:
        pairs = list(itertools.permutations(range(e.size), 2))
    else:
        pairs = [(assignment[0], assignment[1])]

    best = (-np.inf, None, None)
    for a, b in pairs:
        vals = 0.5 * e.priors[a] * (1 + proj[:, a]) + 0.5 * e.priors[b] * (1 - proj[:, b])
        i = int(np.argmax(vals))
        if vals[i] > best[0]:
            best = (vals[i], (a, b), n[i])
    (a, b), nv = best[1], best[2]
    sigma = np.array([[[0, 1], [1, 0]], [[0, -1j], [1j, 0]], [[1, 0], [0, -1]]])
    ns = np.einsum("k,kab->ab", nv, sigma)
    elements = np.zeros((e.size, 2, 2), dtype=np.complex128)
    elements[a] = 0.5 * (np.eye(2) + ns)
    elements[b] = 0.5 * (np.eye(2) - ns)
    povm = Povm(elements)
    return OracleResult(success_probability(e, povm), povm, len(pairs) * n.shape[0])


def random_povms(rng, count: int, size: int, dim: int) -> np.ndarray:
    """``count`` random ``size``-element POVMs, shape ``(count, size, dim, dim)``.

    Elements are Gram matrices ``G G^dagger`` of complex Gaussian ``dim x r``
    matrices with ``r`` drawn uniformly from ``1..dim`` per element, so low-rank
    (boundary) POVMs are reached, normalized as ``S^-1/2 A_j S^-1/2``.
    """
    g = rng.standard_normal((count, size, dim, dim)) + 1j * rng.standard_normal((count, size, dim, dim))
    ranks = rng.integers(1, dim + 1, size=(count, size))
    short = ranks.sum(axis=1) < dim  # S would be singular
    ranks[short] = dim
    g = g * (np.arange(dim)[None, None, None, :] < ranks[..., None, None])
    a = g @ g.conj().swapaxes(-1, -2)
    w, v = np.linalg.eigh(a.sum(axis=1))
    s_inv_half = (v / np.sqrt(w)[:, None, :]) @ v.conj().swapaxes(-1, -2)
    return s_inv_half[:, None] @ a @ s_inv_half[:, None]


def random_povm_search(e: Ensemble, samples: int, seed, batch: int = 8192) -> OracleResult:
    """Lower-bound the optimum with the best of ``samples`` random POVMs.

    Batches draw from independent streams spawned from ``seed`` and are merged
    by max, so the result depends only on ``(seed, samples, batch)``.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    if e.size == 1:
        return _trivial(e)
    wst = e.weighted_states()
    nbatch = math.ceil(samples / batch)
    streams = np.random.SeedSequence(seed).spawn(nbatch)
    best_val, best = -np.inf, None
    done = 0
    for ss in streams:
        count = min(batch, samples - done)
        povms = random_povms(np.random.default_rng(ss), count, e.size, e.dim)
        vals = np.einsum("jab,njba->n", wst, povms).real
        i = int(np.argmax(vals))
        if vals[i] > best_val:
            best_val, best = vals[i], povms[i]
        done += count
    povm = Povm(best)
    return OracleResult(success_probability(e, povm), povm, samples)


def _checked_distribution(probs: np.ndarray) -> np.ndarray:
    total = float(probs.sum())
    if abs(total - 1.0) > 1e-6:
        raise InvalidDistribution(f"outcome probabilities sum to {total:.9g}")
    if abs(total - 1.0) > 1e-9:
        log.warning("renormalizing outcome distribution with total %.12g", total)
    return probs / total


def _inverse_cdf(probs: np.ndarray, u):
    cdf = np.cumsum(probs)
    cdf[-1] = 1.0  # last bucket absorbs rounding
    return np.minimum(np.searchsorted(cdf, u, side="right"), len(probs) - 1)


def sample_measurement(state, m: Povm, rng, size=None):
    """Draw an outcome ``k`` with probability ``Tr(rho Pi_k)``.

    Returns an int, or an array of ``size`` independent outcomes.
    """
    rho = np.asarray(state, dtype=np.complex128)
    probs = np.einsum("ab,kba->k", rho, m.elements).real
    probs = _checked_distribution(np.where(probs < 0, 0.0, probs))
    if size is None:
        return int(_inverse_cdf(probs, rng.random()))
    return _inverse_cdf(probs, rng.random(size))


def simulate_game(e: Ensemble, m: Povm, trials: int, seed) -> GameStats:
    """Play the game ``trials`` times: draw a source by the priors, measure, score."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    priors = _checked_distribution(np.where(e.priors < 0, 0.0, e.priors))
    sources = _inverse_cdf(priors, rng.random(trials))
    u = rng.random(trials)
    conf = confusion_matrix(e, m)
    successes = 0
    for j in range(e.size):
        mask = sources == j
        if not mask.any():
            continue
        outcomes = _inverse_cdf(_checked_distribution(conf[j]), u[mask])
        successes += int(np.count_nonzero(outcomes == j))
    rate = successes / trials
    return GameStats(trials, successes, rate, math.sqrt(rate * (1 - rate) / trials))
