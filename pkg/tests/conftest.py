import math

import numpy as np
import pytest

from qsd.model import Ensemble, bloch_state, pure_state

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)

# (1 + 1/sqrt 2)/2; confirmed by the Bloch-grid oracle in test_oracles
HELSTROM_ZERO_PLUS = 0.5 * (1 + 1 / math.sqrt(2))


def random_hermitian(rng, p):
    g = rng.standard_normal((p, p)) + 1j * rng.standard_normal((p, p))
    return 0.5 * (g + g.conj().T)


def random_psd(rng, p, rank=None):
    rank = p if rank is None else rank
    g = rng.standard_normal((p, rank)) + 1j * rng.standard_normal((p, rank))
    return g @ g.conj().T


def random_density(rng, p, pure=False):
    a = random_psd(rng, p, 1 if pure else None)
    return a / np.trace(a).real


def random_qubit_ensemble(rng, size):
    """Random qubit ensemble; each state is pure or mixed with equal odds."""
    states = [random_density(rng, 2, pure=bool(rng.integers(2))) for _ in range(size)]
    priors = rng.dirichlet(np.ones(size))
    return Ensemble(states, priors)


@pytest.fixture
def orthogonal():
    return Ensemble([pure_state([1, 0]), pure_state([0, 1])], [0.5, 0.5])


@pytest.fixture
def zero_plus():
    return Ensemble([pure_state([1, 0]), pure_state([1, 1])], [0.5, 0.5])


def trine_ensemble():
    states = [bloch_state([math.sin(2 * math.pi * k / 3), 0, math.cos(2 * math.pi * k / 3)]) for k in range(3)]
    return Ensemble(states, [1 / 3] * 3)


@pytest.fixture
def trine():
    return trine_ensemble()


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
