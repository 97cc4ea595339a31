"""The discrimination problem as a block-diagonal semidefinite program.

Dual form (variables ``Z = diag(Pi_1, ..., Pi_M)``)::

    maximize  -Tr F0 Z   s.t.  Z >= 0,  Tr F_i Z = c_i

with ``F0 = -diag(xi_j rho_j)``, ``F_i = diag(Gamma_i, ..., Gamma_i)`` and
``c_i = Tr Gamma_i`` for an orthonormal Hermitian basis ``Gamma_i`` whose first
member is ``I/sqrt(p)``. The primal is ``minimize c.x`` s.t.
``F(x) = F0 + sum_i x_i F_i >= 0``; at ``x_i = Tr(lam Gamma_i)`` this reads
``lam - xi_j rho_j >= 0`` for every block.

SDPA files
----------
SDPA works with real symmetric blocks and the sign convention
``X = sum_i F_i x_i - F_0``. Each complex block ``A`` is written as
``0.5 * [[Re A, -Im A], [Im A, Re A]]`` and ``F0`` is stored negated, so the
objective an external solver reports is ``P_s`` itself.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .errors import DimensionMismatch, IoFailure
from .model import Ensemble, Povm


@dataclass(frozen=True)
class OperatorBasis:
    dim: int
    gammas: np.ndarray  # (p*p, p, p)

    def gram(self) -> np.ndarray:
        return np.einsum("iab,jba->ij", self.gammas, self.gammas).real

    def coordinates(self, a) -> np.ndarray:
        """``x_i = Tr(A Gamma_i)`` (real for Hermitian ``A``)."""
        return np.einsum("ab,iba->i", np.asarray(a, dtype=np.complex128), self.gammas).real


def operator_basis(p: int) -> OperatorBasis:
    """Identity first, then real-symmetric pairs, imaginary-antisymmetric pairs,
    and traceless diagonals (generalized Gell-Mann), all orthonormal under
    the trace inner product."""
    if p < 1:
        raise ValueError("p must be >= 1")
    mats = [np.eye(p, dtype=np.complex128) / np.sqrt(p)]
    pairs = [(j, k) for j in range(p) for k in range(j + 1, p)]
    for j, k in pairs:
        g = np.zeros((p, p), dtype=np.complex128)
        g[j, k] = g[k, j] = 1 / np.sqrt(2)
        mats.append(g)
    for j, k in pairs:
        g = np.zeros((p, p), dtype=np.complex128)
        g[j, k] = -1j / np.sqrt(2)
        g[k, j] = 1j / np.sqrt(2)
        mats.append(g)
    for l in range(1, p):
        d = np.zeros(p)
        d[:l] = 1.0
        d[l] = -l
        mats.append(np.diag(d / np.sqrt(l * (l + 1))).astype(np.complex128))
    gammas = np.array(mats)
    gammas.flags.writeable = False
    return OperatorBasis(p, gammas)


@dataclass(frozen=True)
class SdpProblem:
    """Block-diagonal data; blocks are stored explicitly, one per state."""

    f0: np.ndarray  # (M, p, p)
    fs: np.ndarray  # (p*p, M, p, p)
    c: np.ndarray  # (p*p,)

    @property
    def block_count(self) -> int:
        return self.f0.shape[0]

    @property
    def block_dim(self) -> int:
        return self.f0.shape[1]

    @property
    def constraint_count(self) -> int:
        return self.c.shape[0]


class PrimalPoint(NamedTuple):
    x: np.ndarray
    value: float
    min_eigenvalue: float


def build_dual_sdp(e: Ensemble) -> SdpProblem:
    basis = operator_basis(e.dim)
    f0 = -e.weighted_states()
    fs = np.repeat(basis.gammas[:, None], e.size, axis=1)
    c = np.real(np.trace(basis.gammas, axis1=1, axis2=2))
    return SdpProblem(f0=f0, fs=fs, c=c)


def block_diag(blocks) -> np.ndarray:
    blocks = np.asarray(blocks)
    m, p, _ = blocks.shape
    out = np.zeros((m * p, m * p), dtype=blocks.dtype)
    for j in range(m):
        out[j * p:(j + 1) * p, j * p:(j + 1) * p] = blocks[j]
    return out


def _check(problem: SdpProblem, m: Povm) -> None:
    if m.elements.shape != problem.f0.shape:
        raise DimensionMismatch(f"POVM shape {m.elements.shape} vs blocks {problem.f0.shape}")


def dual_objective(problem: SdpProblem, m: Povm) -> float:
    """``-Tr F0 Z`` at ``Z = diag(Pi_j)``."""
    _check(problem, m)
    return float(-np.einsum("jab,jba->", problem.f0, m.elements).real)


def constraint_values(problem: SdpProblem, m: Povm) -> np.ndarray:
    """``Tr F_i Z`` for every constraint ``i``."""
    _check(problem, m)
    return np.einsum("ijab,jba->i", problem.fs, m.elements).real


def primal_objective(e: Ensemble, lam) -> PrimalPoint:
    lam = np.asarray(lam, dtype=np.complex128)
    if lam.shape != (e.dim, e.dim):
        raise DimensionMismatch(f"lambda has shape {lam.shape}, ensemble dim is {e.dim}")
    problem = build_dual_sdp(e)
    x = operator_basis(e.dim).coordinates(lam)
    value = float(problem.c @ x)
    f_of_x = problem.f0 + np.einsum("i,ijab->jab", x, problem.fs)
    low = float(np.linalg.eigvalsh(f_of_x)[:, 0].min())
    return PrimalPoint(x, value, low)


def real_embedding(a) -> np.ndarray:
    """``[[Re A, -Im A], [Im A, Re A]]``; each eigenvalue of ``A`` appears twice."""
    a = np.asarray(a, dtype=np.complex128)
    return np.block([[a.real, -a.imag], [a.imag, a.real]])


def _fmt(v: float) -> str:
    return f"{v:.17g}"


def _sdpa_lines(problem: SdpProblem) -> list:
    m, p = problem.constraint_count, problem.block_dim
    nblock = problem.block_count
    lines = [
        f"{m} = mDIM",
        f"{nblock} = nBLOCK",
        " ".join([str(2 * p)] * nblock),
        " ".join(_fmt(float(v)) for v in problem.c),
    ]
    mats = [-problem.f0] + list(problem.fs)
    iu = np.triu_indices(2 * p)
    for matno, blocks in enumerate(mats):
        for blkno, block in enumerate(blocks, start=1):
            r = 0.5 * real_embedding(block)
            for i, k in zip(*iu):
                v = r[i, k]
                if v != 0.0:
                    lines.append(f"{matno} {blkno} {i + 1} {k + 1} {_fmt(float(v))}")
    return lines


def export_sdpa(problem: SdpProblem, path) -> Path:
    path = Path(path)
    try:
        path.write_text("\n".join(_sdpa_lines(problem)) + "\n")
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc.strerror}") from exc
    return path


def _ints(line: str) -> list:
    tokens = line.replace("{", " ").replace("}", " ").replace(",", " ").replace("(", " ").replace(")", " ").split()
    out = []
    for t in tokens:
        try:
            out.append(int(t))
        except ValueError:
            break
    return out


def read_sdpa_blocks(path):
    """Raw SDPA content: ``(c, block_sizes, real_blocks)`` with
    ``real_blocks[matno][blkno]`` a dense symmetric array."""
    try:
        raw = Path(path).read_text().splitlines()
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc.strerror}") from exc
    lines = [ln for ln in raw if ln.strip() and not ln.lstrip().startswith(("*", '"'))]
    mdim = _ints(lines[0])[0]
    nblock = _ints(lines[1])[0]
    sizes = _ints(lines[2])[:nblock]
    c = np.array([float(t) for t in lines[3].replace("{", " ").replace("}", " ").replace(",", " ").split()[:mdim]])
    mats = [[np.zeros((abs(s), abs(s))) for s in sizes] for _ in range(mdim + 1)]
    for ln in lines[4:]:
        t = ln.split()
        matno, blkno, i, k = (int(x) for x in t[:4])
        v = float(t[4])
        mats[matno][blkno - 1][i - 1, k - 1] = v
        mats[matno][blkno - 1][k - 1, i - 1] = v
    return c, sizes, mats


def read_sdpa(path) -> SdpProblem:
    """Inverse of :func:`export_sdpa`."""
    c, sizes, mats = read_sdpa_blocks(path)
    p = sizes[0] // 2

    def unembed(r):
        return 2.0 * (r[:p, :p] + 1j * r[p:, :p])

    f0 = -np.array([unembed(b) for b in mats[0]])
    fs = np.array([[unembed(b) for b in blocks] for blocks in mats[1:]])
    return SdpProblem(f0=f0, fs=fs, c=c)
