"""Pure-NumPy fixed-point kernel. Used when the compiled ``_kernels`` module
is unavailable or disabled; both must produce the same iterates.
"""

import numpy as np

from .errors import NotPositiveSemidefinite


def _herm(a):
    return 0.5 * (a + a.conj().swapaxes(-1, -2))


def lagrange_parts(weighted, povm, rank_cutoff):
    """Return ``(lam, lam_pinv, kernel_projector, q)`` with ``q_j = W_j Pi_j W_j``
    and ``lam = (sum_j q_j)^(1/2)``."""
    q = weighted @ povm @ weighted
    s = _herm(q.sum(axis=0))
    w, v = np.linalg.eigh(s)
    wmax = w[-1]
    if w[0] < -rank_cutoff * max(1.0, wmax):
        raise NotPositiveSemidefinite(f"sum_j W_j Pi_j W_j has eigenvalue {w[0]:.3e}")
    keep = w > rank_cutoff * max(wmax, 0.0)
    root = np.where(keep, np.sqrt(np.where(keep, w, 0.0)), 0.0)
    inv = np.where(keep, 1.0 / np.where(keep, root, 1.0), 0.0)
    vh = v.conj().T
    lam = _herm((v * root) @ vh)
    lam_pinv = _herm((v * inv) @ vh)
    kernel = None
    if not keep.all():
        kernel = _herm((v * (~keep)) @ vh)
    return lam, lam_pinv, kernel, q


def clip_psd(povm):
    """Zero the negative eigenvalues of any element that has them.

    The update scales the null space of a rank-deficient element by
    ``(xi rho lam^-1)^2`` each step, so roundoff there grows geometrically and
    eventually turns the element indefinite. Resetting it each step stops that.
    """
    low = np.linalg.eigvalsh(povm)[:, 0]
    for j in np.flatnonzero(low < 0):
        w, v = np.linalg.eigh(povm[j])
        povm[j] = _herm((v * np.maximum(w, 0.0)) @ v.conj().T)
    return povm


def renormalize(povm):
    """Congruence by ``T^-1/2`` with ``T = sum_j Pi_j``.

    ``lam^-1 q lam^-1`` carries roundoff of order ``eps * cond(lam)^2`` in its
    sum. ``T`` is close to the identity, so removing that error is well
    conditioned, and positivity is kept.
    """
    t = _herm(povm.sum(axis=0))
    if np.abs(t - np.eye(t.shape[0])).max() <= 1e-14:
        return povm
    w, v = np.linalg.eigh(t)
    r = _herm((v / np.sqrt(w)) @ v.conj().T)
    return _herm(r @ povm @ r)


def update(povm, q, lam_pinv, kernel):
    new = lam_pinv @ q @ lam_pinv
    if kernel is not None:
        # components in ker(lam) carry over so completeness stays exact
        new = new + kernel @ povm @ kernel
    return renormalize(clip_psd(_herm(new)))


def certified_gap(weighted, povm, lam):
    """``(gap, P_s)`` for the shifted dual witness ``lam + delta*I``."""
    ps = float(np.einsum("jab,jba->", weighted, povm).real)
    res = np.linalg.eigvalsh(lam[None] - weighted)[:, 0]
    delta = max(0.0, -float(res.min()))
    gap = float(np.trace(lam).real) + lam.shape[0] * delta - ps
    return gap, ps


def run_fixed_point(weighted, povm, max_iterations, gap_tolerance, rank_cutoff):
    weighted = np.ascontiguousarray(weighted, dtype=np.complex128)
    povm = np.array(povm, dtype=np.complex128, copy=True)
    trace = np.empty(max_iterations, dtype=float)
    k = 0
    converged = False
    while True:
        lam, lam_pinv, kernel, q = lagrange_parts(weighted, povm, rank_cutoff)
        gap, ps = certified_gap(weighted, povm, lam)
        if k > 0:
            trace[k - 1] = ps
        if gap <= gap_tolerance:
            converged = True
            break
        if k >= max_iterations:
            break
        povm = update(povm, q, lam_pinv, kernel)
        k += 1
    return povm, lam, k, trace[:k].copy(), gap, converged
