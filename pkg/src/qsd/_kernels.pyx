# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled fixed-point kernel; same contract as ``qsd._fallback.run_fixed_point``.

Matrices are row-major. LAPACK sees a row-major Hermitian A as conj(A), so
after zheev the rows of the work array hold conj'd eigenvectors of A:
U[r, i] = conj(a[i, r]).
"""

import numpy as np
from libc.math cimport sqrt
from scipy.linalg.cython_lapack cimport zheev

from .errors import NotPositiveSemidefinite

ctypedef double complex cplx


cdef inline double creal(cplx z) nogil:
    return z.real


cdef inline cplx conj(cplx z) nogil:
    return z.real - 1j * z.imag


cdef void matmul(int n, const cplx* a, const cplx* b, cplx* out) noexcept nogil:
    cdef int i, k, c
    cdef cplx s
    for i in range(n):
        for c in range(n):
            s = 0
            for k in range(n):
                s = s + a[i * n + k] * b[k * n + c]
            out[i * n + c] = s


cdef void hermitize(int n, cplx* a) noexcept nogil:
    cdef int i, c
    cdef cplx z
    for i in range(n):
        a[i * n + i] = a[i * n + i].real
        for c in range(i + 1, n):
            z = 0.5 * (a[i * n + c] + conj(a[c * n + i]))
            a[i * n + c] = z
            a[c * n + i] = conj(z)


cdef int heev(bint vectors, int n, cplx* a, double* w, cplx* work, int lwork,
              double* rwork) noexcept nogil:
    cdef char jobz = b'V' if vectors else b'N'
    cdef char uplo = b'L'
    cdef int info = 0
    zheev(&jobz, &uplo, &n, a, &n, w, work, &lwork, rwork, &info)
    return info


cdef void spectral(int n, const cplx* vecs, const double* f, cplx* out) noexcept nogil:
    # out = sum_i f[i] u_i u_i^dagger with u_i[r] = conj(vecs[i, r])
    cdef int i, r, c
    cdef cplx s
    for r in range(n):
        for c in range(n):
            s = 0
            for i in range(n):
                if f[i] != 0.0:
                    s = s + f[i] * conj(vecs[i * n + r]) * vecs[i * n + c]
            out[r * n + c] = s


def run_fixed_point(weighted, povm, int max_iterations, double gap_tolerance,
                    double rank_cutoff):
    cdef cplx[:, :, ::1] W = np.ascontiguousarray(weighted, dtype=np.complex128)
    cdef cplx[:, :, ::1] P = np.array(povm, dtype=np.complex128, copy=True, order="C")
    cdef int M = W.shape[0]
    cdef int n = W.shape[1]
    cdef int nn = n * n

    Q_arr = np.empty((M, n, n), dtype=np.complex128)
    cdef cplx[:, :, ::1] Q = Q_arr
    cdef cplx[:, ::1] S = np.empty((n, n), dtype=np.complex128)
    cdef cplx[:, ::1] T = np.empty((n, n), dtype=np.complex128)
    cdef cplx[:, ::1] U = np.empty((n, n), dtype=np.complex128)
    lam_arr = np.empty((n, n), dtype=np.complex128)
    cdef cplx[:, ::1] lam = lam_arr
    cdef cplx[:, ::1] linv = np.empty((n, n), dtype=np.complex128)
    cdef cplx[:, ::1] ker = np.empty((n, n), dtype=np.complex128)
    cdef double[::1] w = np.empty(n, dtype=float)
    cdef double[::1] fl = np.empty(n, dtype=float)
    cdef double[::1] fi = np.empty(n, dtype=float)
    cdef double[::1] fk = np.empty(n, dtype=float)
    cdef int lwork = 64 * n
    cdef cplx[::1] work = np.empty(lwork, dtype=np.complex128)
    cdef double[::1] rwork = np.empty(max(1, 3 * n - 2), dtype=float)
    trace_arr = np.empty(max_iterations, dtype=float)
    cdef double[::1] trace = trace_arr

    cdef int j, a, b, i, info
    cdef int k = 0
    cdef bint converged = False
    cdef bint has_kernel
    cdef double wmax, thresh, ps, trlam, delta, gap = 0.0, low
    cdef cplx s

    while True:
        with nogil:
            for a in range(nn):
                (&S[0, 0])[a] = 0
            for j in range(M):
                matmul(n, &P[j, 0, 0], &W[j, 0, 0], &T[0, 0])
                matmul(n, &W[j, 0, 0], &T[0, 0], &Q[j, 0, 0])
                for a in range(nn):
                    (&S[0, 0])[a] = (&S[0, 0])[a] + (&Q[j, 0, 0])[a]
            hermitize(n, &S[0, 0])
            for a in range(nn):
                (&U[0, 0])[a] = (&S[0, 0])[a]
            info = heev(True, n, &U[0, 0], &w[0], &work[0], lwork, &rwork[0])
        if info != 0:
            raise ArithmeticError(f"zheev failed with info={info}")
        wmax = w[n - 1]
        if w[0] < -rank_cutoff * (wmax if wmax > 1.0 else 1.0):
            raise NotPositiveSemidefinite(f"sum_j W_j Pi_j W_j has eigenvalue {w[0]:.3e}")

        with nogil:
            thresh = rank_cutoff * (wmax if wmax > 0.0 else 0.0)
            has_kernel = False
            for i in range(n):
                if w[i] > thresh:
                    fl[i] = sqrt(w[i])
                    fi[i] = 1.0 / fl[i]
                    fk[i] = 0.0
                else:
                    fl[i] = 0.0
                    fi[i] = 0.0
                    fk[i] = 1.0
                    has_kernel = True
            spectral(n, &U[0, 0], &fl[0], &lam[0, 0])
            spectral(n, &U[0, 0], &fi[0], &linv[0, 0])
            if has_kernel:
                spectral(n, &U[0, 0], &fk[0], &ker[0, 0])
            hermitize(n, &lam[0, 0])
            hermitize(n, &linv[0, 0])

            ps = 0.0
            for j in range(M):
                for a in range(n):
                    for b in range(n):
                        ps += creal(W[j, a, b] * P[j, b, a])
            trlam = 0.0
            for a in range(n):
                trlam += lam[a, a].real
            delta = 0.0
            for j in range(M):
                for a in range(nn):
                    (&U[0, 0])[a] = (&lam[0, 0])[a] - (&W[j, 0, 0])[a]
                info = heev(False, n, &U[0, 0], &w[0], &work[0], lwork, &rwork[0])
                if info != 0:
                    break
                if -w[0] > delta:
                    delta = -w[0]
        if info != 0:
            raise ArithmeticError(f"zheev failed with info={info}")
        gap = trlam + n * delta - ps

        if k > 0:
            trace[k - 1] = ps
        if gap <= gap_tolerance:
            converged = True
            break
        if k >= max_iterations:
            break

        with nogil:
            for j in range(M):
                matmul(n, &linv[0, 0], &Q[j, 0, 0], &T[0, 0])
                matmul(n, &T[0, 0], &linv[0, 0], &S[0, 0])
                if has_kernel:
                    matmul(n, &ker[0, 0], &P[j, 0, 0], &T[0, 0])
                    matmul(n, &T[0, 0], &ker[0, 0], &U[0, 0])
                    for a in range(nn):
                        (&S[0, 0])[a] = (&S[0, 0])[a] + (&U[0, 0])[a]
                hermitize(n, &S[0, 0])
                # clip roundoff-negative eigenvalues before they get amplified
                for a in range(nn):
                    (&U[0, 0])[a] = (&S[0, 0])[a]
                info = heev(False, n, &U[0, 0], &w[0], &work[0], lwork, &rwork[0])
                if info != 0:
                    break
                if w[0] < 0.0:
                    for a in range(nn):
                        (&U[0, 0])[a] = (&S[0, 0])[a]
                    info = heev(True, n, &U[0, 0], &w[0], &work[0], lwork, &rwork[0])
                    if info != 0:
                        break
                    for i in range(n):
                        fl[i] = w[i] if w[i] > 0.0 else 0.0
                    spectral(n, &U[0, 0], &fl[0], &S[0, 0])
                    hermitize(n, &S[0, 0])
                for a in range(nn):
                    (&P[j, 0, 0])[a] = (&S[0, 0])[a]
        if info != 0:
            raise ArithmeticError(f"zheev failed with info={info}")

        with nogil:
            # rescale by T^-1/2, T = sum_j Pi_j, to cancel eps*cond(lam)^2 drift
            for a in range(nn):
                (&S[0, 0])[a] = 0
            for j in range(M):
                for a in range(nn):
                    (&S[0, 0])[a] = (&S[0, 0])[a] + (&P[j, 0, 0])[a]
            hermitize(n, &S[0, 0])
            low = 0.0
            for a in range(n):
                for b in range(n):
                    s = S[a, b] - (1.0 if a == b else 0.0)
                    if creal(s * conj(s)) > low:
                        low = creal(s * conj(s))
            if low > 1e-28:
                for a in range(nn):
                    (&U[0, 0])[a] = (&S[0, 0])[a]
                info = heev(True, n, &U[0, 0], &w[0], &work[0], lwork, &rwork[0])
                if info == 0:
                    for i in range(n):
                        fl[i] = 1.0 / sqrt(w[i])
                    spectral(n, &U[0, 0], &fl[0], &linv[0, 0])
                    hermitize(n, &linv[0, 0])
                    for j in range(M):
                        matmul(n, &linv[0, 0], &P[j, 0, 0], &T[0, 0])
                        matmul(n, &T[0, 0], &linv[0, 0], &P[j, 0, 0])
                        hermitize(n, &P[j, 0, 0])
        if info != 0:
            raise ArithmeticError(f"zheev failed with info={info}")
        k += 1

    return np.asarray(P), lam_arr, k, trace_arr[:k].copy(), gap, converged
