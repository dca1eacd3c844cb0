# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops: MM descent steps and the fixed-diagonal PSD ADMM.

Mirrors ``fallback.py`` exactly; see that module for the algorithm notes.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt
from scipy.linalg.cython_blas cimport zgemv
from scipy.linalg.cython_lapack cimport zheevd

cnp.import_array()

cdef extern from "complex.h":
    double complex conj(double complex) nogil
    double creal(double complex) nogil
    double cimag(double complex) nogil


cdef inline double _abs2(double complex z) nogil:
    return creal(z) * creal(z) + cimag(z) * cimag(z)


def mm_inner(Q, q, p0, int n_t, int n_users, double lam, double row_target,
             double tol, int max_iters):
    cdef cnp.ndarray[cnp.complex128_t, ndim=2, mode="fortran"] Qf = \
        np.asfortranarray(Q, dtype=np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] qv = \
        np.ascontiguousarray(q, dtype=np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] p = \
        np.array(p0, dtype=np.complex128)
    cdef int n = n_t * n_users
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] y = np.empty(n, np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] pn = np.empty(n, np.complex128)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] f_hist = np.empty(max_iters + 1)
    cdef double complex zone = 1.0, zzero = 0.0, z
    cdef int inc = 1, it, i, j, c, n_iters = 0, degenerate = 0
    cdef bint converged = False
    cdef double fq, fl, ss, sc, delta2

    for it in range(1, max_iters + 1):
        zgemv("N", &n, &n, &zone, &Qf[0, 0], &n, &p[0], &inc, &zzero,
              &y[0], &inc)
        fq = 0.0
        fl = 0.0
        for i in range(n):
            fq += creal(conj(p[i]) * y[i])
            fl += creal(conj(p[i]) * qv[i])
        f_hist[it - 1] = fq - 2.0 * fl
        for i in range(n):
            y[i] = qv[i] - y[i] + lam * p[i]
        for j in range(n_t):
            ss = 0.0
            for c in range(n_users):
                ss += _abs2(y[c * n_t + j])
            if ss == 0.0:
                degenerate += 1
                for c in range(n_users):
                    pn[c * n_t + j] = p[c * n_t + j]
            else:
                sc = row_target / sqrt(ss)
                for c in range(n_users):
                    pn[c * n_t + j] = sc * y[c * n_t + j]
        delta2 = 0.0
        for i in range(n):
            delta2 += _abs2(pn[i] - p[i])
            p[i] = pn[i]
        n_iters = it
        if sqrt(delta2) <= tol:
            converged = True
            break

    zgemv("N", &n, &n, &zone, &Qf[0, 0], &n, &p[0], &inc, &zzero, &y[0], &inc)
    fq = 0.0
    fl = 0.0
    for i in range(n):
        fq += creal(conj(p[i]) * y[i])
        fl += creal(conj(p[i]) * qv[i])
    f_hist[n_iters] = fq - 2.0 * fl
    return p, f_hist[:n_iters + 1].copy(), n_iters, converged, degenerate


def admm_linear_fixed_diag(B, double diag_value, double penalty, double tol,
                           int max_iters, Y0, U0):
    cdef int n = B.shape[0]
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] S = \
        (np.asfortranarray(B, dtype=np.complex128) / penalty).reshape(-1, order="F")
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] Y = \
        np.asfortranarray(Y0, dtype=np.complex128).reshape(-1, order="F").copy()
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] U = \
        np.asfortranarray(U0, dtype=np.complex128).reshape(-1, order="F").copy()
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] X = Y.copy()
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] Yp = np.empty(n * n, np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] A = np.empty(n * n, np.complex128)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] w = np.empty(n)

    cdef int lwork = 2 * n + n * n
    cdef int lrwork = 1 + 5 * n + 2 * n * n
    cdef int liwork = 3 + 5 * n
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] work = np.empty(lwork, np.complex128)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] rwork = np.empty(lrwork)
    cdef cnp.ndarray[cnp.int32_t, ndim=1] iwork = np.empty(liwork, np.int32)
    cdef int info = 0, it, i, j, k, n_iters = 0
    cdef bint converged = False
    cdef double r = 0.0, s = 0.0, r2, s2, nx, ny, nu, eps_pri, eps_dual
    cdef double tau = penalty
    cdef double complex acc

    for it in range(1, max_iters + 1):
        for i in range(n * n):
            X[i] = Y[i] - U[i] - S[i] * (penalty / tau)
        for i in range(n):
            X[i + i * n] = diag_value
        for i in range(n * n):
            Yp[i] = Y[i]
            A[i] = X[i] + U[i]
        zheevd("V", "L", &n, <double complex *> &A[0], &n, &w[0],
               <double complex *> &work[0], &lwork, &rwork[0], &lrwork,
               <int *> &iwork[0], &liwork, &info)
        if info != 0:
            raise RuntimeError(f"zheevd failed with info={info}")
        for j in range(n):
            for i in range(n):
                acc = 0.0
                for k in range(n):
                    if w[k] > 0.0:
                        acc += w[k] * A[i + k * n] * conj(A[j + k * n])
                Y[i + j * n] = acc
        r2 = 0.0
        s2 = 0.0
        nx = 0.0
        ny = 0.0
        nu = 0.0
        for i in range(n * n):
            U[i] = U[i] + X[i] - Y[i]
            r2 += _abs2(X[i] - Y[i])
            s2 += _abs2(Y[i] - Yp[i])
            nx += _abs2(X[i])
            ny += _abs2(Y[i])
            nu += _abs2(U[i])
        r = sqrt(r2)
        s = tau * sqrt(s2)
        n_iters = it
        eps_pri = tol * max(1.0, max(sqrt(nx), sqrt(ny)))
        eps_dual = tol * max(1.0, tau * sqrt(nu))
        if r <= eps_pri and s <= eps_dual:
            converged = True
            break
        if it % 50 == 0:
            if r > 5.0 * s and tau < 1e6 * penalty:
                tau *= 2.0
                for i in range(n * n):
                    U[i] = U[i] / 2.0
            elif s > 5.0 * r and tau > 1e-6 * penalty:
                tau /= 2.0
                for i in range(n * n):
                    U[i] = U[i] * 2.0

    return (np.asarray(X).reshape(n, n, order="F"),
            np.asarray(Y).reshape(n, n, order="F"),
            np.asarray(U).reshape(n, n, order="F"),
            n_iters, r, s, converged)
