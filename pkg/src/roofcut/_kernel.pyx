# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled oracle kernel: three-qubit measures and multistart Nelder-Mead.

Amplitude index convention: ``i = i0 + 2*i1 + 4*i2`` (qubit k is bit k).
Measure ids: 0 = three-tangle, 1 = pi-tangle.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs

cnp.import_array()

cdef enum:
    MAXD = 16
    MAXR = 8


cdef inline double cabs2(double complex z) nogil:
    return z.real * z.real + z.imag * z.imag


cdef double tau3(const double complex* a) nogil:
    cdef double complex d
    d = (a[0] * a[0] * a[7] * a[7] + a[1] * a[1] * a[6] * a[6]
         + a[2] * a[2] * a[5] * a[5] + a[4] * a[4] * a[3] * a[3])
    d = d - 2.0 * (a[0] * a[1] * a[6] * a[7] + a[0] * a[2] * a[5] * a[7]
                   + a[0] * a[4] * a[3] * a[7] + a[1] * a[2] * a[5] * a[6]
                   + a[1] * a[4] * a[3] * a[6] + a[2] * a[4] * a[3] * a[5])
    d = d + 4.0 * (a[0] * a[3] * a[5] * a[6] + a[1] * a[2] * a[4] * a[7])
    return 4.0 * sqrt(cabs2(d))


cdef double min_eig4(double complex m[4][4]) nogil:
    """Smallest eigenvalue of a 4x4 Hermitian matrix.

    Newton's method on the characteristic polynomial started below the
    spectrum increases monotonically to the smallest root.
    """
    cdef double complex m2[4][4]
    cdef int i, j, k
    cdef double p1 = 0.0, p2 = 0.0, p3 = 0.0, p4 = 0.0, fro = 0.0
    cdef double e1, e2, e3, e4, lam, f, df, step
    for i in range(4):
        for j in range(4):
            m2[i][j] = 0.0
            for k in range(4):
                m2[i][j] = m2[i][j] + m[i][k] * m[k][j]
    for i in range(4):
        p1 += m[i][i].real
        p2 += m2[i][i].real
        for j in range(4):
            p3 += (m2[i][j] * m[j][i]).real
            p4 += cabs2(m2[i][j])
            fro += cabs2(m[i][j])
    e1 = p1
    e2 = (e1 * p1 - p2) / 2.0
    e3 = (e2 * p1 - e1 * p2 + p3) / 3.0
    e4 = (e3 * p1 - e2 * p2 + e1 * p3 - p4) / 4.0
    lam = -sqrt(fro) - 1e-12
    for i in range(200):
        f = (((lam - e1) * lam + e2) * lam - e3) * lam + e4
        df = ((4.0 * lam - 3.0 * e1) * lam + 2.0 * e2) * lam - e3
        if f <= 0.0 or df >= 0.0:
            break
        step = -f / df
        lam += step
        if step <= 1e-16 * (1.0 + fabs(lam)):
            break
    return lam


cdef double pi3(const double complex* a) nogil:
    cdef double single[3]
    cdef double pair[3]
    cdef double complex r00, r11, r01
    cdef double complex rho[4][4]
    cdef double complex pt[4][4]
    cdef int k, l, m, idx, u, v, bm, iu, iv, uk, ul, vk, vl, pi_, pj
    cdef double det, lam, total
    # single-qubit cuts: N_{k(rest)} = 2 sqrt(det rho_k)
    for k in range(3):
        r00 = 0.0
        r11 = 0.0
        r01 = 0.0
        for idx in range(8):
            if (idx >> k) & 1 == 0:
                r00 = r00 + cabs2(a[idx])
                r01 = r01 + a[idx] * a[idx | (1 << k)].conjugate()
            else:
                r11 = r11 + cabs2(a[idx])
        det = r00.real * r11.real - cabs2(r01)
        if det < 0.0:
            det = 0.0
        single[k] = 2.0 * sqrt(det)
    # pairs (0,1), (0,2), (1,2); reduced state on (k, l), partial transpose on k
    for m in range(3):
        k = 0 if m != 0 else 1
        l = 2 if m != 2 else 1
        for u in range(4):
            for v in range(4):
                rho[u][v] = 0.0
                for bm in range(2):
                    iu = ((u & 1) << k) | ((u >> 1) << l) | (bm << m)
                    iv = ((v & 1) << k) | ((v >> 1) << l) | (bm << m)
                    rho[u][v] = rho[u][v] + a[iu] * a[iv].conjugate()
        for u in range(4):
            for v in range(4):
                pi_ = (v & 1) | (u & 2)
                pj = (u & 1) | (v & 2)
                pt[u][v] = rho[pi_][pj]
        lam = min_eig4(pt)
        pair[m] = -2.0 * lam if lam < 0.0 else 0.0
    # pair[m] is the negativity of the pair that excludes qubit m
    total = 0.0
    for k in range(3):
        total += single[k] * single[k]
    total -= 2.0 * (pair[0] * pair[0] + pair[1] * pair[1] + pair[2] * pair[2])
    total /= 3.0
    if total < 0.0:
        total = 0.0
    return total


cdef inline double measure(const double complex* psi, int mid) nogil:
    if mid == 0:
        return tau3(psi)
    return pi3(psi)


cdef double objective(const double* p, int r, const double complex* V,
                      const double complex* X, int mid) nogil:
    cdef double complex a[MAXR]
    cdef double complex psi[8]
    cdef double complex acc
    cdef double nrm = 0.0, quad = 0.0
    cdef int i, j
    for i in range(r):
        a[i] = p[i] + 1j * p[r + i]
        nrm += cabs2(a[i])
    if nrm < 1e-24:
        return 1e300
    nrm = sqrt(nrm)
    for i in range(r):
        a[i] = a[i] / nrm
    for i in range(8):
        acc = 0.0
        for j in range(r):
            acc = acc + V[i * r + j] * a[j]
        psi[i] = acc
    for i in range(r):
        acc = 0.0
        for j in range(r):
            acc = acc + X[i * r + j] * a[j]
        quad += (a[i].conjugate() * acc).real
    return measure(psi, mid) + quad


cdef int nelder_mead(const double* x0, int d, int r, const double complex* V,
                     const double complex* X, int mid, int max_iter,
                     double ftol, double xtol, double scale,
                     double* xbest, double* fbest) nogil:
    cdef double sim[MAXD + 1][MAXD]
    cdef double fs[MAXD + 1]
    cdef double xbar[MAXD]
    cdef double xr[MAXD]
    cdef double xe[MAXD]
    cdef double xc[MAXD]
    cdef double tmp[MAXD]
    cdef double alpha = 1.0
    cdef double gamma = 1.0 + 2.0 / d
    cdef double rho = 0.75 - 0.5 / d
    cdef double sigma = 1.0 - 1.0 / d
    cdef double fr, fe, fc, ftmp, spread, xs
    cdef int i, j, q, it, shrink
    for j in range(d):
        sim[0][j] = x0[j]
    for i in range(1, d + 1):
        for j in range(d):
            sim[i][j] = x0[j]
        sim[i][i - 1] = sim[i][i - 1] + scale
    for i in range(d + 1):
        fs[i] = objective(sim[i], r, V, X, mid)
    it = 0
    while True:
        # stable insertion sort by value
        for i in range(1, d + 1):
            ftmp = fs[i]
            for j in range(d):
                tmp[j] = sim[i][j]
            j = i - 1
            while j >= 0 and fs[j] > ftmp:
                fs[j + 1] = fs[j]
                for q in range(d):
                    sim[j + 1][q] = sim[j][q]
                j -= 1
            fs[j + 1] = ftmp
            for q in range(d):
                sim[j + 1][q] = tmp[q]
        if it >= max_iter:
            break
        spread = fs[d] - fs[0]
        xs = 0.0
        for i in range(1, d + 1):
            for j in range(d):
                if fabs(sim[i][j] - sim[0][j]) > xs:
                    xs = fabs(sim[i][j] - sim[0][j])
        if spread <= ftol and xs <= xtol:
            break
        it += 1
        for j in range(d):
            xbar[j] = 0.0
        for i in range(d):
            for j in range(d):
                xbar[j] += sim[i][j]
        for j in range(d):
            xbar[j] /= d
            xr[j] = xbar[j] + alpha * (xbar[j] - sim[d][j])
        fr = objective(xr, r, V, X, mid)
        shrink = 0
        if fr < fs[0]:
            for j in range(d):
                xe[j] = xbar[j] + gamma * (xr[j] - xbar[j])
            fe = objective(xe, r, V, X, mid)
            if fe < fr:
                for j in range(d):
                    sim[d][j] = xe[j]
                fs[d] = fe
            else:
                for j in range(d):
                    sim[d][j] = xr[j]
                fs[d] = fr
        elif fr < fs[d - 1]:
            for j in range(d):
                sim[d][j] = xr[j]
            fs[d] = fr
        elif fr < fs[d]:
            for j in range(d):
                xc[j] = xbar[j] + rho * (xr[j] - xbar[j])
            fc = objective(xc, r, V, X, mid)
            if fc <= fr:
                for j in range(d):
                    sim[d][j] = xc[j]
                fs[d] = fc
            else:
                shrink = 1
        else:
            for j in range(d):
                xc[j] = xbar[j] + rho * (sim[d][j] - xbar[j])
            fc = objective(xc, r, V, X, mid)
            if fc < fs[d]:
                for j in range(d):
                    sim[d][j] = xc[j]
                fs[d] = fc
            else:
                shrink = 1
        if shrink:
            for i in range(1, d + 1):
                for j in range(d):
                    sim[i][j] = sim[0][j] + sigma * (sim[i][j] - sim[0][j])
                fs[i] = objective(sim[i], r, V, X, mid)
    for j in range(d):
        xbest[j] = sim[0][j]
    fbest[0] = fs[0]
    return it


def measure_value(psi, int measure_id):
    """Evaluate a measure on an 8-amplitude state (no normalization)."""
    cdef const double complex[::1] a = np.ascontiguousarray(psi, dtype=np.complex128)
    if a.shape[0] != 8:
        raise ValueError("kernel measures need 8 amplitudes")
    return measure(&a[0], measure_id)


def eval_batch(params, V, X, int measure_id):
    """Objective ``E(psi) + <a|X|a>`` for each row of ``params`` (re | im)."""
    cdef const double[:, ::1] P = np.ascontiguousarray(params, dtype=np.float64)
    cdef const double complex[:, ::1] Vm = np.ascontiguousarray(V, dtype=np.complex128)
    cdef const double complex[:, ::1] Xm = np.ascontiguousarray(X, dtype=np.complex128)
    cdef int r = Vm.shape[1]
    cdef Py_ssize_t k, n = P.shape[0]
    _check(P.shape[1], r, Vm.shape[0], Xm.shape[0], Xm.shape[1])
    out = np.empty(n)
    cdef double[::1] o = out
    with nogil:
        for k in range(n):
            o[k] = objective(&P[k, 0], r, &Vm[0, 0], &Xm[0, 0], measure_id)
    return out


def multistart(starts, V, X, int measure_id, int max_iter, double ftol,
               double xtol, double scale):
    """Run Nelder-Mead from every row of ``starts``.

    Returns ``(params, values, iterations)`` with one row per start.
    """
    cdef double[:, ::1] S = np.array(starts, dtype=np.float64, order="C")
    cdef const double complex[:, ::1] Vm = np.ascontiguousarray(V, dtype=np.complex128)
    cdef const double complex[:, ::1] Xm = np.ascontiguousarray(X, dtype=np.complex128)
    cdef int r = Vm.shape[1]
    cdef int d = 2 * r
    cdef Py_ssize_t k, n = S.shape[0]
    _check(S.shape[1], r, Vm.shape[0], Xm.shape[0], Xm.shape[1])
    xs = np.empty((n, d))
    fs = np.empty(n)
    its = np.empty(n, dtype=np.int64)
    cdef double[:, ::1] xo = xs
    cdef double[::1] fo = fs
    cdef long long[::1] io = its
    with nogil:
        for k in range(n):
            io[k] = nelder_mead(&S[k, 0], d, r, &Vm[0, 0], &Xm[0, 0], measure_id,
                                max_iter, ftol, xtol, scale, &xo[k, 0], &fo[k])
    return xs, fs, its


def _check(int ncols, int r, int vrows, int xr, int xc):
    if vrows != 8:
        raise ValueError("kernel supports three-qubit states only")
    if r < 1 or r > MAXR or ncols != 2 * r or xr != r or xc != r:
        raise ValueError("inconsistent kernel shapes")
