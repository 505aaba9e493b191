# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled banded kernels (Gauss-Seidel, Kaczmarz, banded LU).

Mirror of ``_pykernels``; both agree to round-off. ``data[w + o, i]`` holds
entry ``(i, i + o)`` of a matrix with half-bandwidth ``w``.
"""

from libc.math cimport sqrt

import numpy as np

from .errors import RelaxationBreakdown, SingularMatrixError

ctypedef double complex cplx


cdef inline double abs2(cplx z) nogil:
    return z.real * z.real + z.imag * z.imag


def gs_sweep(const cplx[:, ::1] data, Py_ssize_t w, const cplx[::1] f, cplx[::1] x,
             bint reverse=False):
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t k, i, o, j
    cdef cplx s, d
    for k in range(n):
        i = n - 1 - k if reverse else k
        d = data[w, i]
        if d == 0:
            raise RelaxationBreakdown(f"zero diagonal entry in row {i}")
        s = f[i]
        for o in range(-w, w + 1):
            j = i + o
            if o != 0 and j >= 0 and j < n:
                s = s - data[w + o, i] * x[j]
        x[i] = s / d
    return np.asarray(x)


def kaczmarz_sweep(const cplx[:, ::1] data, Py_ssize_t w, const cplx[::1] f, cplx[::1] x,
                   bint reverse=False):
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t k, i, o, a, b
    cdef cplx res, t, v
    cdef double nrm
    for k in range(n):
        i = n - 1 - k if reverse else k
        a = -w if i >= w else -i
        b = w if i + w <= n - 1 else n - 1 - i
        nrm = 0.0
        res = f[i]
        for o in range(a, b + 1):
            v = data[w + o, i]
            nrm += abs2(v)
            res = res - v * x[i + o]
        if nrm == 0.0:
            raise RelaxationBreakdown(f"zero row {i}")
        t = res / nrm
        for o in range(a, b + 1):
            x[i + o] = x[i + o] + data[w + o, i].conjugate() * t
    return np.asarray(x)


def band_solve(const cplx[:, ::1] data, Py_ssize_t w, const cplx[::1] f):
    cdef Py_ssize_t n = f.shape[0]
    cdef Py_ssize_t width = 3 * w + 1
    cdef Py_ssize_t i, o, k, r, p, c, last, cmax
    cdef cplx[:, ::1] work = np.zeros((n, width), dtype=complex)
    cdef cplx[::1] b = np.array(f, dtype=complex)
    cdef cplx[::1] x = np.zeros(n, dtype=complex)
    cdef cplx m, piv, tmp, s
    cdef double scale = 0.0, tiny, best, v
    for o in range(-w, w + 1):
        for i in range(n):
            if i + o >= 0 and i + o < n:
                work[i, o + w] = data[w + o, i]
                scale = max(scale, abs2(data[w + o, i]))
    tiny = 1e-14 * sqrt(scale)
    for k in range(n):
        last = min(k + w, n - 1)
        p = k
        best = abs2(work[k, w])
        for r in range(k + 1, last + 1):
            v = abs2(work[r, k - r + w])
            if v > best:
                best = v
                p = r
        if sqrt(best) <= tiny:
            raise SingularMatrixError(f"singular pivot in column {k}")
        cmax = min(k + 2 * w, n - 1)
        if p != k:
            for c in range(k, cmax + 1):
                tmp = work[k, c - k + w]
                work[k, c - k + w] = work[p, c - p + w]
                work[p, c - p + w] = tmp
            tmp = b[k]
            b[k] = b[p]
            b[p] = tmp
        piv = work[k, w]
        for r in range(k + 1, last + 1):
            m = work[r, k - r + w] / piv
            if m == 0:
                continue
            work[r, k - r + w] = 0
            for c in range(k + 1, cmax + 1):
                work[r, c - r + w] = work[r, c - r + w] - m * work[k, c - k + w]
            b[r] = b[r] - m * b[k]
    for k in range(n - 1, -1, -1):
        s = b[k]
        for c in range(k + 1, min(k + 2 * w, n - 1) + 1):
            s = s - work[k, c - k + w] * x[c]
        x[k] = s / work[k, w]
    return np.asarray(x)
