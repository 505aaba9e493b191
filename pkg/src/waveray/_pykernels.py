"""Pure-Python banded kernels.

Reference implementation of the hot loops in ``_ckernels.pyx``. Used when the
compiled extension is unavailable or ``WAVERAY_PURE_PYTHON=1`` is set. The
signatures and in-place semantics match the extension exactly.

A band matrix of half-bandwidth ``w`` is stored row-wise: ``data[w + o, i]``
holds entry ``(i, i + o)`` for ``-w <= o <= w``.
"""

import numpy as np

from .errors import RelaxationBreakdown, SingularMatrixError


def _abs2(z):
    return z.real * z.real + z.imag * z.imag


def gs_sweep(data, w, f, x, reverse=False):
    """One Gauss-Seidel sweep, updating ``x`` in place."""
    n = x.shape[0]
    rows = [data[w + o].tolist() for o in range(-w, w + 1)]
    diag = rows[w]
    ff = f.tolist()
    xx = x.tolist()
    order = range(n - 1, -1, -1) if reverse else range(n)
    for i in order:
        d = diag[i]
        if d == 0:
            raise RelaxationBreakdown(f"zero diagonal entry in row {i}")
        s = ff[i]
        for o in range(-w, w + 1):
            j = i + o
            if o != 0 and 0 <= j < n:
                s -= rows[w + o][i] * xx[j]
        xx[i] = s / d
    x[:] = xx
    return x


def kaczmarz_sweep(data, w, f, x, reverse=False):
    """One sweep of complex row projections, updating ``x`` in place."""
    n = x.shape[0]
    rows = [data[w + o].tolist() for o in range(-w, w + 1)]
    ff = f.tolist()
    xx = x.tolist()
    order = range(n - 1, -1, -1) if reverse else range(n)
    lo_o = [max(-w, -i) for i in range(n)]
    for i in order:
        a = lo_o[i]
        b = min(w, n - 1 - i)
        nrm = 0.0
        res = ff[i]
        for o in range(a, b + 1):
            v = rows[w + o][i]
            nrm += _abs2(v)
            res -= v * xx[i + o]
        if nrm == 0.0:
            raise RelaxationBreakdown(f"zero row {i}")
        t = res / nrm
        for o in range(a, b + 1):
            xx[i + o] += rows[w + o][i].conjugate() * t
    x[:] = xx
    return x


def band_solve(data, w, f):
    """Gaussian elimination with partial pivoting; returns a new vector.

    Row interchanges grow the upper band to width ``2w``, as in LAPACK ``gbsv``.
    """
    n = f.shape[0]
    width = 3 * w + 1
    # work[i][c - i + w] holds entry (i, c) for c - i in [-w, 2w]
    work = [[0j] * width for _ in range(n)]
    scale = 0.0
    for o in range(-w, w + 1):
        band = data[w + o].tolist()
        for i in range(max(0, -o), min(n, n - o)):
            v = band[i]
            work[i][o + w] = v
            if abs(v) > scale:
                scale = abs(v)
    tiny = 1e-14 * scale
    b = f.tolist()
    for k in range(n):
        last = min(k + w, n - 1)
        p = k
        best = _abs2(work[k][w])
        for r in range(k + 1, last + 1):
            v = _abs2(work[r][k - r + w])
            if v > best:
                best, p = v, r
        if best ** 0.5 <= tiny:
            raise SingularMatrixError(f"singular pivot in column {k}")
        cmax = min(k + 2 * w, n - 1)
        if p != k:
            rk, rp = work[k], work[p]
            for c in range(k, cmax + 1):
                ik, ip = c - k + w, c - p + w
                rk[ik], rp[ip] = rp[ip], rk[ik]
            b[k], b[p] = b[p], b[k]
        rk = work[k]
        piv = rk[w]
        for r in range(k + 1, last + 1):
            rr = work[r]
            m = rr[k - r + w] / piv
            if m == 0:
                continue
            rr[k - r + w] = 0j
            for c in range(k + 1, cmax + 1):
                rr[c - r + w] -= m * rk[c - k + w]
            b[r] -= m * b[k]
    x = [0j] * n
    for k in range(n - 1, -1, -1):
        rk = work[k]
        s = b[k]
        for c in range(k + 1, min(k + 2 * w, n - 1) + 1):
            s -= rk[c - k + w] * x[c]
        x[k] = s / rk[w]
    return np.array(x, dtype=complex)
