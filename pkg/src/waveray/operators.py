"""Banded complex operators, Helmholtz assembly and grid transfers.

Grid functions are plain complex numpy arrays whose length equals the node
count of the grid they live on.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import kernels
from .errors import DimensionError, InvalidGridError
from .mesh import Grid1D, WaveNumberField


@dataclass(frozen=True, eq=False)
class BandedOperator:
    """Complex band matrix with half-bandwidth ``w``, stored by diagonals.

    ``data[w + o, i]`` holds entry ``(i, i + o)``. Entries that would reference
    columns outside the matrix must be zero. Wave operators are tridiagonal
    (``w = 1``); upwind ray operators use ``w = 2``.
    """

    data: np.ndarray
    w: int = 1

    def __post_init__(self):
        if self.data.ndim != 2 or self.data.shape[0] != 2 * self.w + 1:
            raise DimensionError(f"band storage must have shape (2w+1, n), got {self.data.shape}")
        n = self.data.shape[1]
        for o in range(-self.w, self.w + 1):
            band = self.data[self.w + o]
            outside = band[:max(0, -o)] if o < 0 else band[n - o:]
            if o and np.any(outside != 0):
                raise DimensionError("band entries reference columns outside the matrix")
        self.data.setflags(write=False)

    @classmethod
    def from_bands(cls, lower, diag, upper) -> BandedOperator:
        """Tridiagonal operator; ``lower[0]`` and ``upper[-1]`` must be zero."""
        data = np.array([lower, diag, upper], dtype=complex)
        return cls(np.ascontiguousarray(data), 1)

    @classmethod
    def from_diagonals(cls, diagonals: dict[int, np.ndarray], n: int, w: int | None = None) -> BandedOperator:
        """Build from ``{offset: values}``; ``values[i]`` is entry ``(i, i + offset)``."""
        w = max((abs(o) for o in diagonals), default=0) if w is None else w
        data = np.zeros((2 * w + 1, n), dtype=complex)
        for o, vals in diagonals.items():
            if abs(o) > w:
                raise DimensionError(f"offset {o} exceeds half-bandwidth {w}")
            data[w + o] = vals
        return cls(data, w)

    @classmethod
    def from_sparse(cls, mat, w: int = 1, tol: float = 0.0) -> BandedOperator:
        """Convert a sparse matrix, refusing entries outside half-bandwidth ``w``."""
        mat = sp.coo_matrix(mat)
        n = mat.shape[0]
        off = mat.col - mat.row
        outside = np.abs(off) > w
        if np.any(outside) and np.abs(mat.data[outside]).max() > tol:
            raise DimensionError(f"operator bandwidth exceeds {w}")
        data = np.zeros((2 * w + 1, n), dtype=complex)
        keep = ~outside
        np.add.at(data, (w + off[keep], mat.row[keep]), mat.data[keep])
        return cls(data, w)

    @classmethod
    def from_dense(cls, M, w: int | None = None) -> BandedOperator:
        M = np.asarray(M)
        if w is None:
            rows, cols = np.nonzero(M)
            w = int(np.abs(cols - rows).max()) if rows.size else 0
        return cls.from_sparse(sp.coo_matrix(M), w)

    @property
    def n(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n, self.n)

    def band(self, offset: int) -> np.ndarray:
        """Entries ``(i, i + offset)`` for every row ``i`` (read-only view)."""
        return self.data[self.w + offset]

    @property
    def lower(self) -> np.ndarray:
        return self.band(-1)

    @property
    def diag(self) -> np.ndarray:
        return self.band(0)

    @property
    def upper(self) -> np.ndarray:
        return self.band(1)

    def row(self, i: int) -> dict[int, complex]:
        """Stored entries of row ``i`` as ``{column: value}``."""
        return {i + o: complex(self.data[self.w + o, i])
                for o in range(-self.w, self.w + 1) if 0 <= i + o < self.n}

    def matvec(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x)
        if x.shape[0] != self.n:
            raise DimensionError(f"vector of length {x.shape[0]} for operator of size {self.n}")
        y = self.diag * x
        for o in range(1, self.w + 1):
            y[o:] += self.data[self.w - o, o:] * x[:-o]
            y[:-o] += self.data[self.w + o, :-o] * x[o:]
        return y

    __matmul__ = matvec

    def tosparse(self) -> sp.csr_matrix:
        n = self.n
        diags, offsets = [], []
        for o in range(-self.w, self.w + 1):
            if abs(o) >= n:
                continue
            b = self.band(o)
            diags.append(b[-o:] if o < 0 else b[:n - o])
            offsets.append(o)
        return sp.diags(diags, offsets, shape=self.shape, format="csr", dtype=complex)

    def todense(self) -> np.ndarray:
        return self.tosparse().toarray()

    def scaled_similarity(self, u: np.ndarray) -> BandedOperator:
        """``D(u)^-1 A D(u)``: entry ``(i, j)`` becomes ``A[i, j] * u[j] / u[i]``."""
        u = np.asarray(u)
        if u.shape[0] != self.n:
            raise DimensionError(f"basis of length {u.shape[0]} for operator of size {self.n}")
        data = self.data.copy()
        for o in range(1, self.w + 1):
            data[self.w - o, o:] *= u[:-o] / u[o:]
            data[self.w + o, :-o] *= u[o:] / u[:-o]
        return BandedOperator(data, self.w)

    def scale_rows(self, s: np.ndarray) -> BandedOperator:
        """``D(s) A``."""
        return BandedOperator(self.data * np.asarray(s)[None, :], self.w)

    def with_row(self, i: int, entries: dict[int, complex]) -> BandedOperator:
        """Copy with row ``i`` replaced by ``{column: value}`` (other entries zeroed)."""
        data = self.data.copy()
        data[:, i] = 0
        for j, v in entries.items():
            o = j - i
            if abs(o) > self.w or not 0 <= j < self.n:
                raise DimensionError(f"column {j} outside the band of row {i}")
            data[self.w + o, i] = v
        return BandedOperator(data, self.w)


def assemble_helmholtz(grid: Grid1D, kf: WaveNumberField, warn: bool = True) -> BandedOperator:
    """Second-order discretization of ``u'' + k(x)^2 u`` with Sommerfeld rows.

    Interior rows are ``(1/h^2)[1, -2 + k(x_i)^2 h^2, 1]``. The boundary rows
    discretize ``u' + ik u = 0`` at ``a`` and ``u' - ik u = 0`` at ``b`` by
    one-sided first differences. A warning is issued when the grid is too
    coarse for ``k_max h < 2 pi / 10`` unless ``warn`` is false.
    """
    n, h = grid.n, grid.h
    k = kf(grid.nodes)
    kmax = float(np.max(k))
    if warn and kmax * h >= 2 * np.pi / 10:
        warnings.warn(
            f"k_max*h = {kmax * h:.4g} exceeds 2*pi/10; the grid under-resolves the waves",
            stacklevel=2,
        )
    lower = np.full(n, 1.0 / h**2, dtype=complex)
    upper = np.full(n, 1.0 / h**2, dtype=complex)
    diag = (-2.0 + (k * h) ** 2) / h**2 + 0j
    lower[0] = 0.0
    upper[-1] = 0.0
    diag[0] = -1.0 / h + 1j * k[0]
    upper[0] = 1.0 / h
    lower[-1] = -1.0 / h
    diag[-1] = 1.0 / h - 1j * k[-1]
    return BandedOperator.from_bands(lower, diag, upper)


def _fine_size(n_coarse: int) -> int:
    return 2 * (n_coarse - 1) + 1


def prolongate(coarse: np.ndarray, n_fine: int | None = None) -> np.ndarray:
    """Linear interpolation onto the 2:1 refined grid."""
    coarse = np.asarray(coarse)
    nf = _fine_size(coarse.shape[0])
    if n_fine is not None and n_fine != nf:
        raise DimensionError(f"coarse vector of length {coarse.shape[0]} does not refine to {n_fine}")
    fine = np.empty(nf, dtype=np.result_type(coarse, complex))
    fine[::2] = coarse
    fine[1::2] = 0.5 * (coarse[:-1] + coarse[1:])
    return fine


def restrict_full_weighting(fine: np.ndarray, n_coarse: int | None = None) -> np.ndarray:
    """Full weighting ``(f[2i-1] + 2 f[2i] + f[2i+1]) / 4``; boundary values injected."""
    fine = np.asarray(fine)
    nf = fine.shape[0]
    if nf < 3 or (nf - 1) % 2:
        raise DimensionError(f"vector of length {nf} is not on a coarsenable grid")
    nc = (nf - 1) // 2 + 1
    if n_coarse is not None and n_coarse != nc:
        raise DimensionError(f"fine vector of length {nf} does not coarsen to {n_coarse}")
    coarse = np.empty(nc, dtype=np.result_type(fine, complex))
    coarse[0] = fine[0]
    coarse[-1] = fine[-1]
    coarse[1:-1] = 0.25 * (fine[1:-2:2] + 2.0 * fine[2:-1:2] + fine[3::2])
    return coarse


def restrict_transpose(fine: np.ndarray, n_coarse: int | None = None) -> np.ndarray:
    """Transpose of linear interpolation, ``P^t f`` (weights 1/2, 1, 1/2)."""
    fine = np.asarray(fine)
    nf = fine.shape[0]
    if nf < 3 or (nf - 1) % 2:
        raise DimensionError(f"vector of length {nf} is not on a coarsenable grid")
    nc = (nf - 1) // 2 + 1
    if n_coarse is not None and n_coarse != nc:
        raise DimensionError(f"fine vector of length {nf} does not coarsen to {n_coarse}")
    coarse = fine[::2].astype(np.result_type(fine, complex))
    coarse[:-1] += 0.5 * fine[1::2]
    coarse[1:] += 0.5 * fine[1::2]
    return coarse


def interpolation_matrix(n_coarse: int) -> sp.csr_matrix:
    """Sparse linear interpolation from ``n_coarse`` to ``2(n_coarse-1)+1`` nodes."""
    nf = _fine_size(n_coarse)
    rows, cols, vals = [], [], []
    for j in range(n_coarse):
        rows.append(2 * j)
        cols.append(j)
        vals.append(1.0)
        if j > 0:
            rows.append(2 * j - 1)
            cols.append(j)
            vals.append(0.5)
        if j < n_coarse - 1:
            rows.append(2 * j + 1)
            cols.append(j)
            vals.append(0.5)
    return sp.csr_matrix((vals, (rows, cols)), shape=(nf, n_coarse))


def galerkin(A: BandedOperator) -> BandedOperator:
    """Coarse operator ``P^t A P`` with linear interpolation ``P``.

    The half-bandwidth cannot grow under 2:1 coarsening with linear
    interpolation, so the result keeps the bandwidth of ``A``.
    """
    if A.n < 3 or (A.n - 1) % 2:
        raise InvalidGridError(f"operator of size {A.n} cannot be coarsened 2:1")
    P = interpolation_matrix((A.n - 1) // 2 + 1)
    Ac = (P.T @ A.tosparse() @ P).tocoo()
    return BandedOperator.from_sparse(Ac, A.w)


def residual(A: BandedOperator, f: np.ndarray, x: np.ndarray) -> np.ndarray:
    f = np.asarray(f)
    if f.shape[0] != A.n:
        raise DimensionError(f"right-hand side of length {f.shape[0]} for operator of size {A.n}")
    return f - A.matvec(x)


def direct_solve(A: BandedOperator, f: np.ndarray) -> np.ndarray:
    """Banded Gaussian elimination with partial pivoting."""
    f = np.ascontiguousarray(f, dtype=complex)
    if f.shape[0] != A.n:
        raise DimensionError(f"right-hand side of length {f.shape[0]} for operator of size {A.n}")
    return kernels.band_solve(np.ascontiguousarray(A.data), A.w, f)
