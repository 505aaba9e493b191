"""Wave hierarchy construction and the correction-scheme wave V-cycle."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, DimensionError
from .mesh import Grid1D, WaveNumberField
from .operators import (
    BandedOperator,
    assemble_helmholtz,
    direct_solve,
    galerkin,
    prolongate,
    restrict_full_weighting,
    restrict_transpose,
)
from .relaxation import RelaxScheme


def in_kaczmarz_window(kh: float) -> bool:
    """Intermediate scales ``pi/4 < k_max h <= pi/2`` are relaxed by Kaczmarz."""
    return math.pi / 4 < kh <= math.pi / 2


def default_relaxation(kmax_h: float, gs_sweeps: int = 1, kaczmarz_sweeps: int = 2) -> RelaxScheme:
    if in_kaczmarz_window(kmax_h):
        return RelaxScheme.kaczmarz(kaczmarz_sweeps)
    return RelaxScheme.gauss_seidel(gs_sweeps)


def default_depth(grid: Grid1D, coarsest_nodes: int = 5) -> int:
    """Number of levels obtained by halving ``grid`` down to ``coarsest_nodes`` nodes."""
    n, L = grid.n, 1
    while n > coarsest_nodes and (n - 1) % 2 == 0:
        n = (n - 1) // 2 + 1
        L += 1
    if n != coarsest_nodes:
        raise ConfigurationError(f"grid with {grid.n} nodes does not coarsen to {coarsest_nodes} nodes")
    return L


def window_depth(grid: Grid1D, kmax: float, limit: float = math.pi / 4) -> int:
    """Number of 2:1 levels whose mesh sizes satisfy ``kmax * h <= limit``, at least 2.

    With the default limit the coarsest level is the last one below the
    Kaczmarz window. Galerkin operators coarser than that carry a
    mass-matrix dispersion error that relaxation amplifies and a direct solve
    corrects with the wrong phase.
    """
    if not grid.can_coarsen:
        raise ConfigurationError(f"grid with {grid.n} nodes cannot carry two levels")
    L, g = 1, grid
    while g.can_coarsen and kmax * g.coarsen().h <= limit:
        g = g.coarsen()
        L += 1
    return max(L, 2)


def boundary_row_scale(grid: Grid1D) -> np.ndarray:
    """Row weights ``2/h`` on the two Sommerfeld rows and 1 elsewhere.

    The unscaled boundary rows are O(1/h) against O(1/h^2) interior rows and
    are swamped under repeated Galerkin products.
    """
    s = np.ones(grid.n)
    s[0] = s[-1] = 2.0 / grid.h
    return s


@dataclass(frozen=True)
class Level:
    grid: Grid1D
    A: BandedOperator
    relax: RelaxScheme


@dataclass
class WaveHierarchy:
    """Levels ``0..L-1`` from finest to coarsest, with their transfer rule.

    ``mode`` is ``"geometric"`` (rediscretized operators, full-weighting
    restriction) or ``"algebraic"`` (Galerkin operators, transposed
    interpolation as restriction).
    """

    levels: list[Level]
    mode: str
    coarse_solve: str = "direct"  # or "relax"
    kmax: float = field(default=0.0)
    row_scale: np.ndarray | None = None  # applied to finest residuals

    def __post_init__(self):
        if len(self.levels) < 2:
            raise ConfigurationError("a wave hierarchy needs at least two levels")
        if self.mode not in ("geometric", "algebraic"):
            raise ValueError(f"unknown mode {self.mode!r}")

    @property
    def L(self) -> int:
        return len(self.levels)

    @property
    def finest(self) -> Level:
        return self.levels[0]

    def restrict(self, v: np.ndarray) -> np.ndarray:
        if self.mode == "geometric":
            return restrict_full_weighting(v)
        return restrict_transpose(v)

    @staticmethod
    def interpolate(v: np.ndarray) -> np.ndarray:
        return prolongate(v)

    def kaczmarz_levels(self) -> list[int]:
        return [i for i, lev in enumerate(self.levels) if lev.relax.kind == "kaczmarz"]


def _grids(grid: Grid1D, L: int) -> list[Grid1D]:
    if L < 2:
        raise ConfigurationError(f"need L >= 2 levels, got {L}")
    grids = [grid]
    for _ in range(L - 1):
        g = grids[-1]
        if (g.n - 1) % 2 or (g.n - 1) // 2 + 1 < 3:
            raise ConfigurationError(f"{L} levels are too deep for a grid with {grid.n} nodes")
        grids.append(g.coarsen())
    return grids


def build_gmg_hierarchy(grid: Grid1D, kf: WaveNumberField, L: int | None = None,
                        gs_sweeps: int = 1, kaczmarz_sweeps: int = 2,
                        coarse_solve: str = "direct") -> WaveHierarchy:
    """Rediscretize the Helmholtz operator on every level of a 2:1 hierarchy."""
    L = default_depth(grid) if L is None else L
    kmax = kf.k_max(grid.a, grid.b)
    levels = []
    for i, g in enumerate(_grids(grid, L)):
        A = assemble_helmholtz(g, kf, warn=i == 0)
        levels.append(Level(g, A, default_relaxation(kmax * g.h, gs_sweeps, kaczmarz_sweeps)))
    return WaveHierarchy(levels, "geometric", coarse_solve, kmax)


def build_amg_hierarchy(A1: BandedOperator, L: int | None = None, kmax: float = 0.0,
                        grid: Grid1D | None = None, gs_sweeps: int = 1,
                        kaczmarz_sweeps: int = 2, coarse_solve: str = "direct",
                        scale_boundary: bool = False) -> WaveHierarchy:
    """Galerkin hierarchy ``A_{l+1} = P^t A_l P`` starting from ``A1``.

    ``kmax`` drives the relaxation schedule and the default depth
    (:func:`window_depth`); ``grid`` (default ``[0, 1]``) provides the mesh
    sizes.

    With ``scale_boundary`` the two Sommerfeld rows are weighted by ``2/h``
    before coarsening; the same weights are applied to incoming residuals, so
    the corrections are unchanged in exact arithmetic.
    """
    grid = Grid1D(0.0, 1.0, A1.n) if grid is None else grid
    if grid.n != A1.n:
        raise DimensionError(f"grid with {grid.n} nodes for operator of size {A1.n}")
    if L is None:
        L = window_depth(grid, kmax) if kmax > 0 else default_depth(grid)
    row_scale = boundary_row_scale(grid) if scale_boundary else None
    A = A1.scale_rows(row_scale) if scale_boundary else A1
    levels = []
    for i, g in enumerate(_grids(grid, L)):
        if i > 0:
            A = galerkin(A)
        levels.append(Level(g, A, default_relaxation(kmax * g.h, gs_sweeps, kaczmarz_sweeps)))
    return WaveHierarchy(levels, "algebraic", coarse_solve, kmax, row_scale)


def wave_cycle(hier: WaveHierarchy, r1: np.ndarray, level: int = 0) -> np.ndarray:
    """One V(pre, post) correction-scheme cycle; returns the correction on ``level``."""
    lev = hier.levels[level]
    r = np.ascontiguousarray(r1, dtype=complex)
    if r.shape[0] != lev.A.n:
        raise DimensionError(f"residual of length {r.shape[0]} on level {level} of size {lev.A.n}")
    if level == 0 and hier.row_scale is not None:
        r = r * hier.row_scale
    if level == hier.L - 1:
        if hier.coarse_solve == "direct":
            return direct_solve(lev.A, r)
        e = np.zeros_like(r)
        return lev.relax.apply(lev.A, r, e)
    e = np.zeros_like(r)
    lev.relax.apply(lev.A, r, e)
    rc = hier.restrict(r - lev.A.matvec(e))
    e += hier.interpolate(wave_cycle(hier, rc, level + 1))
    lev.relax.apply(lev.A, r, e)
    return e
