"""Ray systems: envelope operators, residual separation and the ray cycle.

An error component ``e = u_- * a_- + u_+ * a_+`` with smooth envelopes
``a_+-`` is corrected on a coarse ray grid of mesh size ``H = 2**p h``. Each
direction owns a :class:`RaySystem`. The ``minus`` wave travels towards ``a``
(inflow at ``b``), the ``plus`` wave towards ``b`` (inflow at ``a``).

Every interior ray row has the form ``c2 a'' + c1 a' + c0 a`` and is
discretized with one-sided second-order differences on the upwind side of
the node, so that directional Gauss-Seidel is an exact marching scheme in the
interior. The closure rows are ``a' = 0`` at the outflow end and a
discretized Sommerfeld condition at the inflow end.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AlignmentError, ConfigurationError, DegenerateBasisError, DimensionError
from .mesh import ConstantK, Grid1D, PiecewiseConstantK, WaveNumberField
from .operators import (
    BandedOperator,
    direct_solve,
    galerkin,
    prolongate,
    restrict_full_weighting,
    restrict_transpose,
)
from .relaxation import directional_gs

DIRECTIONS = ("minus", "plus")


def _sign(direction: str) -> int:
    if direction == "minus":
        return -1
    if direction == "plus":
        return 1
    raise ValueError(f"unknown direction {direction!r}")


def in_ray_window(kH: float) -> bool:
    return math.pi / 2 < kH <= math.pi


def ray_grid(grid: Grid1D, p: int) -> Grid1D:
    """The grid obtained from ``grid`` by ``p`` 2:1 coarsenings."""
    g = grid
    for _ in range(p):
        g = g.coarsen()
    return g


@dataclass(frozen=True)
class RayCoefficients:
    """Pointwise coefficients of ``c2 a'' + c1 a' + c0 a`` on a grid."""

    c2: np.ndarray
    c1: np.ndarray
    c0: np.ndarray

    def __post_init__(self):
        n = self.c0.shape[0]
        if self.c2.shape != (n,) or self.c1.shape != (n,):
            raise DimensionError("coefficient arrays must have equal length")

    def inject(self, p: int) -> RayCoefficients:
        """Sample at every ``2**p``-th node."""
        s = 2**p
        return RayCoefficients(self.c2[::s].copy(), self.c1[::s].copy(), self.c0[::s].copy())

    def average(self, p: int) -> RayCoefficients:
        """Full weighting applied ``p`` times.

        Preferred over injection when the basis is itself interpolated from
        the ray grid: its kinks sit on ray nodes and pollute the rows there.
        """
        return RayCoefficients(*(_restrict_chain(c, p, "geometric") for c in (self.c2, self.c1, self.c0)))


def extract_coefficients(R: BandedOperator, h: float) -> RayCoefficients:
    """Split each row ``[L, D, U]`` of a fine ray operator into differential form.

    ``L a[i-1] + D a[i] + U a[i+1] = c2 a'' + c1 a' + c0 a + O(h^2)`` with
    ``c2 = (L + U) h^2 / 2``, ``c1 = (U - L) h`` and ``c0 = L + D + U``. For
    the exponential basis ``exp(+-ikx)`` this gives ``c2 = cos(kh)``,
    ``c1 = +-2i sin(kh)/h`` and ``c0 = k^2 - 4 sin(kh/2)^2 / h^2``.
    """
    if R.w != 1:
        raise DimensionError("coefficient extraction needs a tridiagonal operator")
    L, D, U = R.lower, R.diag, R.upper
    return RayCoefficients((L + U) * (h * h / 2), (U - L) * h, L + D + U)


def dispersion_coefficients(k, direction: str, h: float | None = None) -> RayCoefficients:
    """Coefficients of the ray operator for a carrier ``exp(+-ikx)`` with local ``k``.

    With ``h`` given they match the extraction from the fine Helmholtz
    stencil exactly (so the fine-grid phase error is reproduced on the ray
    grid); with ``h=None`` the continuum ``a'' +- 2ik a'`` is returned.
    """
    k = np.atleast_1d(np.asarray(k, dtype=float))
    s = _sign(direction)
    if h is None:
        return RayCoefficients(np.ones(k.shape, complex), s * 2j * k + 0j, np.zeros(k.shape, complex))
    c2 = np.cos(k * h) + 0j
    c1 = s * 2j * np.sin(k * h) / h
    c0 = k**2 - 4.0 * np.sin(k * h / 2) ** 2 / h**2 + 0j
    return RayCoefficients(c2, c1, c0)


def upwind_row(c2: complex, c1: complex, c0: complex, H: float, direction: str,
               short: bool = False) -> dict[int, complex]:
    """Stencil ``{offset: value}`` of one interior ray row.

    The derivatives use the node and its two upwind neighbours (offsets
    ``0, +1, +2`` for ``minus`` and ``0, -1, -2`` for ``plus``). ``short``
    selects the two-point first-order variant without ``a''`` for the row
    next to the inflow boundary.
    """
    d = 1 if direction == "minus" else -1
    if short:
        return {0: c0 - c1 * d / H, d: c1 * d / H}
    return {
        0: c2 / H**2 + c0 - 1.5 * c1 * d / H,
        d: -2.0 * c2 / H**2 + 2.0 * c1 * d / H,
        2 * d: c2 / H**2 - 0.5 * c1 * d / H,
    }


def outflow_row(H: float, direction: str, n: int) -> tuple[int, dict[int, complex]]:
    """``a' = 0`` at the outflow end: row index and ``{column: value}``."""
    if direction == "minus":
        return 0, {0: -1.0 / H, 1: 1.0 / H}
    return n - 1, {n - 2: -1.0 / H, n - 1: 1.0 / H}


def inflow_row_continuum(kb: float, kc: float, H: float, direction: str, n: int):
    """Sommerfeld closure for ``u = a exp(+-i kc x)`` at the inflow end with ``k = kb`` there."""
    if direction == "minus":
        return n - 1, {n - 2: -1.0 / H, n - 1: 1.0 / H - 1j * (kb + kc)}
    return 0, {0: -1.0 / H + 1j * (kb + kc), 1: 1.0 / H}


def inflow_row_algebraic(A: BandedOperator, u: np.ndarray, h: float, H: float,
                         direction: str, n: int):
    """Closure obtained by applying the fine Sommerfeld row to ``u * a``.

    The boundary row of ``A`` (divided by the basis value there) is written
    as ``c a + d (a_next - a_b)/h`` and the difference is taken on scale H.
    """
    if direction == "plus":
        t = A.upper[0] * u[1] / u[0]
        c, d = A.diag[0] + t, t * h
        return 0, {0: c - d / H, 1: d / H}
    t = A.lower[-1] * u[-2] / u[-1]
    c, d = A.diag[-1] + t, -t * h
    return n - 1, {n - 2: -d / H, n - 1: c + d / H}


def upwind_ray_operator(coef: RayCoefficients, H: float, direction: str,
                        inflow: tuple[int, dict[int, complex]],
                        outflow: tuple[int, dict[int, complex]]) -> BandedOperator:
    """Assemble the upwind ray operator (half-bandwidth 2) with its closures."""
    n = coef.c0.shape[0]
    if n < 3:
        raise DimensionError("a ray grid needs at least 3 nodes")
    _sign(direction)
    data = np.zeros((5, n), dtype=complex)
    d = 1 if direction == "minus" else -1
    for i in range(1, n - 1):
        short = not 0 <= i + 2 * d < n
        for o, v in upwind_row(coef.c2[i], coef.c1[i], coef.c0[i], H, direction, short).items():
            data[2 + o, i] += v
    for i, entries in (inflow, outflow):
        data[:, i] = 0
        for j, v in entries.items():
            data[2 + j - i, i] = v
    return BandedOperator(data, 2)


def physical_root(R: BandedOperator) -> np.ndarray:
    """Per-row root ``w = exp(mu h)`` of the fine ray stencil closest to 1.

    Row ``i`` of ``R`` annihilates ``exp(mu x)`` locally when
    ``U w^2 + D w + L = 0``. The root near 1 is the slowly varying envelope
    the ray grid must represent; the other root is the opposite wave.
    """
    L, D, U = R.lower, R.diag, R.upper
    out = np.ones(R.n, dtype=complex)
    ok = U != 0
    ok[0] = ok[-1] = False
    disc = np.sqrt(D[ok] ** 2 - 4 * U[ok] * L[ok] + 0j)
    w1 = (-D[ok] + disc) / (2 * U[ok])
    w2 = (-D[ok] - disc) / (2 * U[ok])
    out[ok] = np.where(np.abs(w1 - 1) <= np.abs(w2 - 1), w1, w2)
    # boundary rows are closures, not stencils; continue the neighbouring roots
    if R.n > 2:
        out[0], out[-1] = out[1], out[-2]
    return out


def ray_root(R: BandedOperator, h: float, p: int, direction: str, averaged: bool = False) -> np.ndarray:
    """Target roots ``exp(mu d H)`` of the ray rows from the fine stencil ``R``."""
    mu = np.log(physical_root(R)) / h
    mu = _restrict_chain(mu, p, "geometric") if averaged else mu[::2**p]
    d = 1 if direction == "minus" else -1
    return np.exp(mu * d * h * 2**p)


def fit_physical_root(op: BandedOperator, t: np.ndarray, direction: str) -> BandedOperator:
    """Move the near-1 root of every interior upwind row to the prescribed ``t[i]``.

    An interior row ``q0 a[i] + q1 a[i+d] + q2 a[i+2d]`` annihilates
    ``exp(mu x)`` when ``q(exp(mu d H)) = 0``. The second-order differences
    place that root with a phase error of order ``(mu H)^3``, which
    accumulates over many ray nodes when the envelope oscillates. The row
    keeps its leading coefficient and its other root; two-point rows keep
    their upwind coefficient.
    """
    d = 1 if direction == "minus" else -1
    data = np.array(op.data)
    n = op.n
    w = op.w
    for i in range(1, n - 1):
        if 0 <= i + 2 * d < n:
            q0, q1, q2 = data[w, i], data[w + d, i], data[w + 2 * d, i]
            disc = np.sqrt(q1 * q1 - 4 * q2 * q0 + 0j)
            r1, r2 = (-q1 + disc) / (2 * q2), (-q1 - disc) / (2 * q2)
            other = r2 if abs(r1 - t[i]) <= abs(r2 - t[i]) else r1
            data[w, i] = q2 * t[i] * other
            data[w + d, i] = -q2 * (t[i] + other)
        else:
            data[w, i] = -data[w + d, i] * t[i]
    return BandedOperator(data, w)


@dataclass(frozen=True)
class RaySystem:
    """One envelope system ``op a = r`` on the ray grid.

    ``depth`` is the number of 2:1 steps between the finest and the ray grid.
    ``solver`` is ``"gs"`` (directional Gauss-Seidel from a zero envelope,
    ``sweeps`` times) or ``"direct"``.
    """

    direction: str
    grid: Grid1D
    op: BandedOperator
    mode: str
    depth: int
    solver: str = "gs"
    sweeps: int = 2

    def __post_init__(self):
        _sign(self.direction)
        if self.op.n != self.grid.n:
            raise DimensionError(f"ray operator of size {self.op.n} on a grid of {self.grid.n} nodes")
        if self.solver not in ("gs", "direct"):
            raise ValueError(f"unknown ray solver {self.solver!r}")

    @property
    def H(self) -> float:
        return self.grid.h

    def solve(self, rhat: np.ndarray) -> np.ndarray:
        rhat = np.ascontiguousarray(rhat, dtype=complex)
        if self.solver == "direct":
            return direct_solve(self.op, rhat)
        a = np.zeros_like(rhat)
        order = "negative" if self.direction == "minus" else "positive"
        for _ in range(self.sweeps):
            directional_gs(self.op, rhat, a, order)
        return a


def check_ray_scale(k: float, H: float, strict: bool = True) -> None:
    if strict and not in_ray_window(k * H):
        raise ConfigurationError(f"k*H = {k * H:.4g} outside (pi/2, pi]")


def assemble_ray_geometric(grid: Grid1D, p: int, kf: WaveNumberField, direction: str,
                           fine_h: float | None = None, interface: bool = False,
                           strict: bool = True) -> RaySystem:
    """Rediscretized ray system for constant or piecewise-constant ``k``.

    The carrier is the local wave number (the exponential basis for constant
    ``k``, the naive discontinuous basis otherwise). ``fine_h`` switches to
    the dispersion-consistent coefficients of the finest stencil with mesh
    size ``fine_h``. With ``interface`` the row at the interface node of a
    :class:`PiecewiseConstantK` field receives the interface correction.
    """
    if not isinstance(kf, (ConstantK, PiecewiseConstantK)):
        raise ConfigurationError("geometric ray operators need constant or piecewise-constant k")
    rg = ray_grid(grid, p)
    H = rg.h
    check_ray_scale(kf.k_max(grid.a, grid.b), H, strict)
    k = kf(rg.nodes)
    coef = dispersion_coefficients(k, direction, fine_h)
    mode = "geometric"
    if interface:
        if not isinstance(kf, PiecewiseConstantK):
            raise ConfigurationError("the interface correction needs a piecewise-constant k")
        J = rg.index_of(kf.xbar) if _aligned(rg, kf.xbar) else None
        if J is None:
            raise AlignmentError(f"interface x = {kf.xbar} is not a node of the ray grid")
        if fine_h is None:
            raise ConfigurationError("the interface correction needs the finest mesh size")
        row = interface_corrected_coefficients(kf.k1, kf.k2, kf.xbar, fine_h, direction)
        coef.c2[J], coef.c1[J], coef.c0[J] = row
        mode = "geometric-interface-corrected"
    n = rg.n
    kb = float(k[-1] if direction == "minus" else k[0])
    op = upwind_ray_operator(coef, H, direction,
                             inflow_row_continuum(kb, kb, H, direction, n),
                             outflow_row(H, direction, n))
    return RaySystem(direction, rg, op, mode, p)


def _aligned(grid: Grid1D, x: float) -> bool:
    try:
        grid.index_of(x)
        return True
    except Exception:
        return False


def interface_corrected_coefficients(k1: float, k2: float, xbar: float, h: float,
                                     direction: str) -> tuple[complex, complex, complex]:
    """Coefficients ``(c2, c1, c0)`` of the ray row at the interface node.

    The fine Helmholtz row at ``xbar`` sees ``exp(+-i k2 x)`` on its right
    neighbour; relative to the uncorrected row with carrier ``k1`` this adds
    ``V/h^2 * (a + h a' + h^2/2 a'')`` with
    ``V = exp(+-i(k2-k1) xbar) exp(+-i k2 h) - exp(+-i k1 h)``.
    """
    s = _sign(direction)
    base = dispersion_coefficients(k1, direction, h)
    V = np.exp(s * 1j * (k2 - k1) * xbar) * np.exp(s * 1j * k2 * h) - np.exp(s * 1j * k1 * h)
    return (complex(base.c2[0] + V / 2), complex(base.c1[0] + V / h), complex(base.c0[0] + V / h**2))


def interface_corrected_ray_row(k1: float, k2: float, xbar: float, h: float, H: float,
                                direction: str, corrected: bool = True) -> dict[int, complex]:
    """Stencil ``{offset: value}`` of the ray row at ``xbar``.

    With ``corrected=False`` the plain row with carrier ``k1`` is returned,
    so both can be compared entry by entry.
    """
    if not 0 < h < H:
        raise ConfigurationError("need 0 < h < H")
    if corrected:
        c2, c1, c0 = interface_corrected_coefficients(k1, k2, xbar, h, direction)
    else:
        base = dispersion_coefficients(k1, direction, h)
        c2, c1, c0 = base.c2[0], base.c1[0], base.c0[0]
    return upwind_row(c2, c1, c0, H, direction)


def assemble_ray_algebraic(A: BandedOperator, grid: Grid1D, basis, p: int,
                           operator: str = "extracted", fit: bool = True,
                           averaged: bool = False, strict_kmin: float | None = None
                           ) -> tuple[RaySystem, RaySystem]:
    """Ray systems derived from the fine operator ``A`` and a basis pair.

    The fine ray operators are ``D(u)^-1 A D(u)``. With
    ``operator="extracted"`` their rows are split into differential
    coefficients, sampled on the ray grid and discretized upwind (solved by
    directional Gauss-Seidel); with ``fit`` each row reproduces the local
    envelope wave number of the fine stencil exactly (:func:`fit_physical_root`);
    ``averaged`` samples coefficients by full weighting instead of injection.
    With ``operator="galerkin"`` they are
    coarsened ``p`` times by ``P^t R P`` and solved directly; the Galerkin
    stencil is central and not amenable to directional relaxation.
    """
    if A.n != grid.n:
        raise DimensionError(f"operator of size {A.n} on a grid of {grid.n} nodes")
    rg = ray_grid(grid, p)
    H, n = rg.h, rg.n
    if strict_kmin is not None:
        check_ray_scale(strict_kmin, H)
    systems = []
    for direction, u in zip(DIRECTIONS, (basis.minus, basis.plus)):
        if np.min(np.abs(u)) <= 1e-8:
            raise DegenerateBasisError("basis vanishes at a grid node")
        R = A.scaled_similarity(u)
        inflow = inflow_row_algebraic(A, u, grid.h, H, direction, n)
        outflow = outflow_row(H, direction, n)
        if operator == "extracted":
            coef = extract_coefficients(R, grid.h)
            coef = coef.average(p) if averaged else coef.inject(p)
            op = upwind_ray_operator(coef, H, direction, inflow, outflow)
            if fit:
                op = fit_physical_root(op, ray_root(R, grid.h, p, direction, averaged), direction)
            systems.append(RaySystem(direction, rg, op, "algebraic", p, "gs"))
        elif operator == "galerkin":
            for _ in range(p):
                R = galerkin(R)
            R = BandedOperator(R.data / 2**p, 1)
            data = np.zeros((5, n), dtype=complex)
            data[1:4] = R.data
            op = BandedOperator(data, 2)
            for i, entries in (inflow, outflow):
                op = op.with_row(i, entries)
            systems.append(RaySystem(direction, rg, op, "galerkin", p, "direct"))
        else:
            raise ValueError(f"unknown ray operator construction {operator!r}")
    return systems[0], systems[1]


@dataclass(frozen=True)
class SeparatedResiduals:
    minus: np.ndarray
    plus: np.ndarray

    def __post_init__(self):
        if self.minus.shape != self.plus.shape:
            raise DimensionError("separated residuals must live on the same grid")


def _restrict_chain(v: np.ndarray, p: int, mode: str) -> np.ndarray:
    if mode == "geometric":
        for _ in range(p):
            v = restrict_full_weighting(v)
        return v
    if mode == "algebraic":
        for _ in range(p):
            v = restrict_transpose(v)
        return v / 2**p
    raise ValueError(f"unknown separation mode {mode!r}")


def separate_residual(r: np.ndarray, basis, p: int, mode: str = "geometric") -> SeparatedResiduals:
    """Demodulate ``r`` by each basis function and restrict ``p`` times.

    ``mode="geometric"`` uses full weighting; ``"algebraic"`` uses the
    transposed interpolation, normalized by ``2**-p`` so that smooth
    envelopes are preserved. Boundary entries are plain injections; the ray
    cycle overwrites them with the closure right-hand sides.
    """
    r = np.asarray(r)
    if np.min(np.abs(basis.minus)) <= 1e-8 or np.min(np.abs(basis.plus)) <= 1e-8:
        raise DegenerateBasisError("basis vanishes at a grid node")
    return SeparatedResiduals(_restrict_chain(r / basis.minus, p, mode),
                              _restrict_chain(r / basis.plus, p, mode))


def two_scale_steps(k1: float, k2: float) -> int:
    """``floor(log2(k1/k2))``: extra coarsenings for the slow side of an interface."""
    if not k1 >= k2 > 0:
        raise ConfigurationError(f"need k1 >= k2 > 0, got {k1}, {k2}")
    return int(math.floor(math.log2(k1 / k2) + 1e-12))


def smooth_beyond(v: np.ndarray, grid: Grid1D, xbar: float, q: int, margin: float = 0.0) -> np.ndarray:
    """Replace entries with ``x > xbar + margin * H2`` by their ``q``-fold restrict/interpolate average.

    ``H2 = 2**q`` times the mesh size of ``grid``. A margin keeps the cell
    next to the interface at the fine ray scale, where the envelopes of
    waves leaving the interface jump.
    """
    if q == 0:
        return v
    g = grid
    for _ in range(q):
        if not g.can_coarsen:
            raise ConfigurationError("ray grid too coarse for two-scale separation")
        g = g.coarsen()
    if not _aligned(g, xbar):
        raise AlignmentError(f"interface x = {xbar} is not a node of the scale-H2 grid")
    w = v
    for _ in range(q):
        w = restrict_full_weighting(w)
    # the end value is an unseparated injection; extend the last interior average instead
    w[-1] = w[-2]
    for _ in range(q):
        w = prolongate(w)
    out = v.copy()
    right = grid.nodes > xbar + margin * g.h + 1e-12 * (grid.b - grid.a)
    out[right] = w[right]
    return out


def separate_residual_two_scale(r: np.ndarray, basis, p: int, grid: Grid1D,
                                kf: PiecewiseConstantK, mode: str = "geometric") -> SeparatedResiduals:
    """Separation on ``H = H1`` with extra averaging to ``H2 = 2**q H1`` beyond the interface."""
    sep = separate_residual(r, basis, p, mode)
    q = two_scale_steps(kf.k1, kf.k2)
    if q == 0:
        return sep
    rg = ray_grid(grid, p)
    return SeparatedResiduals(smooth_beyond(sep.minus, rg, kf.xbar, q, margin=1.0),
                              smooth_beyond(sep.plus, rg, kf.xbar, q, margin=1.0))


@dataclass
class RayCorrection:
    """The ray cycle for a fixed pair of ray systems and basis.

    ``two_scale`` holds ``(grid, kf)`` when the separation continues to a
    coarser scale beyond a media interface.
    """

    minus: RaySystem
    plus: RaySystem
    basis: object
    separation: str = "geometric"
    two_scale: tuple | None = None

    def __post_init__(self):
        if self.minus.depth != self.plus.depth or self.minus.grid != self.plus.grid:
            raise ConfigurationError("ray systems must share a ray grid")

    @property
    def depth(self) -> int:
        return self.minus.depth

    def separate(self, r: np.ndarray) -> SeparatedResiduals:
        if self.two_scale is None:
            return separate_residual(r, self.basis, self.depth, self.separation)
        grid, kf = self.two_scale
        return separate_residual_two_scale(r, self.basis, self.depth, grid, kf, self.separation)

    def __call__(self, r: np.ndarray) -> np.ndarray:
        r = np.asarray(r, dtype=complex)
        um, up = self.basis.minus, self.basis.plus
        sep = self.separate(r)
        rm, rp = sep.minus.copy(), sep.plus.copy()
        # outflow ends: a' = 0; inflow ends: the Sommerfeld residual of the incoming wave
        rm[0] = 0.0
        rp[-1] = 0.0
        rm[-1] = r[-1] / um[-1]
        rp[0] = r[0] / up[0]
        am = self.minus.solve(rm)
        ap = self.plus.solve(rp)
        for _ in range(self.depth):
            am = prolongate(am)
            ap = prolongate(ap)
        return um * am + up * ap


def ray_cycle(r1: np.ndarray, systems: tuple[RaySystem, RaySystem], basis,
              separation: str = "geometric") -> np.ndarray:
    """Finest-grid correction from one ray cycle on residual ``r1``."""
    return RayCorrection(systems[0], systems[1], basis, separation)(r1)
