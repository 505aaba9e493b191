"""Ray basis functions ``u_-`` (travelling towards ``a``) and ``u_+`` (towards ``b``)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DegenerateBasisError, DimensionError
from .mesh import CosineK, Grid1D, PiecewiseConstantK
from .operators import BandedOperator, assemble_helmholtz, prolongate, restrict_full_weighting
from .rays import extract_coefficients, fit_physical_root, ray_grid, ray_root, upwind_ray_operator
from .relaxation import directional_gs

_TINY = 1e-8


@dataclass(frozen=True)
class BasisPair:
    """Basis functions on the finest grid.

    ``kind`` records the construction (``"exponential"``, ``"adapted"``,
    ``"naive"`` or ``"optics"``); ``presmoothed`` counts the wave-cycle
    applications used to refine them.
    """

    minus: np.ndarray
    plus: np.ndarray
    kind: str
    presmoothed: int = 0

    def __post_init__(self):
        if self.minus.shape != self.plus.shape or self.minus.ndim != 1:
            raise DimensionError("basis functions must be 1D arrays of equal length")
        if min(np.min(np.abs(self.minus)), np.min(np.abs(self.plus))) <= _TINY:
            raise DegenerateBasisError(f"{self.kind} basis vanishes at a grid node")

    def __iter__(self):
        return iter((self.minus, self.plus))


def constant_basis(k: float, grid: Grid1D) -> BasisPair:
    """``exp(-ikx)`` and ``exp(ikx)``."""
    x = grid.nodes
    return BasisPair(np.exp(-1j * k * x), np.exp(1j * k * x), "exponential")


def _envelope(kf: CosineK, grid: Grid1D, p: int, direction: str, sweeps: int) -> np.ndarray:
    """Envelope of a wave entering at the inflow end of the medium, on scale ``H``.

    Solves ``a'' +- 2i k0 a' + k0^2 m(x) a = 0`` in the upwind discretization
    with ``a = 1`` at the inflow end and the Sommerfeld condition at the
    outflow end, by ``sweeps`` directional Gauss-Seidel sweeps from ``a = 1``.
    """
    k0 = kf.carrier()
    x = grid.nodes
    u = np.exp((-1j if direction == "minus" else 1j) * k0 * x)
    A = assemble_helmholtz(grid, kf, warn=False)
    R = A.scaled_similarity(u)
    coef = extract_coefficients(R, grid.h).inject(p)
    rg = ray_grid(grid, p)
    H, n = rg.h, rg.n
    if direction == "minus":
        inflow = (n - 1, {n - 1: 1.0})
        ka = float(kf(grid.a))
        outflow = (0, {0: -1.0 / H + 1j * (ka - k0), 1: 1.0 / H})
    else:
        inflow = (0, {0: 1.0})
        kb = float(kf(grid.b))
        outflow = (n - 1, {n - 2: -1.0 / H, n - 1: 1.0 / H - 1j * (kb - k0)})
    op = upwind_ray_operator(coef, H, direction, inflow, outflow)
    op = fit_physical_root(op, ray_root(R, grid.h, p, direction), direction)
    f = np.zeros(n, dtype=complex)
    f[inflow[0]] = 1.0
    a = np.ones(n, dtype=complex)
    order = "negative" if direction == "minus" else "positive"
    for _ in range(sweeps):
        directional_gs(op, f, a, order)
    a /= np.mean(np.abs(a))
    for _ in range(p):
        a = prolongate(a)
    return a


def continuous_adapted_basis(kf: CosineK, grid: Grid1D, p: int, sweeps: int = 4) -> BasisPair:
    """``u_+- = a_+-(x) exp(+-i k0 x)`` with envelopes adapted to ``k(x)``.

    The envelopes carry the phase ``int (k - k0)`` that a plain exponential
    misses, so ray corrections stay accurate when ``k`` varies on the ray
    scale. They are computed on the ray grid (``p`` coarsenings of
    ``grid``) and interpolated.
    """
    if not isinstance(kf, CosineK):
        raise ConfigurationError("the adapted basis is defined for a smooth k(x)")
    if sweeps < 1:
        raise ConfigurationError("need at least one envelope sweep")
    k0 = kf.carrier()
    x = grid.nodes
    am = _envelope(kf, grid, p, "minus", sweeps)
    ap = _envelope(kf, grid, p, "plus", sweeps)
    return BasisPair(am * np.exp(-1j * k0 * x), ap * np.exp(1j * k0 * x), "adapted")


def discontinuous_naive(kf: PiecewiseConstantK, grid: Grid1D) -> BasisPair:
    """``exp(+-i k1 x)`` left of the interface and ``exp(+-i k2 x)`` right of it."""
    k = kf(grid.nodes)
    x = grid.nodes
    return BasisPair(np.exp(-1j * k * x), np.exp(1j * k * x), "naive")


@dataclass(frozen=True)
class OpticsCoefficients:
    """Reflection and transmission amplitudes at an interface ``xbar``.

    ``minus`` refers to the wave ``exp(-i k2 x)`` entering from ``b``,
    ``plus`` to ``exp(i k1 x)`` entering from ``a``.
    """

    C_r_minus: complex
    C_t_minus: complex
    C_r_plus: complex
    C_t_plus: complex


def optics_coefficients(k1: float, k2: float, xbar: float) -> OpticsCoefficients:
    """Amplitudes making both optics solutions continuous with continuous slope at ``xbar``.

    ``C_r- = (k2-k1)/(k1+k2) exp(-2i k2 xbar)``,
    ``C_t- = 2k2/(k1+k2) exp(i(k1-k2) xbar)``,
    ``C_r+ = (k1-k2)/(k1+k2) exp(2i k1 xbar)`` and
    ``C_t+ = 2k1/(k1+k2) exp(i(k1-k2) xbar)``.
    """
    if not (k1 > 0 and k2 > 0):
        raise ConfigurationError("wave numbers must be positive")
    s = k1 + k2
    shift = np.exp(1j * (k1 - k2) * xbar)
    return OpticsCoefficients(
        complex((k2 - k1) / s * np.exp(-2j * k2 * xbar)),
        complex(2 * k2 / s * shift),
        complex((k1 - k2) / s * np.exp(2j * k1 * xbar)),
        complex(2 * k1 / s * shift),
    )


def optics_solutions(k1: float, k2: float, xbar: float, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Full optics solutions (incident, reflected and transmitted parts) at ``x``."""
    c = optics_coefficients(k1, k2, xbar)
    x = np.asarray(x, dtype=float)
    left = x <= xbar
    um = np.where(left, c.C_t_minus * np.exp(-1j * k1 * x),
                  np.exp(-1j * k2 * x) + c.C_r_minus * np.exp(1j * k2 * x))
    up = np.where(left, np.exp(1j * k1 * x) + c.C_r_plus * np.exp(-1j * k1 * x),
                  c.C_t_plus * np.exp(1j * k2 * x))
    return um, up


def geometric_optics_basis(kf: PiecewiseConstantK, grid: Grid1D) -> BasisPair:
    """Transmitted plane waves across the interface.

    ``u_-`` enters from ``b`` as ``exp(-i k2 x)`` and continues as
    ``C_t- exp(-i k1 x)``; ``u_+`` enters from ``a`` as ``exp(i k1 x)`` and
    continues as ``C_t+ exp(i k2 x)``.
    """
    x = grid.nodes
    left = x <= kf.xbar
    c = optics_coefficients(kf.k1, kf.k2, kf.xbar)
    cm, cp = c.C_t_minus, c.C_t_plus
    um = np.where(left, cm * np.exp(-1j * kf.k1 * x), np.exp(-1j * kf.k2 * x))
    up = np.where(left, np.exp(1j * kf.k1 * x), cp * np.exp(1j * kf.k2 * x))
    return BasisPair(um, up, "optics")


def presmooth_basis(basis: BasisPair, A: BandedOperator, smoother, nu: int = 1,
                    envelope_depth: int | None = None) -> BasisPair:
    """Apply ``nu`` correction steps ``u <- u + smoother(-A u)`` to each function.

    ``smoother`` maps a residual to a correction (a wave cycle in practice),
    so each step moves ``u`` towards the interior kernel of ``A``. The two
    Sommerfeld rows are left out of the residual: a travelling wave cannot
    satisfy the condition at its inflow end, and correcting for it would
    cancel the wave itself.

    With ``envelope_depth = p`` the ratio ``u_new / u`` is averaged to the
    ray scale (``p`` restrictions and interpolations). This keeps the
    smooth, same-direction part of the correction and drops the reflected
    wave the interior kernel also contains, so each function keeps a single
    propagation direction.
    """
    if nu < 0:
        raise ConfigurationError("nu must be >= 0")
    out = []
    for u in basis:
        v = u.astype(complex, copy=True)
        for _ in range(nu):
            r = -A.matvec(v)
            r[0] = r[-1] = 0.0
            v = v + smoother(r)
        if envelope_depth:
            q = v / u
            for _ in range(envelope_depth):
                q = restrict_full_weighting(q)
            for _ in range(envelope_depth):
                q = prolongate(q)
            v = u * q
        out.append(v)
    return BasisPair(out[0], out[1], basis.kind, basis.presmoothed + nu)


def envelope_phase_error(basis: BasisPair, kf, grid: Grid1D) -> float:
    """Largest deviation of the local wave number of ``u_+`` from ``k(x)``, relative to ``k``."""
    ph = np.unwrap(np.angle(basis.plus))
    kloc = np.gradient(ph, grid.h)
    k = kf(grid.nodes)
    return float(np.max(np.abs(kloc - k) / k))
