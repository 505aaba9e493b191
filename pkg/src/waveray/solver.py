"""Solver variants, scale selection and the wave-ray iteration."""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field, fields, replace

import numpy as np

from .basis import (
    BasisPair,
    constant_basis,
    continuous_adapted_basis,
    discontinuous_naive,
    geometric_optics_basis,
    presmooth_basis,
)
from .errors import ConfigurationError
from .hierarchy import (
    WaveHierarchy,
    build_amg_hierarchy,
    build_gmg_hierarchy,
    default_depth,
    in_kaczmarz_window,
    wave_cycle,
    window_depth,
)
from .mesh import ConstantK, CosineK, Grid1D, PiecewiseConstantK, WaveNumberField
from .operators import BandedOperator, assemble_helmholtz
from .rays import RayCorrection, assemble_ray_algebraic, assemble_ray_geometric, in_ray_window

VARIANTS = ("gmgWR", "gmgWR_d", "amgWR", "amgWR_c", "amgWR_d")
OUTCOMES = ("converged", "max_cycles_exceeded", "diverged")


@dataclass
class SolverConfig:
    """Parameters of one solve.

    The medium is constant ``k`` by default, ``k0 sqrt(1 + alpha cos(beta x))``
    when ``alpha`` and ``beta`` are given (``k`` plays ``k0``) and piecewise
    constant with ``k1 = k``, ``k2 = gamma k`` when ``gamma`` is given.
    ``presmooth`` and ``two_scale`` default per variant when left as None.
    ``ray=False`` runs the wave cycle alone. ``gmg_depth_limit`` stops a
    geometric hierarchy at the last level with ``k_max h`` below it instead
    of coarsening to 5 nodes.
    """

    variant: str = "gmgWR"
    k: float = 80.0
    kh: float = 0.3125
    alpha: float | None = None
    beta: float | None = None
    gamma: float | None = None
    xbar: float = 0.5
    a: float = 0.0
    b: float = 1.0
    seed: int = 0
    tol: float = 1e-6
    max_cycles: int = 50
    divergence_factor: float = 1e3
    presmooth: int | None = None
    two_scale: bool | None = None
    ray: bool = True
    ray_operator: str = "extracted"
    gs_sweeps: int = 1
    kaczmarz_sweeps: int = 2
    ray_sweeps: int = 2
    envelope_sweeps: int = 4
    filter_presmooth: bool = True
    gmg_depth_limit: float | None = None

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ConfigurationError(f"unknown variant {self.variant!r}; choose from {', '.join(VARIANTS)}")
        if not 0 < self.tol < 1:
            raise ConfigurationError("tolerance must lie in (0, 1)")
        if self.max_cycles < 1:
            raise ConfigurationError("max_cycles must be >= 1")
        if not self.divergence_factor > 1:
            raise ConfigurationError("divergence_factor must exceed 1")
        if not (self.k > 0 and self.kh > 0):
            raise ConfigurationError("k and kh must be positive")
        if (self.alpha is None) != (self.beta is None):
            raise ConfigurationError("alpha and beta must be given together")
        if self.alpha is not None and self.gamma is not None:
            raise ConfigurationError("give either alpha/beta or gamma, not both")
        if self.gamma is not None and not 0 < self.gamma <= 1:
            raise ConfigurationError("gamma must lie in (0, 1]")
        if self.gmg_depth_limit is not None and not self.gmg_depth_limit > 0:
            raise ConfigurationError("gmg_depth_limit must be positive")
        if self.ray_operator not in ("extracted", "galerkin"):
            raise ConfigurationError(f"unknown ray operator {self.ray_operator!r}")

    @classmethod
    def from_dict(cls, d: dict) -> SolverConfig:
        names = {f.name for f in fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ConfigurationError(f"unknown config keys: {', '.join(sorted(unknown))}")
        return cls(**d)

    def to_dict(self) -> dict:
        return asdict(self)

    def field(self) -> WaveNumberField:
        if self.alpha is not None:
            return CosineK(self.k, self.alpha, self.beta)
        if self.gamma is not None:
            return PiecewiseConstantK(self.k, self.gamma * self.k, self.xbar)
        return ConstantK(self.k)

    @property
    def presmooth_steps(self) -> int:
        if self.presmooth is not None:
            return self.presmooth
        return 1 if self.variant == "amgWR_d" else 0

    @property
    def use_two_scale(self) -> bool:
        if self.two_scale is not None:
            return self.two_scale
        return self.variant == "amgWR_d"


@dataclass(frozen=True)
class Scales:
    """Mesh sizes and level counts chosen for a medium.

    ``p`` coarsenings lead from ``h`` to the ray scale ``H``. ``L`` is the
    depth of a geometric hierarchy (down to 5 nodes) and ``L_window`` the
    depth of an algebraic one (down to the last level with
    ``k_max h <= pi/4``). ``schedule`` names the relaxation per level of the
    deeper of the two.
    """

    grid: Grid1D
    H: float
    p: int
    L: int
    L_window: int
    schedule: tuple[str, ...]

    @property
    def h(self) -> float:
        return self.grid.h


def ray_reference_k(kf: WaveNumberField, a: float, b: float) -> float:
    """Wave number that fixes the ray scale: ``k1`` across an interface, else ``k_min``."""
    if isinstance(kf, PiecewiseConstantK):
        return float(kf.k1)
    return kf.k_min(a, b)


def choose_scales(kf: WaveNumberField, kh_target: float, a: float = 0.0, b: float = 1.0) -> Scales:
    """Finest mesh ``(b-a)/2^m <= kh_target/k_max`` and the ray scale ``H = 2^p h``."""
    kmax = kf.k_max(a, b)
    kref = ray_reference_k(kf, a, b)
    m = max(0, math.ceil(math.log2(kmax * (b - a) / kh_target) - 1e-12))
    grid = Grid1D(a, b, 2**m + 1)
    h = grid.h
    if kmax * h >= 2 * math.pi / 10:
        raise ConfigurationError(f"k_max*h = {kmax * h:.4g} does not resolve the waves")
    p = 0
    while kref * h * 2**p <= math.pi / 2:
        p += 1
    H = h * 2**p
    if not in_ray_window(kref * H) or 2**m // 2**p < 2:
        raise ConfigurationError(f"no ray scale H = 2^p h with k*H in (pi/2, pi] fits in [{a}, {b}]")
    L = default_depth(grid)
    Lw = window_depth(grid, kmax)
    hs = [h * 2**i for i in range(max(L, Lw))]
    schedule = tuple("kaczmarz" if in_kaczmarz_window(kmax * s) else "gauss_seidel" for s in hs)
    return Scales(grid, H, p, L, Lw, schedule)


@dataclass
class ConvergenceReport:
    cycles_used: int
    residual_history: list[float]
    outcome: str
    wall_time: float = 0.0
    setup_time: float = 0.0

    def __post_init__(self):
        if self.outcome not in OUTCOMES:
            raise ValueError(f"unknown outcome {self.outcome!r}")
        if len(self.residual_history) != self.cycles_used + 1:
            raise ValueError("history length must be cycles_used + 1")

    @property
    def converged(self) -> bool:
        return self.outcome == "converged"

    @property
    def final_reduction(self) -> float:
        r0 = self.residual_history[0]
        return self.residual_history[-1] / r0 if r0 > 0 else 0.0

    @property
    def label(self) -> str:
        """Table notation: cycle count, ``D`` for divergence, ``>N`` otherwise."""
        if self.outcome == "converged":
            return str(self.cycles_used)
        if self.outcome == "diverged":
            return "D"
        return f">{self.cycles_used}"


def classify(history, tol: float, max_cycles: int, divergence_factor: float) -> str:
    """Outcome implied by a residual history under the stopping rules."""
    r0 = history[0]
    last = history[-1]
    if r0 == 0 or last < tol * r0:
        return "converged"
    if not math.isfinite(last) or last > divergence_factor * r0:
        return "diverged"
    if len(history) - 1 >= max_cycles:
        return "max_cycles_exceeded"
    raise ValueError("history ends before any stopping rule applies")


@dataclass
class WaveRaySolver:
    """A set-up solver: operator, wave hierarchy, basis and ray correction."""

    config: SolverConfig
    kf: WaveNumberField
    scales: Scales
    A: BandedOperator
    hier: WaveHierarchy
    basis: BasisPair | None = None
    rays: RayCorrection | None = None
    setup_time: float = field(default=0.0)

    @property
    def grid(self) -> Grid1D:
        return self.scales.grid

    def wave(self, r: np.ndarray) -> np.ndarray:
        return wave_cycle(self.hier, r)

    def cycle(self, b: np.ndarray, x: np.ndarray) -> np.ndarray:
        return wave_ray_cycle(self.A, b, x, self.hier, self.rays)

    def initial_guess(self) -> np.ndarray:
        rng = np.random.default_rng(self.config.seed)
        n = self.grid.n
        return rng.uniform(-1, 1, n) + 1j * rng.uniform(-1, 1, n)

    def iterate(self, b: np.ndarray | None = None, x0: np.ndarray | None = None):
        cfg = self.config
        n = self.grid.n
        b = np.zeros(n, dtype=complex) if b is None else np.asarray(b, dtype=complex)
        x = self.initial_guess() if x0 is None else np.array(x0, dtype=complex)
        t0 = time.perf_counter()
        hist = [float(np.linalg.norm(b - self.A.matvec(x)))]
        outcome = "converged" if hist[0] == 0 else None
        with np.errstate(over="ignore", invalid="ignore"):
            while outcome is None:
                x = self.cycle(b, x)
                hist.append(float(np.linalg.norm(b - self.A.matvec(x))))
                done = (hist[-1] < cfg.tol * hist[0] or not math.isfinite(hist[-1])
                        or hist[-1] > cfg.divergence_factor * hist[0]
                        or len(hist) - 1 >= cfg.max_cycles)
                if done:
                    outcome = classify(hist, cfg.tol, cfg.max_cycles, cfg.divergence_factor)
        report = ConvergenceReport(len(hist) - 1, hist, outcome,
                                   time.perf_counter() - t0, self.setup_time)
        return x, report


def wave_ray_cycle(A: BandedOperator, b: np.ndarray, x: np.ndarray, hier: WaveHierarchy,
                   rays: RayCorrection | None) -> np.ndarray:
    """``x1 = x + W(b - A x)`` followed by ``x2 = x1 + R(b - A x1)``."""
    x = x + wave_cycle(hier, b - A.matvec(x))
    if rays is None:
        return x
    return x + rays(b - A.matvec(x))


def _basis(cfg: SolverConfig, kf, grid: Grid1D, p: int) -> BasisPair:
    if cfg.variant == "amgWR_c":
        if not isinstance(kf, CosineK):
            raise ConfigurationError("amgWR_c needs a smooth variable k (alpha, beta)")
        return continuous_adapted_basis(kf, grid, p, cfg.envelope_sweeps)
    if cfg.variant == "amgWR_d":
        if not isinstance(kf, PiecewiseConstantK):
            raise ConfigurationError("amgWR_d needs a piecewise-constant k (gamma)")
        return geometric_optics_basis(kf, grid)
    if isinstance(kf, PiecewiseConstantK):
        return discontinuous_naive(kf, grid)
    return constant_basis(kf.carrier(), grid)


def build(cfg: SolverConfig) -> WaveRaySolver:
    """Assemble everything a variant needs; configuration errors surface here."""
    t0 = time.perf_counter()
    kf = cfg.field()
    sc = choose_scales(kf, cfg.kh, cfg.a, cfg.b)
    grid = sc.grid
    A = assemble_helmholtz(grid, kf)
    kmax = kf.k_max(cfg.a, cfg.b)
    geometric = cfg.variant.startswith("gmg")
    if geometric:
        if isinstance(kf, CosineK):
            raise ConfigurationError(f"{cfg.variant} needs constant or piecewise-constant k")
        if cfg.variant == "gmgWR_d" and not isinstance(kf, PiecewiseConstantK):
            raise ConfigurationError("gmgWR_d needs a piecewise-constant k (gamma)")
        L = sc.L if cfg.gmg_depth_limit is None else window_depth(grid, kmax, cfg.gmg_depth_limit)
        hier = build_gmg_hierarchy(grid, kf, L, cfg.gs_sweeps, cfg.kaczmarz_sweeps)
    else:
        hier = build_amg_hierarchy(A, sc.L_window, kmax, grid, cfg.gs_sweeps,
                                   cfg.kaczmarz_sweeps, scale_boundary=True)
    solver = WaveRaySolver(cfg, kf, sc, A, hier)
    if cfg.ray:
        basis = _basis(cfg, kf, grid, sc.p)
        if cfg.presmooth_steps:
            basis = presmooth_basis(basis, A, solver.wave, cfg.presmooth_steps,
                                    sc.p if cfg.filter_presmooth else None)
        two = (grid, kf) if cfg.use_two_scale and isinstance(kf, PiecewiseConstantK) else None
        if geometric:
            systems = tuple(
                assemble_ray_geometric(grid, sc.p, kf, d, fine_h=grid.h,
                                       interface=cfg.variant == "gmgWR_d")
                for d in ("minus", "plus"))
            systems = tuple(replace(s, sweeps=cfg.ray_sweeps) for s in systems)
            rays = RayCorrection(*systems, basis, "geometric", two)
        else:
            systems = assemble_ray_algebraic(A, grid, basis, sc.p, cfg.ray_operator,
                                             averaged=basis.kind == "adapted" or bool(basis.presmoothed))
            systems = tuple(replace(s, sweeps=cfg.ray_sweeps) for s in systems)
            rays = RayCorrection(*systems, basis, "algebraic", two)
        solver.basis, solver.rays = basis, rays
    solver.setup_time = time.perf_counter() - t0
    return solver


def solve(cfg: SolverConfig, b: np.ndarray | None = None, x0: np.ndarray | None = None):
    """Build and iterate; returns ``(x, ConvergenceReport)``.

    By default ``b = 0`` and ``x0`` is uniform random in ``[-1, 1]^2`` per
    component (seeded by ``cfg.seed``), so the residual ratio measures pure
    error reduction.
    """
    return build(cfg).iterate(b, x0)


def solve_best_of(configs: list[SolverConfig], b: np.ndarray | None = None):
    """Run each config and keep the converged one with the fewest cycles.

    Returns ``(x, report, winner)`` where ``winner`` indexes ``configs``.
    Without any converged run the one with the smallest final reduction is
    returned; it is reported as diverged if every run diverged.
    """
    if not configs:
        raise ConfigurationError("need at least one configuration")
    runs = [solve(c, b) for c in configs]
    conv = [i for i, (_, r) in enumerate(runs) if r.converged]
    if conv:
        i = min(conv, key=lambda j: runs[j][1].cycles_used)
    else:
        i = min(range(len(runs)), key=lambda j: runs[j][1].final_reduction
                if math.isfinite(runs[j][1].final_reduction) else math.inf)
        if all(r.outcome == "diverged" for _, r in runs):
            runs[i][1].outcome = "diverged"
    return runs[i][0], runs[i][1], i
