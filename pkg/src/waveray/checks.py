"""Randomized invariant checks behind ``waveray check``.

Each check draws seeded random instances on grids of at most 129 nodes and
reports the worst deviation against its tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .basis import (
    constant_basis,
    continuous_adapted_basis,
    discontinuous_naive,
    geometric_optics_basis,
    optics_coefficients,
)
from .hierarchy import build_amg_hierarchy, build_gmg_hierarchy, wave_cycle
from .mesh import ConstantK, CosineK, Grid1D, PiecewiseConstantK
from .operators import (
    assemble_helmholtz,
    direct_solve,
    interpolation_matrix,
    prolongate,
    restrict_full_weighting,
)
from .rays import assemble_ray_geometric, interface_corrected_ray_row, ray_cycle
from .relaxation import directional_gs, gauss_seidel_sweep, kaczmarz_sweep


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    worst: float
    tol: float
    instances: int

    @property
    def detail(self) -> str:
        return f"worst {self.worst:.2e} (tol {self.tol:.0e}) over {self.instances} instances"


def random_field(rng: np.random.Generator, kmax: float):
    kind = rng.integers(3)
    if kind == 0:
        return ConstantK(kmax)
    if kind == 1:
        alpha = rng.uniform(0.05, 0.8)
        return CosineK(kmax / math.sqrt(1 + alpha), alpha, rng.uniform(0.5, 20.0))
    return PiecewiseConstantK(kmax, rng.uniform(0.2, 1.0) * kmax, 0.5)


def random_problem(rng: np.random.Generator, max_levels: int = 7):
    """Grid with ``2^m + 1 <= 129`` nodes and a field with ``k_max h`` in ``[0.05, 0.6]``."""
    m = int(rng.integers(3, max_levels + 1))
    grid = Grid1D.dyadic(m)
    kf = random_field(rng, rng.uniform(0.05, 0.6) / grid.h)
    return grid, kf, assemble_helmholtz(grid, kf, warn=False)


def _cvec(rng, n):
    return rng.standard_normal(n) + 1j * rng.standard_normal(n)


def _rel(a, b):
    return float(np.max(np.abs(a - b)) / max(1.0, np.max(np.abs(b))))


def check_fixed_point(rng):
    grid, kf, A = random_problem(rng)
    v = _cvec(rng, grid.n)
    f = A.matvec(v)
    worst = 0.0
    for sweep in (lambda x: gauss_seidel_sweep(A, f, x, "forward"),
                  lambda x: gauss_seidel_sweep(A, f, x, "backward"),
                  lambda x: kaczmarz_sweep(A, f, x),
                  lambda x: directional_gs(A, f, x, "negative")):
        x = v.copy()
        sweep(x)
        worst = max(worst, _rel(x, v))
    return worst


def check_kaczmarz_monotone(rng):
    """Largest relative increase of the error norm over 10 sweeps on a consistent system."""
    grid, kf, A = random_problem(rng, 6)
    v = _cvec(rng, grid.n)
    f = A.matvec(v)
    x = np.zeros(grid.n, dtype=complex)
    prev = np.linalg.norm(x - v)
    worst = 0.0
    for _ in range(10):
        kaczmarz_sweep(A, f, x)
        e = np.linalg.norm(x - v)
        worst = max(worst, (e - prev) / prev)
        prev = e
    return max(worst, 0.0)


def check_directional_equals_forward(rng):
    grid, kf, A = random_problem(rng)
    f = _cvec(rng, grid.n)
    x1 = _cvec(rng, grid.n)
    x2 = x1.copy()
    gauss_seidel_sweep(A, f, x1, "forward")
    directional_gs(A, f, x2, "positive")
    return float(np.max(np.abs(x1 - x2)))


def check_direct_roundtrip(rng):
    grid, kf, A = random_problem(rng)
    v = _cvec(rng, grid.n)
    x = direct_solve(A, A.matvec(v))
    return float(np.linalg.norm(x - v) / np.linalg.norm(v))


def check_complex_symmetry(rng):
    grid, kf, A = random_problem(rng)
    lo, up = A.lower[2:-1], A.upper[1:-2]
    return float(np.max(np.abs(lo - up)))


def check_transfer_identities(rng):
    """FW = P^t / 2 on interior coarse nodes; P reproduces linears; R keeps constants."""
    m = int(rng.integers(2, 7))
    nc = 2**m + 1
    P = interpolation_matrix(nc).toarray()
    nf = P.shape[0]
    R = np.array([restrict_full_weighting(e) for e in np.eye(nf)]).T
    worst = float(np.max(np.abs(R[1:-1] - 0.5 * P.T[1:-1])))
    xc = np.linspace(0, 1, nc)
    s, c = rng.standard_normal(2)
    worst = max(worst, float(np.max(np.abs(prolongate(s * xc + c) - (s * np.linspace(0, 1, nf) + c)))))
    const = complex(*rng.standard_normal(2))
    worst = max(worst, float(np.max(np.abs(restrict_full_weighting(np.full(nf, const)) - const))))
    return worst


def check_conjugation_identity(rng):
    """``A (u . a) = u . (R a)`` for every basis construction."""
    m = int(rng.integers(5, 8))
    grid = Grid1D.dyadic(m)
    k = rng.uniform(0.15, 0.6) / grid.h
    p = 1
    while k * grid.h * 2**p <= math.pi / 2:
        p += 1
    gamma = rng.uniform(0.3, 1.0)
    pw = PiecewiseConstantK(k, gamma * k, 0.5)
    cos = CosineK(k / math.sqrt(1.5), 0.5, rng.uniform(1.0, 10.0))
    cases = [(ConstantK(k), constant_basis(k, grid)),
             (pw, discontinuous_naive(pw, grid)),
             (pw, geometric_optics_basis(pw, grid)),
             (cos, continuous_adapted_basis(cos, grid, min(p, m - 1)))]
    worst = 0.0
    for kf, basis in cases:
        A = assemble_helmholtz(grid, kf, warn=False)
        a = _cvec(rng, grid.n)
        for u in basis:
            lhs = A.matvec(u * a)
            rhs = u * A.scaled_similarity(u).matvec(a)
            worst = max(worst, float(np.max(np.abs(lhs - rhs)) / np.max(np.abs(lhs))))
    return worst


def check_wave_cycle_linear(rng):
    grid, kf, A = random_problem(rng)
    L = int(rng.integers(2, int(math.log2(grid.n - 1))))
    kmax = kf.k_max(0, 1)
    hier = (build_gmg_hierarchy(grid, kf, L) if rng.integers(2)
            else build_amg_hierarchy(A, L, kmax, grid, scale_boundary=True))
    r1, r2 = _cvec(rng, grid.n), _cvec(rng, grid.n)
    al, be = complex(*rng.standard_normal(2)), complex(*rng.standard_normal(2))
    lhs = wave_cycle(hier, al * r1 + be * r2)
    rhs = al * wave_cycle(hier, r1) + be * wave_cycle(hier, r2)
    return float(np.linalg.norm(lhs - rhs) / max(np.linalg.norm(rhs), 1e-300))


def check_ray_cycle_linear(rng):
    m = int(rng.integers(5, 8))
    grid = Grid1D.dyadic(m)
    k = rng.uniform(0.15, 0.6) / grid.h
    p = 1
    while k * grid.h * 2**p <= math.pi / 2:
        p += 1
    kf = ConstantK(k)
    systems = tuple(assemble_ray_geometric(grid, p, kf, d, fine_h=grid.h) for d in ("minus", "plus"))
    basis = constant_basis(k, grid)
    r1, r2 = _cvec(rng, grid.n), _cvec(rng, grid.n)
    al = complex(*rng.standard_normal(2))
    lhs = ray_cycle(al * r1 + r2, systems, basis)
    rhs = al * ray_cycle(r1, systems, basis) + ray_cycle(r2, systems, basis)
    return float(np.linalg.norm(lhs - rhs) / max(np.linalg.norm(rhs), 1e-300))


def check_interface_vanishing(rng):
    k = rng.uniform(10, 400)
    h = 1.0 / 2 ** int(rng.integers(6, 12))
    H = h * 2 ** int(rng.integers(1, 4))
    xbar = rng.uniform(0.1, 0.9)
    worst = 0.0
    for d in ("minus", "plus"):
        a = interface_corrected_ray_row(k, k, xbar, h, H, d)
        b = interface_corrected_ray_row(k, k, xbar, h, H, d, corrected=False)
        worst = max(worst, max(abs(a[o] - b[o]) / max(1.0, abs(b[o])) for o in b))
    return worst


def check_optics_continuity(rng):
    """Value and slope jumps of both optics solutions at the interface (slope scaled by ``1/k1``)."""
    k1 = rng.uniform(5, 400)
    k2 = rng.uniform(0.1, 1.0) * k1
    xb = rng.uniform(0.1, 0.9)
    c = optics_coefficients(k1, k2, xb)
    e1, e2 = np.exp(1j * k1 * xb), np.exp(1j * k2 * xb)
    jumps = [
        c.C_t_minus / e1 - (1 / e2 + c.C_r_minus * e2),
        (-1j * k1 * c.C_t_minus / e1 - (-1j * k2 / e2 + 1j * k2 * c.C_r_minus * e2)) / k1,
        e1 + c.C_r_plus / e1 - c.C_t_plus * e2,
        (1j * k1 * e1 - 1j * k1 * c.C_r_plus / e1 - 1j * k2 * c.C_t_plus * e2) / k1,
    ]
    return float(max(abs(j) for j in jumps))


CHECKS: dict[str, tuple[Callable, float]] = {
    "relaxation fixed point": (check_fixed_point, 1e-12),
    "kaczmarz error non-increasing": (check_kaczmarz_monotone, 1e-12),
    "directional positive equals forward": (check_directional_equals_forward, 0.0),
    "direct solve round trip": (check_direct_roundtrip, 1e-9),
    "interior rows complex symmetric": (check_complex_symmetry, 0.0),
    "transfer identities": (check_transfer_identities, 1e-13),
    "conjugation identity": (check_conjugation_identity, 1e-12),
    "wave cycle linear": (check_wave_cycle_linear, 1e-10),
    "ray cycle linear": (check_ray_cycle_linear, 1e-10),
    "interface correction vanishes": (check_interface_vanishing, 1e-12),
    "optics solutions continuous": (check_optics_continuity, 1e-12),
}


def run_checks(instances: int = 100, seed: int = 0) -> list[CheckResult]:
    results = []
    for i, (name, (fn, tol)) in enumerate(CHECKS.items()):
        rng = np.random.default_rng([seed, i])
        worst = max(fn(rng) for _ in range(instances))
        results.append(CheckResult(name, bool(worst <= tol), worst, tol, instances))
    return results
