import math

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from waveray import (
    ConstantK,
    CosineK,
    Grid1D,
    PiecewiseConstantK,
    assemble_helmholtz,
    build_gmg_hierarchy,
    constant_basis,
    direct_solve,
    discontinuous_naive,
    geometric_optics_basis,
    interface_corrected_ray_row,
    prolongate,
    restrict_full_weighting,
    wave_cycle,
)
from waveray.operators import galerkin, interpolation_matrix
from waveray.relaxation import gauss_seidel_sweep, kaczmarz_sweep

PROPS = settings(max_examples=100, deadline=None)

levels = st.integers(3, 7)  # at most 129 nodes
kh = st.floats(0.05, 0.6)
seeds = st.integers(0, 2**32 - 1)


@st.composite
def problems(draw):
    grid = Grid1D.dyadic(draw(levels))
    kmax = draw(kh) / grid.h
    kind = draw(st.sampled_from(["constant", "cosine", "piecewise"]))
    if kind == "constant":
        kf = ConstantK(kmax)
    elif kind == "cosine":
        alpha = draw(st.floats(0.05, 0.8))
        kf = CosineK(kmax / math.sqrt(1 + alpha), alpha, draw(st.floats(0.5, 20.0)))
    else:
        kf = PiecewiseConstantK(kmax, draw(st.floats(0.2, 1.0)) * kmax, 0.5)
    rng = np.random.default_rng(draw(seeds))
    return grid, kf, assemble_helmholtz(grid, kf, warn=False), rng


def cvec(rng, n):
    return rng.standard_normal(n) + 1j * rng.standard_normal(n)


@PROPS
@given(problems())
def test_relaxation_fixed_point(prob):
    grid, _, A, rng = prob
    v = cvec(rng, grid.n)
    f = A.matvec(v)
    for sweep in (lambda x: gauss_seidel_sweep(A, f, x), lambda x: kaczmarz_sweep(A, f, x)):
        x = v.copy()
        sweep(x)
        assert np.max(np.abs(x - v)) <= 1e-10 * np.max(np.abs(v))


@PROPS
@given(problems())
def test_kaczmarz_error_nonincreasing(prob):
    grid, _, A, rng = prob
    v = cvec(rng, grid.n)
    f = A.matvec(v)
    x = np.zeros(grid.n, complex)
    before = np.linalg.norm(x - v)
    kaczmarz_sweep(A, f, x)
    assert np.linalg.norm(x - v) <= before * (1 + 1e-12)


@PROPS
@given(problems())
def test_direct_solve_round_trip(prob):
    grid, _, A, rng = prob
    v = cvec(rng, grid.n)
    x = direct_solve(A, A.matvec(v))
    assert np.linalg.norm(x - v) <= 1e-8 * np.linalg.norm(v)


@PROPS
@given(problems())
def test_galerkin_is_triple_product(prob):
    grid, _, A, _ = prob
    P = interpolation_matrix(grid.coarsen().n).toarray()
    ref = P.T @ A.todense() @ P
    assert np.max(np.abs(galerkin(A).todense() - ref)) <= 1e-12 * np.max(np.abs(ref))


@PROPS
@given(problems())
def test_transfer_adjointness(prob):
    grid, _, _, rng = prob
    fine, coarse = cvec(rng, grid.n), cvec(rng, grid.coarsen().n)
    # full weighting is half the adjoint of linear interpolation away from the ends
    lhs = np.vdot(coarse[1:-1], restrict_full_weighting(fine)[1:-1])
    P = interpolation_matrix(coarse.size).toarray()
    rhs = 0.5 * np.vdot((P @ np.r_[0, coarse[1:-1], 0]), fine)
    assert abs(lhs - rhs) <= 1e-12 * np.linalg.norm(fine) * np.linalg.norm(coarse)
    assert np.array_equal(prolongate(coarse)[::2], coarse)


@PROPS
@given(problems())
def test_conjugation_identity(prob):
    grid, kf, A, rng = prob
    if isinstance(kf, PiecewiseConstantK):
        bases = [discontinuous_naive(kf, grid), geometric_optics_basis(kf, grid)]
    else:
        bases = [constant_basis(kf.carrier(), grid)]
    a = cvec(rng, grid.n)
    for b in bases:
        for u in b:
            lhs = A.matvec(u * a)
            rhs = u * A.scaled_similarity(u).matvec(a)
            assert np.max(np.abs(lhs - rhs)) <= 1e-12 * np.max(np.abs(lhs))


@PROPS
@given(problems(), st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False))
def test_wave_cycle_linear(prob, c):
    grid, kf, _, rng = prob
    hier = build_gmg_hierarchy(grid, kf if not isinstance(kf, CosineK) else ConstantK(kf.k_max(0, 1)))
    r1, r2 = cvec(rng, grid.n), cvec(rng, grid.n)
    lhs = wave_cycle(hier, c * r1 + r2)
    rhs = c * wave_cycle(hier, r1) + wave_cycle(hier, r2)
    assert np.linalg.norm(lhs - rhs) <= 1e-9 * max(1.0, np.linalg.norm(rhs))


@PROPS
@given(st.floats(1.0, 200.0), st.floats(0.05, 0.95), st.integers(6, 12), st.integers(1, 4),
       st.sampled_from(["minus", "plus"]))
def test_interface_row_vanishes_for_matched_media(k, xbar, m, p, direction):
    h = 2.0**-m
    a = interface_corrected_ray_row(k, k, xbar, h, h * 2**p, direction)
    b = interface_corrected_ray_row(k, k, xbar, h, h * 2**p, direction, corrected=False)
    for o in b:
        assert abs(a[o] - b[o]) <= 1e-10 * max(1.0, abs(b[o]))
