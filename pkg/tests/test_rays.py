import math
from dataclasses import replace

import numpy as np
import pytest

from conftest import cvec
from waveray import (
    ConstantK,
    CosineK,
    Grid1D,
    PiecewiseConstantK,
    SolverConfig,
    assemble_helmholtz,
    assemble_ray_algebraic,
    assemble_ray_geometric,
    build,
    constant_basis,
    continuous_adapted_basis,
    discontinuous_naive,
    geometric_optics_basis,
    interface_corrected_ray_row,
    ray_cycle,
    separate_residual,
    separate_residual_two_scale,
)
from waveray.errors import AlignmentError, ConfigurationError, DegenerateBasisError
from waveray.operators import prolongate
from waveray.rays import (
    dispersion_coefficients,
    extract_coefficients,
    fit_physical_root,
    interface_corrected_coefficients,
    physical_root,
    ray_grid,
    two_scale_steps,
    upwind_row,
)


def setup(k=80.0, kh=0.3125, kH=0.9 * math.pi):
    m = math.ceil(math.log2(k / kh) - 1e-12)
    grid = Grid1D.dyadic(m)
    p = 1
    while k * grid.h * 2**p <= math.pi / 2:
        p += 1
    return grid, p


class TestAlgebraicStencils:
    def test_exponential_stencils(self):
        grid, _ = setup()
        k, h = 80.0, grid.h
        A = assemble_helmholtz(grid, ConstantK(k))
        b = constant_basis(k, grid)
        Rp = A.scaled_similarity(b.plus)
        Rm = A.scaled_similarity(b.minus)
        i = grid.n // 2
        np.testing.assert_allclose([Rp.lower[i], Rp.diag[i], Rp.upper[i]],
                                   np.array([np.exp(-1j * k * h), -2 + (k * h) ** 2, np.exp(1j * k * h)]) / h**2)
        np.testing.assert_allclose([Rm.lower[i], Rm.diag[i], Rm.upper[i]],
                                   np.array([np.exp(1j * k * h), -2 + (k * h) ** 2, np.exp(-1j * k * h)]) / h**2)

    @pytest.mark.parametrize("kind", ["exponential", "naive", "optics", "adapted"])
    def test_conjugation_identity(self, rng, kind):
        grid, p = setup(40.0)
        if kind == "exponential":
            kf, b = ConstantK(40.0), constant_basis(40.0, grid)
        elif kind in ("naive", "optics"):
            kf = PiecewiseConstantK(40.0, 15.0, 0.5)
            b = discontinuous_naive(kf, grid) if kind == "naive" else geometric_optics_basis(kf, grid)
        else:
            kf = CosineK(32.0, 0.5, 20.0)
            b = continuous_adapted_basis(kf, grid, p)
        A = assemble_helmholtz(grid, kf)
        a = cvec(rng, grid.n)
        for u in b:
            lhs = A.matvec(u * a)
            rhs = u * A.scaled_similarity(u).matvec(a)
            assert np.max(np.abs(lhs - rhs)) <= 1e-12 * np.max(np.abs(lhs))

    def test_extracted_coefficients_of_exponential(self):
        grid, _ = setup()
        k, h = 80.0, grid.h
        A = assemble_helmholtz(grid, ConstantK(k))
        c = extract_coefficients(A.scaled_similarity(constant_basis(k, grid).plus), h)
        ref = dispersion_coefficients(k, "plus", h)
        i = grid.n // 2
        assert c.c2[i] == pytest.approx(ref.c2[0])
        assert c.c1[i] == pytest.approx(ref.c1[0])
        assert c.c0[i] == pytest.approx(ref.c0[0], abs=1e-6 * k * k)

    def test_degenerate_basis(self):
        grid, p = setup(40.0)
        A = assemble_helmholtz(grid, ConstantK(40.0))
        b = constant_basis(40.0, grid)
        bad = type(b).__new__(type(b))
        object.__setattr__(bad, "minus", np.zeros(grid.n, complex))
        object.__setattr__(bad, "plus", b.plus)
        with pytest.raises(DegenerateBasisError):
            assemble_ray_algebraic(A, grid, bad, p)

    def test_galerkin_construction(self):
        grid, p = setup(40.0)
        A = assemble_helmholtz(grid, ConstantK(40.0))
        sm, sp = assemble_ray_algebraic(A, grid, constant_basis(40.0, grid), p, operator="galerkin")
        assert sm.solver == sp.solver == "direct"
        assert sm.op.n == ray_grid(grid, p).n

    def test_geometric_and_algebraic_agree_for_constant_k(self):
        grid, p = setup()
        k = 80.0
        A = assemble_helmholtz(grid, ConstantK(k))
        alg = assemble_ray_algebraic(A, grid, constant_basis(k, grid), p, fit=False)
        for s_alg, d in zip(alg, ("minus", "plus")):
            s_geo = assemble_ray_geometric(grid, p, ConstantK(k), d, fine_h=grid.h)
            i = s_geo.op.n // 2
            ga, gg = s_alg.op.row(i), s_geo.op.row(i)
            for j in gg:
                assert abs(abs(ga[j]) - abs(gg[j])) <= (k * grid.h) ** 2 * abs(gg[j]) + 1e-9


class TestGeometricRays:
    def test_laplace_row(self):
        H = 0.1
        row = upwind_row(*(x[0] for x in (dispersion_coefficients(0.0, "minus").c2,
                                            dispersion_coefficients(0.0, "minus").c1,
                                            dispersion_coefficients(0.0, "minus").c0)), H, "minus")
        assert row == {0: pytest.approx(1 / H**2), 1: pytest.approx(-2 / H**2), 2: pytest.approx(1 / H**2)}

    def test_minus_row_composition(self):
        k, H = 30.0, 0.05
        c = dispersion_coefficients(k, "minus")
        row = upwind_row(c.c2[0], c.c1[0], c.c0[0], H, "minus")
        # one-sided second difference plus -2ik times the one-sided first difference
        first = {0: -1.5 / H, 1: 2.0 / H, 2: -0.5 / H}
        second = {0: 1 / H**2, 1: -2 / H**2, 2: 1 / H**2}
        for o in (0, 1, 2):
            assert row[o] == pytest.approx(second[o] - 2j * k * first[o])

    def test_closures(self):
        grid, p = setup()
        sp = assemble_ray_geometric(grid, p, ConstantK(80.0), "plus")
        sm = assemble_ray_geometric(grid, p, ConstantK(80.0), "minus")
        n, H = sp.op.n, sp.H
        assert sp.op.row(n - 1) == {n - 3: 0, n - 2: pytest.approx(-1 / H), n - 1: pytest.approx(1 / H)}
        assert sm.op.row(0) == {0: pytest.approx(-1 / H), 1: pytest.approx(1 / H), 2: 0}
        # inflow: a' - 2ik a = 0 at b for the minus envelope
        assert sm.op.row(n - 1)[n - 1] == pytest.approx(1 / H - 2j * 80.0)

    def test_scale_window_enforced(self):
        grid, p = setup()
        with pytest.raises(ConfigurationError):
            assemble_ray_geometric(grid, p - 1, ConstantK(80.0), "plus")
        assemble_ray_geometric(grid, p - 1, ConstantK(80.0), "plus", strict=False)

    def test_continuous_k_rejected(self):
        grid, p = setup()
        with pytest.raises(ConfigurationError):
            assemble_ray_geometric(grid, p, CosineK(60.0, 0.3, 2.0), "plus")

    def test_direct_solve_inverts_ray_operator(self, rng):
        grid, p = setup()
        for d in ("minus", "plus"):
            s = replace(assemble_ray_geometric(grid, p, ConstantK(80.0), d, fine_h=grid.h), solver="direct")
            a = cvec(rng, s.op.n)
            np.testing.assert_allclose(s.solve(s.op.matvec(a)), a, rtol=1e-10)

    def test_marching_solve_reduces_residual(self, rng):
        grid, p = setup()
        for d in ("minus", "plus"):
            s = assemble_ray_geometric(grid, p, ConstantK(80.0), d, fine_h=grid.h)
            f = cvec(rng, s.op.n)
            assert np.linalg.norm(f - s.op.matvec(s.solve(f))) < 0.5 * np.linalg.norm(f)


class TestRootFitting:
    def test_physical_root_of_exponential(self):
        grid, _ = setup()
        A = assemble_helmholtz(grid, ConstantK(80.0))
        R = A.scaled_similarity(constant_basis(80.0, grid).plus)
        kh = 80.0 * grid.h
        theta = np.arccos(1 - kh**2 / 2)
        np.testing.assert_allclose(physical_root(R), np.exp(1j * (theta - kh)), rtol=1e-12)

    def test_fitted_row_annihilates_target(self):
        grid, p = setup()
        s = assemble_ray_geometric(grid, p, ConstantK(80.0), "plus", fine_h=grid.h)
        t = np.exp(0.3j) * np.ones(s.op.n)
        op = fit_physical_root(s.op, t, "plus")
        i = s.op.n // 2
        row = op.row(i)
        # plus rows couple i, i-1, i-2: q0 + q1 w + q2 w^2 with w = t
        val = row[i] + row[i - 1] * t[i] + row[i - 2] * t[i] ** 2
        assert abs(val) <= 1e-10 * abs(row[i - 2])


class TestSeparation:
    def test_zero(self):
        grid, p = setup()
        s = separate_residual(np.zeros(grid.n, complex), constant_basis(80.0, grid), p)
        assert not s.minus.any() and not s.plus.any()

    @pytest.mark.parametrize("mode", ["geometric", "algebraic"])
    def test_single_direction_wave(self, mode):
        grid = Grid1D.dyadic(10)
        p = 3
        k = 0.9 * math.pi / (grid.h * 2**p)
        b = constant_basis(k, grid)
        s = separate_residual(b.minus, b, p, mode)
        assert np.max(np.abs(s.minus[1:-1] - 1)) <= 0.1
        assert np.max(np.abs(s.plus[1:-1])) <= 0.2
        s = separate_residual(b.plus, b, p, mode)
        assert np.max(np.abs(s.plus[1:-1] - 1)) <= 0.1
        assert np.max(np.abs(s.minus[1:-1])) <= 0.2

    def test_round_trip(self):
        s = build(SolverConfig("gmgWR", k=80, kh=0.3125))
        rc, u = s.rays, s.basis
        X = rc.minus.grid.nodes
        sm = np.cos(np.pi * X) + 0.2j * np.cos(2 * np.pi * X)
        sp = 1 + 0.3 * np.cos(np.pi * X)

        def up(a):
            for _ in range(rc.depth):
                a = prolongate(a)
            return a

        r = s.A.matvec(u.minus * up(sm) + u.plus * up(sp))
        sep = rc.separate(r)
        rm, rp = sep.minus.copy(), sep.plus.copy()
        rm[0], rp[-1] = 0, 0
        rm[-1], rp[0] = r[-1] / u.minus[-1], r[0] / u.plus[0]
        assert np.linalg.norm(rc.minus.solve(rm) - sm) <= 0.2 * np.linalg.norm(sm)
        assert np.linalg.norm(rc.plus.solve(rp) - sp) <= 0.2 * np.linalg.norm(sp)


class TestTwoScale:
    def test_steps(self):
        assert two_scale_steps(100, 80) == 0
        assert two_scale_steps(100, 50) == 1
        assert two_scale_steps(100, 25) == 2
        with pytest.raises(ConfigurationError):
            two_scale_steps(10, 20)

    def test_mild_contrast_is_plain_separation(self, rng):
        kf = PiecewiseConstantK(80.0, 64.0, 0.5)
        grid, p = setup()
        b = geometric_optics_basis(kf, grid)
        r = cvec(rng, grid.n)
        one = separate_residual(r, b, p)
        two = separate_residual_two_scale(r, b, p, grid, kf)
        np.testing.assert_array_equal(one.minus, two.minus)
        np.testing.assert_array_equal(one.plus, two.plus)

    def test_strong_contrast_smooths_slow_side_only(self, rng):
        kf = PiecewiseConstantK(80.0, 20.0, 0.5)
        grid, p = setup()
        b = geometric_optics_basis(kf, grid)
        r = cvec(rng, grid.n)
        one = separate_residual(r, b, p)
        two = separate_residual_two_scale(r, b, p, grid, kf)
        X = ray_grid(grid, p).nodes
        left = X <= 0.5
        np.testing.assert_array_equal(one.minus[left], two.minus[left])
        assert not np.allclose(one.minus[~left], two.minus[~left])

    def test_zero(self):
        kf = PiecewiseConstantK(80.0, 20.0, 0.5)
        grid, p = setup()
        s = separate_residual_two_scale(np.zeros(grid.n, complex), geometric_optics_basis(kf, grid), p, grid, kf)
        assert not s.minus.any() and not s.plus.any()

    def test_misaligned_interface(self):
        kf = PiecewiseConstantK(80.0, 20.0, 0.51)
        grid, p = setup()
        b = discontinuous_naive(kf, grid)
        with pytest.raises(AlignmentError):
            separate_residual_two_scale(np.ones(grid.n, complex), b, p, grid, kf)


class TestInterfaceRow:
    def test_vanishes_for_matched_media(self):
        for d in ("minus", "plus"):
            a = interface_corrected_ray_row(50.0, 50.0, 0.5, 1 / 512, 1 / 64, d)
            b = interface_corrected_ray_row(50.0, 50.0, 0.5, 1 / 512, 1 / 64, d, corrected=False)
            for o in b:
                assert abs(a[o] - b[o]) <= 1e-12 * max(1.0, abs(b[o]))

    def test_correction_terms(self):
        k1, k2, xb, h = 80.0, 20.0, 0.5, 1 / 1024
        base = dispersion_coefficients(k1, "plus", h)
        V = np.exp(1j * (k2 - k1) * xb) * np.exp(1j * k2 * h) - np.exp(1j * k1 * h)
        c2, c1, c0 = interface_corrected_coefficients(k1, k2, xb, h, "plus")
        assert c2 - base.c2[0] == pytest.approx(V / 2)
        assert c1 - base.c1[0] == pytest.approx(V / h)
        assert c0 - base.c0[0] == pytest.approx(V / h**2)

    def test_exactly_one_row_modified(self):
        kf = PiecewiseConstantK(80.0, 20.0, 0.5)
        grid, p = setup()
        for d in ("minus", "plus"):
            plain = assemble_ray_geometric(grid, p, kf, d, fine_h=grid.h)
            corr = assemble_ray_geometric(grid, p, kf, d, fine_h=grid.h, interface=True)
            changed = np.flatnonzero(np.any(plain.op.data != corr.op.data, axis=0))
            assert changed.tolist() == [ray_grid(grid, p).index_of(0.5)]
            assert corr.mode == "geometric-interface-corrected"

    def test_needs_aligned_interface(self):
        grid, p = setup()
        with pytest.raises(AlignmentError):
            assemble_ray_geometric(grid, p, PiecewiseConstantK(80.0, 20.0, 0.51), "plus",
                                   fine_h=grid.h, interface=True)

    def test_bad_mesh_sizes(self):
        with pytest.raises(ConfigurationError):
            interface_corrected_ray_row(50.0, 20.0, 0.5, 0.1, 0.05, "plus")


class TestRayCycle:
    def test_zero(self):
        s = build(SolverConfig("gmgWR", k=80, kh=0.3125))
        systems = (s.rays.minus, s.rays.plus)
        np.testing.assert_array_equal(ray_cycle(np.zeros(s.grid.n, complex), systems, s.basis), 0)

    def test_linear(self, rng):
        s = build(SolverConfig("gmgWR", k=80, kh=0.3125))
        systems = (s.rays.minus, s.rays.plus)
        r = cvec(rng, s.grid.n)
        np.testing.assert_allclose(ray_cycle((2 - 1j) * r, systems, s.basis),
                                   (2 - 1j) * ray_cycle(r, systems, s.basis), rtol=1e-10)

    def test_one_cycle_halves_residual(self):
        s = build(SolverConfig("gmgWR", k=80, kh=0.3125))
        x0 = s.initial_guess()
        b = np.zeros(s.grid.n, complex)
        x1 = s.cycle(b, x0)
        assert np.linalg.norm(s.A.matvec(x1)) <= 0.5 * np.linalg.norm(s.A.matvec(x0))
