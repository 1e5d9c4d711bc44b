from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stablemp import functions as fn
from stablemp.errors import InsufficientResolutionError
from stablemp.functions import SampledFunction
from stablemp.geometry import Ball, Interval
from stablemp.operator import StableOperator, apply_pointwise, energy
from stablemp.solver import (
    DiscreteSolution,
    Mesh1D,
    assemble,
    boundary_decay_fit,
    fit_power_law,
    holder_seminorm,
    solve_dirichlet,
)
from stablemp.spectral import SpectralMeasure

LINE = Interval(-1.0, 1.0)


def line_op(s, mass=2.0):
    return StableOperator(s, SpectralMeasure.uniform(1, mass))


@pytest.fixture(scope="module")
def ones_solutions():
    return {s: solve_dirichlet(line_op(s), LINE, fn.constant(1.0), n_nodes=512) for s in (0.25, 0.5, 0.75)}


class TestMesh:
    def test_graded_nodes(self):
        m = Mesh1D(-1.0, 1.0, 33, 2.0)
        x = m.nodes
        assert x[0] == -1.0 and x[-1] == 1.0
        assert np.all(np.diff(x) > 0)
        assert m.sizes[0] < m.sizes[len(m.sizes) // 2]

    def test_refinement_is_nested(self):
        m = Mesh1D(-1.0, 1.0, 17)
        assert np.allclose(m.refined().nodes[::2], m.nodes)

    def test_hat_vanishes_outside(self):
        m = Mesh1D(0.0, 1.0, 9)
        h = m.hat(0)
        assert h(np.array([-0.5, 0.0, 1.0, 2.0])).tolist() == [0.0, 0.0, 0.0, 0.0]
        assert h(m.nodes[1]) == 1.0

    def test_bad_mesh(self):
        with pytest.raises(ValueError):
            Mesh1D(0.0, 1.0, 2)
        with pytest.raises(ValueError):
            Mesh1D(0.0, 1.0, 9, 0.5)


class TestAssembly:
    @pytest.mark.parametrize("s", [0.25, 0.5, 0.75])
    def test_symmetric_positive_diagonal(self, s):
        a = assemble(Mesh1D(-1.0, 1.0, 33), line_op(s))
        assert np.array_equal(a, a.T)
        assert np.all(np.diag(a) > 0)
        assert np.linalg.eigvalsh(a).min() > 0

    @pytest.mark.parametrize("s", [0.25, 0.75])
    def test_entries_match_energy(self, s):
        mesh = Mesh1D(-1.0, 1.0, 17)
        op = line_op(s)
        a = assemble(mesh, op)
        for i, j in ((0, 0), (3, 4), (7, 7), (2, 9)):
            ref = energy(mesh.hat(i), mesh.hat(j), op, LINE)
            assert a[i, j] == pytest.approx(ref, rel=1e-6, abs=1e-9 * abs(a[i, i]))

    def test_two_level_restriction(self):
        op = line_op(0.5)
        coarse = Mesh1D(-1.0, 1.0, 17)
        fine = coarse.refined()
        a_c, a_f = assemble(coarse, op), assemble(fine, op)
        # coarse hats are fine-hat combinations: coarse node j -> weights on fine dofs
        xf, xc = fine.nodes, coarse.nodes
        p = np.zeros((fine.n_dofs, coarse.n_dofs))
        for j in range(coarse.n_dofs):
            vals = np.zeros(len(xc))
            vals[j + 1] = 1.0
            p[:, j] = np.interp(xf[1:-1], xc, vals)
        restricted = p.T @ a_f @ p
        assert np.max(np.abs(restricted - a_c)) / np.max(np.abs(a_c)) < 1e-2


class TestSolve:
    def test_zero_data(self):
        zero = SampledFunction(lambda t: np.zeros(len(t)), region=LINE)
        sol = solve_dirichlet(line_op(0.5), LINE, zero, n_nodes=33)
        assert np.all(sol.coefficients == 0.0)
        assert sol.energy == 0.0

    def test_oracle(self, ones_solutions):
        s = 0.5
        k_s = float(apply_pointwise(line_op(s), fn.power_profile(s), np.array([0.0]))[0])
        x = np.array([-0.5, 0.0, 0.5])
        got = ones_solutions[s](x) * k_s / (1 - x**2) ** s
        assert np.max(np.abs(got - 1)) < 0.05

    def test_residual(self, ones_solutions):
        for sol in ones_solutions.values():
            assert sol.residual < 1e-10
            assert np.all(np.isfinite(sol.coefficients))

    def test_nonnegative_data_gives_nonnegative_solution(self, ones_solutions):
        for sol in ones_solutions.values():
            assert sol.coefficients.min() >= -1e-12

    def test_energy_monotone_under_refinement(self):
        op = line_op(0.4)
        psi = fn.bump(0.2, 0.6)
        energies = [solve_dirichlet(op, LINE, psi, n_nodes=n).energy for n in (17, 33, 65)]
        assert energies[0] <= energies[1] + 1e-8
        assert energies[1] <= energies[2] + 1e-8

    @given(st.floats(0.05, 2.0), st.floats(-0.5, 0.5))
    @settings(max_examples=8, deadline=None)
    def test_comparison(self, height, center):
        op = line_op(0.6)
        lo = solve_dirichlet(op, LINE, fn.bump(center, 0.4, height), n_nodes=33)
        hi = solve_dirichlet(op, LINE, fn.constant(2.0 + height), n_nodes=33)
        assert np.all(lo.coefficients <= hi.coefficients + 1e-12)

    def test_linf_constant_is_stable(self):
        op = line_op(0.5)
        ramp = SampledFunction(lambda t: 0.5 * (1 + t), region=LINE, smoothness="C0")
        ratios = []
        for psi in (fn.constant(1.0), fn.bump(0.0, 0.5), ramp):
            sol = solve_dirichlet(op, LINE, psi, n_nodes=65)
            sup_psi = np.max(np.abs(psi(np.linspace(-1, 1, 401))))
            ratios.append(np.max(np.abs(sol.nodal_values)) / sup_psi)
        assert max(ratios) / min(ratios) < 5
        assert max(ratios) <= ratios[0] * (1 + 1e-9)

    def test_as_function_round_trip(self, ones_solutions):
        sol = ones_solutions[0.5]
        u = sol.as_function(-1.0)
        x = np.linspace(-1.2, 1.2, 31)
        assert np.allclose(u(x), -sol(x))


class TestDecayFit:
    @pytest.mark.parametrize("s", [0.25, 0.5, 0.75])
    def test_beta_near_s(self, ones_solutions, s):
        assert abs(boundary_decay_fit(ones_solutions[s]).beta - s) < 0.1

    def test_synthetic_power_law(self):
        mesh = Mesh1D(-1.0, 1.0, 257)
        x = mesh.nodes[1:-1]
        d = np.minimum(x + 1, 1 - x)
        sol = DiscreteSolution(mesh, d**0.5, 0.0, 0.0)
        assert boundary_decay_fit(sol).beta == pytest.approx(0.5, abs=1e-3)
        assert fit_power_law(d, 3 * d**0.7).beta == pytest.approx(0.7, abs=1e-12)

    def test_insufficient_band(self):
        mesh = Mesh1D(-1.0, 1.0, 9, 1.0)
        sol = DiscreteSolution(mesh, np.ones(7), 0.0, 0.0)
        with pytest.raises(InsufficientResolutionError):
            boundary_decay_fit(sol)


class TestHolder:
    def test_constant(self):
        assert holder_seminorm(fn.constant(2.0), LINE, 0.5) == 0.0

    def test_distance_power_stable(self):
        ball = Ball((0.0, 0.0), 1.0)
        u = fn.distance_power(ball, 0.5)
        a = holder_seminorm(u, ball, 0.5, samples=400)
        b = holder_seminorm(u, ball, 0.5, samples=1600)
        assert abs(a - b) / b < 0.1

    def test_lipschitz_grows(self):
        lin = SampledFunction(lambda t: t, region=Interval(0.0, 1.0))
        a = holder_seminorm(lin, Interval(0.0, 1.0), 0.5, samples=100)
        b = holder_seminorm(lin, Interval(0.0, 1.0), 0.5, samples=400)
        assert b > a

    def test_gamma_range(self):
        with pytest.raises(ValueError):
            holder_seminorm(fn.constant(1.0), LINE, 1.0)
