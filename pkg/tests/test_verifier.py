from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from stablemp import functions as fn
from stablemp.functions import SampledFunction, combine
from stablemp.geometry import Ball, ConvexPolygon, Interval
from stablemp.operator import StableOperator
from stablemp.solver import solve_dirichlet
from stablemp.spectral import SpectralMeasure
from stablemp.verifier import (
    ClassicalConfig,
    VerifierConfig,
    band_integral,
    boundary_functional,
    check_conclusion,
    check_exterior_sign,
    check_positive_part,
    check_ultrasubharmonic,
    classical_mp_check,
    default_family,
    pipeline_replay,
    sphere_average,
    verify_max_principle,
)

LINE = Interval(-1.0, 1.0)
LADDER = (0.1, 0.05, 0.025, 0.0125)
OP = StableOperator(0.5, SpectralMeasure.uniform(1, 2.0))
SMALL_FAMILY = [fn.bump(0.0, 0.5), fn.bump(0.6, 0.3), fn.bump(-0.5, 0.45)]


@pytest.fixture(scope="module")
def solved():
    return solve_dirichlet(OP, LINE, fn.constant(1.0), n_nodes=65).as_function(-1.0, "minus phi")


class TestFamily:
    def test_default_family_inside(self):
        fam = default_family(LINE)
        assert len(fam) == 25
        assert all(eta.vanishes_outside(LINE) for eta in fam)

    def test_default_family_polygon(self):
        sq = ConvexPolygon(((0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)))
        assert all(eta.vanishes_outside(sq) for eta in default_family(sq))


class TestUltrasubharmonic:
    def test_negative_constant(self):
        r = check_ultrasubharmonic(fn.constant(-1.0), OP, LINE)
        assert r.verdict == "pass"
        assert max(abs(v) for v in r.values) <= r.threshold

    def test_counterexample(self):
        r = check_ultrasubharmonic(fn.counterexample(0.5), OP, LINE)
        assert r.verdict == "pass"
        assert r.count == 25

    def test_positive_bump_fails(self):
        r = check_ultrasubharmonic(fn.bump(0.0, 0.5), OP, LINE, SMALL_FAMILY)
        assert r.verdict == "fail"
        assert r.measured > 0

    def test_solved_dirichlet_pairs_negatively(self, solved):
        r = check_ultrasubharmonic(solved, OP, LINE, SMALL_FAMILY)
        assert r.verdict == "pass"
        # weak solution: (phi, A eta) = int eta, so -phi pairs to -int eta
        ref, _ = integrate.quad(lambda t: float(SMALL_FAMILY[0](t)), -0.5, 0.5)
        assert r.values[0] == pytest.approx(-ref, rel=2e-2)


class TestPositivePart:
    def test_nonpositive_function(self):
        r = check_positive_part(fn.constant(-1.0), OP, LINE, SMALL_FAMILY)
        assert r.verdict == "pass"
        assert all(v == 0.0 for v in r.values)

    def test_counterexample_inherits(self):
        assert check_positive_part(fn.counterexample(0.5), OP, LINE, SMALL_FAMILY).verdict == "pass"

    def test_sign_changing_subsolution(self):
        u = fn.sign_changing_subsolution(0.5)
        assert check_ultrasubharmonic(u, OP, LINE, SMALL_FAMILY).verdict == "pass"
        assert check_positive_part(u, OP, LINE, SMALL_FAMILY).verdict == "pass"


class TestBandIntegral:
    def test_interval(self):
        one = SampledFunction(lambda t: np.ones(len(t)), region=LINE, smoothness="C0")
        assert band_integral(one, LINE, 0.1) == pytest.approx(0.2, rel=1e-12)

    def test_polygon_and_ball_areas(self):
        one = SampledFunction(lambda p: np.ones(len(p)), dim=2, region=None)
        sq = ConvexPolygon(((0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)))
        assert band_integral(one, sq, 0.1) == pytest.approx(1 - 0.8**2, rel=1e-12)
        assert band_integral(one, Ball((0.0, 0.0), 1.0), 0.1) == pytest.approx(math.pi * (1 - 0.81), rel=1e-12)

    def test_counterexample_oracle(self):
        s = 0.5
        for eps in LADDER:
            half, _ = integrate.quad(lambda x: (1 + x) ** (s - 1), 1 - eps, 1, weight="alg", wvar=(0.0, s - 1.0))
            assert band_integral(fn.counterexample(s), LINE, eps) == pytest.approx(2 * half, rel=1e-9)


class TestBoundaryFunctional:
    @pytest.mark.parametrize("s", [0.3, 0.5, 0.7])
    def test_counterexample_limit(self, s):
        lad = boundary_functional(fn.counterexample(s), LINE, s, LADDER)
        assert lad.verdict == "fail"
        assert lad.ratio > 0.9
        assert lad.values[-1] == pytest.approx(2**s / s, rel=2e-2)

    @pytest.mark.parametrize("s", [0.3, 0.5, 0.7])
    def test_shifted_ladder_decreases(self, s):
        lad = boundary_functional(fn.counterexample(s), LINE, s, LADDER, delta=0.1)
        assert all(a > b for a, b in zip(lad.values, lad.values[1:]))
        # the functional behaves like (2^s/s) eps^delta
        assert lad.ratio == pytest.approx(8.0**-0.1, rel=2e-2)

    def test_weighted_integrable_decays(self):
        lad = boundary_functional(fn.power_profile(1.0), LINE, 0.5, LADDER)
        assert lad.verdict == "pass"

    def test_zero_positive_part_passes(self):
        lad = boundary_functional(fn.constant(-1.0), LINE, 0.5, LADDER)
        assert lad.values == (0.0,) * 4
        assert lad.verdict == "pass"

    def test_bad_ladder(self):
        with pytest.raises(ValueError):
            boundary_functional(fn.constant(-1.0), LINE, 0.5, (0.1,))


class TestReports:
    def test_negative_constant(self):
        rep = verify_max_principle(fn.constant(-1.0), OP, LINE)
        assert set(rep.verdicts.values()) == {"pass"}
        assert rep.consistent
        assert rep.meta["exterior_ball_radius"] is None  # convex: unbounded exterior balls

    def test_counterexample_pattern(self):
        rep = verify_max_principle(fn.counterexample(0.5), OP, LINE)
        assert rep.verdicts == {
            "ultrasubharmonic": "pass",
            "exterior_sign": "pass",
            "boundary_functional": "fail",
            "conclusion": "fail",
        }
        assert rep.consistent

    def test_solved_dirichlet(self, solved):
        rep = verify_max_principle(solved, OP, LINE, family=SMALL_FAMILY)
        assert rep.hypotheses_pass and rep.conclusion.verdict == "pass"

    def test_exterior_sign(self):
        positive_outside = SampledFunction(
            lambda t: -np.ones(len(t)), region=LINE, extension=lambda t: np.ones(len(t)), smoothness="C0"
        )
        assert check_exterior_sign(positive_outside, LINE).verdict == "fail"
        assert check_exterior_sign(fn.counterexample(0.5), LINE).verdict == "pass"

    def test_conclusion(self):
        assert check_conclusion(fn.bump(0.0, 0.5), LINE).verdict == "fail"
        assert check_conclusion(fn.constant(-2.0), LINE).verdict == "pass"

    def test_deterministic(self):
        a = verify_max_principle(fn.counterexample(0.5), OP, LINE, family=SMALL_FAMILY).to_dict()
        b = verify_max_principle(fn.counterexample(0.5), OP, LINE, family=SMALL_FAMILY).to_dict()
        assert a == b

    @given(st.floats(0.1, 50.0))
    @settings(max_examples=5, deadline=None)
    def test_positive_scaling(self, c):
        u = fn.sign_changing_subsolution(0.5)
        base = verify_max_principle(u, OP, LINE, family=SMALL_FAMILY)
        scaled = verify_max_principle(combine([(c, u)], name="cu"), OP, LINE, family=SMALL_FAMILY)
        assert scaled.verdicts == base.verdicts
        assert np.allclose(scaled.ultrasubharmonic.values, c * np.array(base.ultrasubharmonic.values), rtol=1e-6, atol=1e-12)
        assert scaled.boundary_functional.ratio == pytest.approx(base.boundary_functional.ratio, rel=1e-9)

    def test_config_tolerances_are_used(self):
        cfg = VerifierConfig(conclusion_rel_tol=10.0)
        assert check_conclusion(fn.bump(0.0, 0.5, 0.1), LINE, cfg).verdict == "pass"


class TestReplay:
    def test_negative_constant(self):
        tr = pipeline_replay(OP, LINE, fn.constant(-1.0))
        assert all(st.integral_v_psi == 0.0 and st.remainder_bound == 0.0 for st in tr.steps)
        assert tr.remainder_decays() and tr.limit_nonpositive()

    def test_solved_dirichlet(self, solved):
        tr = pipeline_replay(OP, LINE, solved)
        assert all(abs(st.integral_v_psi) < 1e-12 for st in tr.steps)
        assert tr.remainder_decays()

    def test_counterexample_failure_mode(self):
        u = fn.counterexample(0.5)
        tr = pipeline_replay(OP, LINE, u)
        assert not tr.remainder_decays()
        assert not tr.limit_nonpositive()
        assert tr.bound_respected()
        assert all(st.remainder_bound > 0.5 * tr.steps[0].remainder_bound for st in tr.steps)
        psi = fn.bump(0.0, 0.5)
        ref, _ = integrate.quad(lambda t: (1 - t * t) ** -0.5 * float(psi(t)), -0.5, 0.5)
        assert ref > 0
        assert tr.steps[-1].integral_v_psi == pytest.approx(ref, rel=1e-3)

    def test_psi_must_fit(self):
        with pytest.raises(ValueError):
            pipeline_replay(OP, LINE, fn.constant(-1.0), psi=fn.bump(0.0, 0.95))


class TestClassical:
    def test_sphere_average_harmonic(self):
        u = fn.quadratic_form(1.0, -1.0)
        assert sphere_average(u, np.array([0.2, 0.1]), 0.5) == pytest.approx(float(u([0.2, 0.1])), abs=1e-14)

    def test_harmonic_equality(self):
        rep = classical_mp_check(fn.quadratic_form(1.0, -1.0), Ball((0.0, 0.0), 1.0))
        assert rep.ultrasubharmonic.values[0] <= 1e-8
        assert rep.ultrasubharmonic.skipped > 0

    def test_bump_on_negative_constant_fails(self):
        disc = Ball((0.0, 0.0), 1.0)
        u = combine([(1.0, fn.constant(-1.0, dim=2, radius=5.0)), (2.0, fn.bump([0.0, 0.0], 0.4))], name="-1+2 bump")
        assert classical_mp_check(u, disc).ultrasubharmonic.verdict == "fail"

    def test_subharmonic_passes(self):
        rep = classical_mp_check(fn.quadratic_form(1.0, 1.0, -2.0), fn.wedge_domain(), ClassicalConfig())
        assert rep.ultrasubharmonic.verdict == "pass"
        assert rep.verdicts["conclusion"] == "pass"
        assert rep.consistent
