from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from stablemp.errors import InvalidDomainError, RangeError
from stablemp.functions import SampledFunction, constant, wedge_domain
from stablemp.geometry import (
    Ball,
    Collar,
    ConvexPolygon,
    Exhaustion,
    Interval,
    Mollifier,
    band_samples,
    bump_normalization,
    convolved_distance_bound,
    distance_to_boundary,
    domain_from_dict,
    domain_rule,
    integrate_over,
    mollify,
)

SQUARE = ConvexPolygon(((0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)))


def _brute_distance(domain, pts, n=200_000):
    bd = domain.sample_boundary(n)
    out = np.empty(len(pts))
    for k, p in enumerate(pts):
        out[k] = np.sqrt(np.min(np.sum((bd - p) ** 2, axis=1)))
    return out


class TestDistance:
    def test_examples(self):
        assert distance_to_boundary(Ball((0.0, 0.0), 1.0), [0.0, 0.0]) == pytest.approx(1.0)
        assert distance_to_boundary(Interval(-1.0, 1.0), 0.75) == pytest.approx(0.25)
        assert distance_to_boundary(SQUARE, [0.5, 0.1]) == pytest.approx(0.1)

    @pytest.mark.parametrize("domain", [SQUARE, wedge_domain(), Ball((0.2, -0.1), 0.8)], ids=["square", "wedge", "ball"])
    def test_against_brute_force(self, domain):
        rng = np.random.default_rng(5)
        lo, hi = domain.bbox()
        pts = rng.uniform(lo - 0.3, hi + 0.3, (500, 2))
        got = domain.distance_to_boundary(pts)
        ref = _brute_distance(domain, pts)
        assert np.max(np.abs(got - ref)) < 1e-6

    def test_interval_exact(self):
        x = np.linspace(-3, 3, 501)
        assert np.array_equal(Interval(-1.0, 2.0).distance_to_boundary(x), np.minimum(np.abs(x + 1), np.abs(x - 2)))

    def test_polygon_must_be_convex_ccw(self):
        with pytest.raises(InvalidDomainError):
            ConvexPolygon(((0.0, 0.0), (0.0, 1.0), (1.0, 1.0), (1.0, 0.0)))

    def test_round_trip(self):
        for d in (SQUARE, Ball((0.0, 0.0), 2.0), Interval(-1.0, 3.0)):
            assert domain_from_dict(d.to_dict()) == d

    @given(st.floats(-0.99, 0.99), st.floats(-0.99, 0.99))
    @settings(max_examples=40, deadline=None)
    def test_chords_end_on_boundary(self, x, y):
        p = np.array([x, y])
        if not Ball((0.0, 0.0), 1.0).contains(p[None])[0]:
            return
        th = np.array([0.6, 0.8])
        for dom in (Ball((0.0, 0.0), 1.0), ConvexPolygon(((-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)))):
            lo, hi = dom.chord(p, th)
            ends = np.array([p + lo * th, p + hi * th])
            assert np.allclose(dom.distance_to_boundary(ends), 0.0, atol=1e-12)


class TestExhaustion:
    def test_ball(self):
        ex = Exhaustion(Ball((0.0, 0.0), 1.0))
        d = ex.at(0.1)
        assert d == Ball((0.0, 0.0), 0.9)
        gap = ex.parent.distance_to_boundary(d.sample_boundary(64))
        assert np.allclose(gap, 0.1)

    def test_square_band(self):
        ex = Exhaustion(SQUARE)
        for eps in (0.2, 0.1, 0.05):
            bd = ex.at(eps).sample_boundary(4000)
            dist = SQUARE.distance_to_boundary(bd)
            assert dist.min() >= eps * (1 - 1e-9)
            # corner arcs of radius eps give lam = 2 - sin(pi/4), below sqrt 2
            assert dist.max() <= math.sqrt(2) * eps
            assert dist.max() / eps == pytest.approx(2 - math.sin(math.pi / 4), rel=1e-3)
            assert dist.max() <= ex.lam * eps * (1 + 1e-9)

    def test_wedge_band(self):
        ex = Exhaustion(wedge_domain())
        for eps in (0.05, 0.02):
            dist = ex.parent.distance_to_boundary(ex.at(eps).sample_boundary(4000))
            assert dist.min() >= eps * (1 - 1e-9)
            assert dist.max() <= ex.lam * eps * (1 + 1e-9)

    def test_nesting(self):
        ex = Exhaustion(SQUARE)
        pts = np.random.default_rng(2).uniform(0, 1, (1000, 2))
        inner, outer = ex.at(0.2).contains(pts), ex.at(0.1).contains(pts)
        assert np.all(outer[inner])

    def test_range_error(self):
        with pytest.raises(RangeError):
            Exhaustion(Ball((0.0, 0.0), 1.0)).at(1.0)

    def test_collar_kinds(self):
        pts = np.array([[0.05], [0.5], [1.05]])
        iv = Interval(0.0, 1.0)
        assert Collar(iv, 0.1, "band").contains(pts).tolist() == [True, False, False]
        assert Collar(iv, 0.1, "thinned").contains(pts).tolist() == [False, True, False]
        assert Collar(iv, 0.1, "thickened").contains(pts).tolist() == [True, True, True]


class TestMollifier:
    @pytest.mark.parametrize("dim", [1, 2])
    @pytest.mark.parametrize("eps", [1.0, 0.1, 0.01])
    def test_normalization(self, dim, eps):
        m = Mollifier(eps, dim)
        if dim == 1:
            val, _ = integrate.quad(lambda y: float(m(np.array([y]))[0]), -eps, eps, epsabs=0, epsrel=1e-12)
        else:
            val, _ = integrate.quad(
                lambda r: 2 * np.pi * r * float(m(np.array([[r, 0.0]]))[0]), 0, eps, epsabs=0, epsrel=1e-12
            )
        assert val == pytest.approx(1.0, rel=1e-8)

    def test_one_dimensional_constant(self):
        assert 1 / bump_normalization(1) == pytest.approx(0.4439938161680794, rel=1e-12)

    def test_constant(self):
        for eps in (0.5, 0.01):
            assert mollify(constant(2.5), Mollifier(eps), [0.0, 0.3]) == pytest.approx([2.5, 2.5], rel=1e-10)

    def test_linear(self):
        lin = SampledFunction(lambda x: x, region=None)
        x = np.array([-0.7, 0.0, 1.3])
        assert mollify(lin, Mollifier(0.2), x) == pytest.approx(x, abs=1e-12)

    def test_step(self):
        step = SampledFunction(lambda x: np.ones(len(x)), region=Interval(0.0, 10.0), smoothness="C0")
        assert mollify(step, Mollifier(0.3), [0.0])[0] == pytest.approx(0.5, abs=1e-10)

    def test_two_dimensional_constant(self):
        assert mollify(constant(-1.0, dim=2), Mollifier(0.1, 2), np.array([[0.2, 0.1]]))[0] == pytest.approx(-1.0, rel=1e-9)


class TestConvolvedDistance:
    def test_line_ladder_is_bounded(self):
        ex = Exhaustion(Interval(-1.0, 1.0))
        for s in (0.25, 0.5, 0.75):
            assert convolved_distance_bound(ex, s, [0.1, 0.05, 0.025, 0.0125]).spread < 2

    def test_band_predicate(self):
        pts = band_samples(Ball((0.0, 0.0), 1.0), 0.3, 0.05)
        assert np.all(Ball((0.0, 0.0), 1.0).distance_to_boundary(pts) < 0.3)
        assert not np.any(np.linalg.norm(pts, axis=1) < 0.5)


class TestIntegration:
    def test_square_area(self):
        val, _ = integrate_over(SQUARE, lambda p: np.ones(len(p)))
        assert val == pytest.approx(1.0, rel=1e-10)

    def test_domain_rule_moments(self):
        pts, w = domain_rule(Ball((0.0, 0.0), 1.0))
        assert w.sum() == pytest.approx(math.pi, rel=1e-12)
        assert w @ (pts[:, 0] ** 2) == pytest.approx(math.pi / 4, rel=1e-12)
        pts, w = domain_rule(wedge_domain())
        assert w.sum() == pytest.approx(5.0 / 12.0, rel=1e-12)
