from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stablemp import functions as fn
from stablemp.errors import RegularityError
from stablemp.functions import SampledFunction, combine
from stablemp.geometry import Ball, ConvexPolygon, Interval
from stablemp.operator import (
    StableOperator,
    apply_pointwise,
    apply_pointwise_with_error,
    apply_truncated,
    energy,
    linf_bound_probe,
    pairing,
)
from stablemp.spectral import SpectralMeasure

LINE = Interval(-1.0, 1.0)
X5 = np.array([0.0, -0.3, 0.3, -0.6, 0.6])


def line_op(s, mass=2.0):
    return StableOperator(s, SpectralMeasure.uniform(1, mass))


class TestPointwise:
    def test_constant_is_annihilated(self):
        assert np.allclose(apply_pointwise(line_op(0.5), fn.constant(3.0), X5), 0.0, atol=1e-12)

    @pytest.mark.parametrize("s", [0.3, 0.7])
    def test_counterexample_is_harmonic(self, s):
        vals = apply_pointwise(line_op(s), fn.counterexample(s), np.array([0.0, -0.5, 0.5]))
        assert np.max(np.abs(vals)) < 1e-7

    @pytest.mark.parametrize("s", [0.25, 0.5, 0.75])
    def test_power_profile_is_constant(self, s):
        vals = apply_pointwise(line_op(s), fn.power_profile(s), X5)
        assert (vals.max() - vals.min()) / vals[0] < 1e-3
        assert vals[0] > 0

    def test_strict_maximum_is_positive(self):
        u = fn.bump(0.2, 0.5)
        assert apply_pointwise(line_op(0.4), u, np.array([0.2]))[0] > 0

    def test_c0_refused(self):
        u = fn.distance_power(LINE, 0.5)
        with pytest.raises(RegularityError):
            apply_pointwise(line_op(0.5), u, np.array([0.0]))

    def test_error_estimate_is_small(self):
        ev = apply_pointwise_with_error(line_op(0.5), fn.bump(0.0, 0.5), np.array([0.0, 0.3]))
        for e in ev:
            assert e.error <= 1e-6 * max(1.0, abs(e.value))

    def test_two_dimensional_uniform_is_rotation_invariant(self):
        op = StableOperator(0.5, SpectralMeasure.uniform(2))
        u = fn.bump([0.0, 0.0], 0.8)
        r = 0.3
        pts = np.array([[r, 0.0], [0.0, r], [r / np.sqrt(2), -r / np.sqrt(2)]])
        vals = apply_pointwise(op, u, pts)
        assert np.ptp(vals) / abs(vals[0]) < 1e-6

    @given(st.floats(-3, 3), st.floats(-3, 3))
    @settings(max_examples=15, deadline=None)
    def test_linearity(self, a, b):
        op = line_op(0.35)
        f = SampledFunction(lambda t: (1 - t**2) ** 3, region=LINE, name="f")
        g = SampledFunction(lambda t: np.cos(2 * t) * (1 - t**2) ** 3, region=LINE, name="g")
        x = np.array([-0.4, 0.1, 0.7])
        lhs = apply_pointwise(op, combine([(a, f), (b, g)]), x)
        rhs = a * apply_pointwise(op, f, x) + b * apply_pointwise(op, g, x)
        scale = np.max(np.abs(apply_pointwise(op, f, x))) * (abs(a) + abs(b)) + 1e-300
        assert np.max(np.abs(lhs - rhs)) <= 1e-9 * scale

    @given(st.floats(-2, 2))
    @settings(max_examples=10, deadline=None)
    def test_translation(self, h):
        op = line_op(0.6)
        u = fn.bump(0.0, 0.5)
        x = np.array([-0.2, 0.0, 0.45, 1.5])
        a = apply_pointwise(op, u, x)
        b = apply_pointwise(op, u.translated(h), x + h)
        assert np.max(np.abs(a - b)) <= 1e-6 * np.max(np.abs(a))

    def test_odd_function(self):
        u = SampledFunction(lambda t: t**3 * (1 - t**2) ** 3, region=LINE, name="odd")
        assert abs(apply_pointwise(line_op(0.5), u, np.array([0.0]))[0]) < 1e-12

    @pytest.mark.parametrize("lam", [0.5, 2.0])
    def test_scaling(self, lam):
        s = 0.3
        op = line_op(s)
        u = fn.bump(0.0, 0.5)
        x = np.linspace(-0.4, 0.4, 5)
        ref = np.max(np.abs(apply_pointwise(op, u, x)))
        got = np.max(np.abs(apply_pointwise(op, u.dilated(lam), lam * x)))
        assert got == pytest.approx(lam ** (-2 * s) * ref, rel=1e-2)


class TestTruncated:
    def test_zero_and_one(self):
        op = line_op(0.5)
        zero = SampledFunction(lambda t: np.zeros(len(t)), region=LINE)
        for kappa in (0.5, 0.01):
            assert apply_truncated(op, zero, np.array([0.1]), kappa)[0] == 0.0
            assert abs(apply_truncated(op, fn.constant(1.0), np.array([0.1]), kappa)[0]) < 1e-12

    def test_kappa_ladder_converges(self):
        op = line_op(0.5)
        u = fn.bump(0.1, 0.6)
        x = np.array([0.0, 0.3])
        full = apply_pointwise(op, u, x)
        gaps = [np.max(np.abs(apply_truncated(op, u, x, k) - full)) for k in (0.1, 0.01, 0.001)]
        assert gaps[0] > gaps[1] > gaps[2]
        # the removed small jumps carry about |u''| kappa^{2-2s}
        assert gaps[1] / gaps[2] == pytest.approx(10.0, rel=0.05)

    def test_rejects_nonpositive_kappa(self):
        with pytest.raises(ValueError):
            apply_truncated(line_op(0.5), fn.constant(1.0), np.array([0.0]), 0.0)


class TestPairingAndEnergy:
    def test_zero_pairing(self):
        zero = SampledFunction(lambda t: np.zeros(len(t)), region=LINE)
        assert pairing(zero, fn.bump(0.0, 0.5), line_op(0.5), LINE) == 0.0

    def test_negative_constant(self):
        assert abs(pairing(fn.constant(-1.0), fn.bump(0.3, 0.4), line_op(0.5), LINE)) < 1e-7

    @pytest.mark.parametrize("s", [0.25, 0.5, 0.75])
    def test_self_pairing_is_energy(self, s):
        op = line_op(s)
        eta = fn.bump(0.1, 0.6)
        e = energy(eta, eta, op, LINE)
        assert e > 0
        assert pairing(eta, eta, op, LINE) == pytest.approx(e, rel=1e-3)

    def test_energy_is_symmetric(self):
        op = line_op(0.4)
        u, v = fn.bump(0.0, 0.7), fn.bump(0.3, 0.5)
        assert energy(u, v, op, LINE) == energy(v, u, op, LINE)

    def test_energy_with_exterior_data(self):
        op = line_op(0.5)
        eta = fn.bump(0.0, 0.5)
        u = fn.bump(0.8, 0.5)  # reaches outside (-1, 1)
        assert energy(u, eta, op, LINE) == pytest.approx(pairing(u, eta, op, LINE), rel=1e-3)

    def test_green_gauss_triple(self):
        op = line_op(0.6)
        u, eta = fn.bump(0.0, 0.8), fn.bump(-0.2, 0.5)
        t, w = np.polynomial.legendre.leggauss(24)
        edges = np.linspace(-0.7, 0.3, 9)
        h = np.diff(edges) / 2
        y = ((edges[:-1] + edges[1:]) / 2 + h * t[:, None]).ravel()
        wy = (h * w[:, None]).ravel()
        first = float(wy @ (apply_pointwise(op, u, y) * eta.rule(y)))
        second = energy(u, eta, op, LINE)
        third = pairing(u, eta, op, LINE)
        assert second == pytest.approx(first, rel=1e-3)
        assert third == pytest.approx(first, rel=1e-3)

    def test_exterior_outside_tail_support_is_invisible(self):
        # axis-only jumps never reach a ball away from both axis strips
        mu = SpectralMeasure.atomic([[1.0, 0.0], [0.0, 1.0]], [1.0, 1.0])
        op = StableOperator(0.5, mu)
        square = ConvexPolygon(((0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)))
        eta = fn.bump([0.5, 0.5], 0.3)
        u = fn.quadratic_form(-1.0, -1.0, 0.5)
        u = SampledFunction(u.rule, dim=2, region=square, name="q")
        base = pairing(u, eta, op, square)
        far = Ball((3.0, 3.0), 0.5)
        with_far = SampledFunction(
            u.rule, dim=2, region=square, extension=lambda p: np.where(far.contains(p), 7.0, 0.0), extension_support=far
        )
        assert pairing(with_far, eta, op, square) == pytest.approx(base, rel=1e-12, abs=1e-14)


class TestLinfProbe:
    def test_zero(self):
        zero = SampledFunction(lambda t: np.zeros(len(t)), region=LINE)
        p = linf_bound_probe(line_op(0.5), zero, LINE)
        assert (p.sup_operator, p.holder_norm) == (0.0, 0.0)

    def test_refinement_stability(self):
        op = line_op(0.5)
        phi = fn.bump(0.0, 0.5)
        a = linf_bound_probe(op, phi, LINE, samples=101).ratio
        b = linf_bound_probe(op, phi, LINE, samples=201).ratio
        assert np.isfinite(a) and abs(a - b) / b < 0.1
