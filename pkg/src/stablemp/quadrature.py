"""Composite one-dimensional rules with algebraic endpoint weights.

Every rule here is a fixed set of nodes and weights that depends only on
geometry (cut points, exponents, orders), never on integrand values, so
integrals built from them are exactly linear in the integrand.
"""

from __future__ import annotations

import math
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi, roots_legendre


@dataclass(frozen=True)
class QuadratureConfig:
    """Knobs for the singular radial quadratures.

    ``inner_cutoff`` of ``None`` selects the radius automatically from the
    distance to the nearest breakpoint of the integrand.
    """

    inner_cutoff: float | None = None
    truncation_radius: float = 1.0e3
    order: int = 16
    abs_tol: float = 1.0e-9
    rel_tol: float = 1.0e-9
    max_refinements: int = 60
    angular_nodes: int = 64
    inner_floor: float = 1.0e-4

    def __post_init__(self) -> None:
        if self.inner_cutoff is not None and self.inner_cutoff <= 0:
            raise ValueError("inner_cutoff must be positive")
        if self.truncation_radius <= 0 or self.order < 2:
            raise ValueError("truncation_radius and order must be positive")
        if not (0 < self.abs_tol <= 1e-3 and 0 < self.rel_tol <= 1e-3):
            raise ValueError("abs_tol and rel_tol must lie in (0, 1e-3]")
        if self.max_refinements < 1 or self.angular_nodes < 4:
            raise ValueError("max_refinements >= 1 and angular_nodes >= 4 required")

    def coarser(self) -> "QuadratureConfig":
        """Same geometry, lower per-panel order; used for error estimates."""
        return QuadratureConfig(
            inner_cutoff=self.inner_cutoff,
            truncation_radius=self.truncation_radius,
            order=max(4, self.order // 2),
            abs_tol=self.abs_tol,
            rel_tol=self.rel_tol,
            max_refinements=self.max_refinements,
            angular_nodes=self.angular_nodes,
            inner_floor=self.inner_floor,
        )


@lru_cache(maxsize=None)
def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    t, w = roots_legendre(n)
    return t, w


@lru_cache(maxsize=None)
def gauss_jacobi(n: int, alpha: float, beta: float) -> tuple[np.ndarray, np.ndarray]:
    """Nodes/weights for the weight (1-t)^alpha (1+t)^beta on [-1, 1]."""
    t, w = roots_jacobi(n, alpha, beta)
    return t, w


def panel_rule(
    a: float, b: float, n: int, left_exp: float = 0.0, right_exp: float = 0.0
) -> tuple[np.ndarray, np.ndarray]:
    """Rule for the plain integral over [a, b].

    Exact for f = (r-a)^left_exp (b-r)^right_exp * polynomial of degree < 2n.
    The returned weights act on f itself, the algebraic weight is folded in.
    """
    half = 0.5 * (b - a)
    if left_exp == 0.0 and right_exp == 0.0:
        t, w = gauss_legendre(n)
        return a + half * (t + 1.0), half * w
    t, w = gauss_jacobi(n, float(right_exp), float(left_exp))
    scale = (1.0 - t) ** right_exp * (1.0 + t) ** left_exp
    return a + half * (t + 1.0), half * w / scale


@dataclass(frozen=True)
class Segment:
    """Integration segment with the algebraic behaviour at both ends."""

    lo: float
    hi: float
    lo_exp: float = 0.0
    hi_exp: float = 0.0


def _gap(p: float, q: float, pts: list[float], skip_lo: bool, skip_hi: bool) -> float:
    """Distance from [p, q] to the sorted points, ignoring the flagged endpoints."""
    tlo, thi = 1e-12 * max(1.0, abs(p)), 1e-12 * max(1.0, abs(q))
    i = bisect_left(pts, p - tlo)
    j = bisect_right(pts, q + thi)
    for v in pts[i:j]:
        if (skip_lo and abs(v - p) <= tlo) or (skip_hi and abs(v - q) <= thi):
            continue
        if p <= v <= q or (not skip_lo and abs(v - p) <= tlo) or (not skip_hi and abs(v - q) <= thi):
            return 0.0
        return min(abs(v - p), abs(v - q))
    best = math.inf
    if i > 0:
        best = p - pts[i - 1]
    if j < len(pts):
        best = min(best, pts[j] - q)
    return best


def composite_rule(
    segments: list[Segment],
    singular: np.ndarray | list[float],
    n: int,
    ratio: float = 1.0,
    max_depth: int = 60,
    max_len: float = math.inf,
) -> tuple[np.ndarray, np.ndarray]:
    """Panels refined until each is at most ``ratio`` times its distance to
    every singular point that is not one of its own segment endpoints.

    Endpoint behaviour is absorbed by Gauss-Jacobi weights on the two panels
    touching a segment end, which keeps the rule integrand-independent.
    """
    sing = sorted(set(float(v) for v in singular))
    lo: list[float] = []
    hi: list[float] = []
    special: list[tuple[int, float, float]] = []
    for seg in segments:
        if not seg.hi > seg.lo:
            continue
        stack = [(seg.lo, seg.hi, 0)]
        while stack:
            p, q, depth = stack.pop()
            length = q - p
            if depth < max_depth and (
                length > max_len or length > ratio * _gap(p, q, sing, p == seg.lo, q == seg.hi)
            ):
                m = 0.5 * (p + q)
                stack.append((m, q, depth + 1))
                stack.append((p, m, depth + 1))
                continue
            le = seg.lo_exp if p == seg.lo else 0.0
            re = seg.hi_exp if q == seg.hi else 0.0
            if le != 0.0 or re != 0.0:
                special.append((len(lo), le, re))
            lo.append(p)
            hi.append(q)
    if not lo:
        return np.empty(0), np.empty(0)
    a, b = np.asarray(lo), np.asarray(hi)
    t, w = gauss_legendre(n)
    half = 0.5 * (b - a)
    nodes = a[:, None] + half[:, None] * (t[None, :] + 1.0)
    weights = half[:, None] * w[None, :]
    for k, le, re in special:
        nodes[k], weights[k] = panel_rule(a[k], b[k], n, le, re)
    return nodes.ravel(), weights.ravel()


def split_segments(
    lo: float,
    hi: float,
    cuts: list[tuple[float, float, float]] | None = None,
    lo_exp: float = 0.0,
    hi_exp: float = 0.0,
) -> list[Segment]:
    """Break [lo, hi] at interior cuts.

    ``cuts`` holds (position, exponent on the left side, exponent on the right
    side); cuts outside (lo, hi) are ignored and cuts that coincide with an
    end to rounding transfer their exponent to that end.
    """
    tol = 1e-12 * max(1.0, abs(lo), abs(hi))
    inner = []
    for c in sorted(cuts or [], key=lambda c: c[0]):
        if abs(c[0] - lo) <= tol:
            lo_exp = lo_exp or c[2]
        elif abs(c[0] - hi) <= tol:
            hi_exp = hi_exp or c[1]
        elif lo < c[0] < hi:
            inner.append(c)
    segs: list[Segment] = []
    cur, cur_exp = lo, lo_exp
    for pos, left, right in inner:
        segs.append(Segment(cur, pos, cur_exp, left))
        cur, cur_exp = pos, right
    segs.append(Segment(cur, hi, cur_exp, hi_exp))
    return segs
