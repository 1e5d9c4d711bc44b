"""Functions on R^d with a declared region, exterior extension and regularity.

A :class:`SampledFunction` is evaluated by its ``rule`` inside ``region``
and by its ``extension`` outside.  The metadata drives every quadrature in
the package: region boundaries, ``knots`` and the ``edge_exponent`` (the
power of the distance with which ``u`` behaves at the region boundary)
become panel breakpoints with matching Gauss-Jacobi weights.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Union

import numpy as np
from scipy.interpolate import CubicSpline, RegularGridInterpolator
from scipy.optimize import brentq

from .geometry import Ball, ConvexPolygon, Domain, Interval, as_points, user_points

Rule = Callable[[np.ndarray], np.ndarray]
Extension = Union[str, Rule]

SMOOTHNESS = ("C0", "C1", "C2")


@dataclass(frozen=True)
class SampledFunction:
    rule: Rule
    dim: int = 1
    region: Domain | None = None
    extension: Extension = "zero"
    smoothness: str = "C2"
    edge_exponent: float = 0.0
    knots: tuple[float, ...] = ()
    far_value: float | None = None
    far_radius: float | None = None
    extension_support: Domain | None = None
    flat_edges: bool = False  # u is C-infinity across the region boundary
    length_scale: float | None = None  # panels along rays stay below a fifth of this
    name: str = "u"
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        if self.smoothness not in SMOOTHNESS:
            raise ValueError(f"smoothness must be one of {SMOOTHNESS}")
        if self.region is not None and self.region.dim != self.dim:
            raise ValueError("region dimension mismatch")
        if (self.far_value is None) != (self.far_radius is None):
            raise ValueError("far_value and far_radius go together")
        if isinstance(self.extension, str) and self.extension != "zero":
            raise ValueError("extension is 'zero' or a callable")
        object.__setattr__(self, "knots", tuple(sorted(float(k) for k in self.knots)))

    # {{{ evaluation

    def evaluate_points(self, pts: np.ndarray) -> np.ndarray:
        """Values at points in (n, d) layout."""
        pts = np.asarray(pts, dtype=float).reshape(-1, self.dim)
        out = np.zeros(len(pts))
        if self.region is None:
            inside = np.ones(len(pts), dtype=bool)
        else:
            inside = self.region.contains(pts)
        if inside.any():
            out[inside] = self.rule(user_points(pts[inside]))
        if not isinstance(self.extension, str) and (~inside).any():
            out[~inside] = self.extension(user_points(pts[~inside]))
        if self.far_radius is not None:
            far = np.linalg.norm(pts, axis=1) >= self.far_radius
            out[far] = self.far_value
        return out

    def __call__(self, x: Any) -> np.ndarray | float:
        v = self.evaluate_points(as_points(x, self.dim))
        single = np.ndim(x) == 0 or (self.dim > 1 and np.ndim(x) == 1)
        return float(v[0]) if single else v

    evaluate = __call__

    # }}}

    # {{{ metadata queries

    @property
    def zero_extension(self) -> bool:
        return isinstance(self.extension, str)

    def vanishes_outside_region(self) -> bool:
        return self.region is not None and self.zero_extension and self.far_value in (None, 0.0)

    def vanishes_outside(self, domain: Domain) -> bool:
        """True when u = 0 on the complement of ``domain`` (checked geometrically)."""
        if not self.vanishes_outside_region():
            return False
        return _contained(self.region, domain)

    def cuts_1d(self) -> list[tuple[float, float, float]]:
        """(position, left exponent, right exponent) of every breakpoint on the line."""
        if self.dim != 1:
            raise ValueError("cuts_1d is for one-dimensional functions")
        cuts = [(k, 0.0, 0.0) for k in self.knots]
        if self.region is not None:
            c, r = self.region.bounding_ball()
            b = self.edge_exponent
            cuts.append((c[0] - r, 0.0, b))
            cuts.append((c[0] + r, b, 0.0))
        if self.extension_support is not None:
            c, r = self.extension_support.bounding_ball()
            cuts += [(c[0] - r, 0.0, 0.0), (c[0] + r, 0.0, 0.0)]
        if self.far_radius is not None:
            cuts += [(-self.far_radius, 0.0, 0.0), (self.far_radius, 0.0, 0.0)]
        return sorted(cuts)

    def breakpoints_1d(self) -> list[float]:
        return sorted({c[0] for c in self.cuts_1d()})

    def bounded_support(self) -> tuple[float, float] | None:
        """Interval outside which u vanishes (d = 1), if any."""
        if self.dim != 1:
            return None
        if self.vanishes_outside_region():
            c, r = self.region.bounding_ball()
            return (c[0] - r, c[0] + r)
        return None

    # }}}

    # {{{ derived functions

    def positive_part(self, scan: int = 4001) -> "SampledFunction":
        """u+ = max(u, 0); in one dimension, sign changes become knots."""
        rule, ext = self.rule, self.extension
        knots = list(self.knots)
        if self.dim == 1 and self.region is not None:
            knots += _sign_changes(self, scan)
        return replace(
            self,
            rule=lambda x: np.maximum(rule(x), 0.0),
            extension=ext if isinstance(ext, str) else (lambda x: np.maximum(ext(x), 0.0)),
            smoothness="C0",
            knots=tuple(knots),
            far_value=None if self.far_value is None else max(self.far_value, 0.0),
            name=f"({self.name})+",
        )

    def scaled(self, c: float) -> "SampledFunction":
        return combine([(c, self)], name=f"{c:g}*{self.name}")

    def translated(self, h: Any) -> "SampledFunction":
        """x -> u(x - h)."""
        h = np.atleast_1d(np.asarray(h, dtype=float))
        if self.far_radius is not None:
            raise ValueError("translation of far-field data is not supported")
        shift = h[0] if self.dim == 1 else h
        rule, ext = self.rule, self.extension
        return replace(
            self,
            rule=lambda x: rule(x - shift),
            extension=ext if isinstance(ext, str) else (lambda x: ext(x - shift)),
            region=None if self.region is None else _translate_domain(self.region, h),
            knots=tuple(k + float(h[0]) for k in self.knots) if self.dim == 1 else self.knots,
            extension_support=None
            if self.extension_support is None
            else _translate_domain(self.extension_support, h),
            name=f"{self.name}(.-h)",
        )

    def dilated(self, lam: float) -> "SampledFunction":
        """x -> u(x / lam)."""
        if self.far_radius is not None:
            raise ValueError("dilation of far-field data is not supported")
        rule, ext = self.rule, self.extension
        return replace(
            self,
            rule=lambda x: rule(x / lam),
            extension=ext if isinstance(ext, str) else (lambda x: ext(x / lam)),
            region=None if self.region is None else _dilate_domain(self.region, lam),
            knots=tuple(lam * k for k in self.knots),
            length_scale=None if self.length_scale is None else lam * self.length_scale,
            extension_support=None
            if self.extension_support is None
            else _dilate_domain(self.extension_support, lam),
            name=f"{self.name}(./{lam:g})",
        )

    # }}}


def _contained(inner: Domain, outer: Domain) -> bool:
    if inner.dim == 1:
        ci, ri = inner.bounding_ball()
        co, ro = outer.bounding_ball()
        return ci[0] - ri >= co[0] - ro - 1e-14 and ci[0] + ri <= co[0] + ro + 1e-14
    if isinstance(inner, Ball):
        pts = inner.sample_boundary(256)
    elif isinstance(inner, ConvexPolygon):
        pts = np.asarray(inner.vertices)
    else:
        pts = inner.sample_boundary(512)
    return bool(np.all(outer.signed_distance(pts) <= 1e-12))


def _translate_domain(d: Domain, h: np.ndarray) -> Domain:
    if isinstance(d, Interval):
        return Interval(d.a + h[0], d.b + h[0])
    if isinstance(d, Ball):
        return Ball(tuple(np.asarray(d.center) + h), d.radius)
    if isinstance(d, ConvexPolygon):
        return ConvexPolygon(tuple(tuple(np.asarray(v) + h) for v in d.vertices))
    raise TypeError(f"cannot translate {type(d).__name__}")


def _dilate_domain(d: Domain, lam: float) -> Domain:
    if isinstance(d, Interval):
        return Interval(lam * d.a, lam * d.b)
    if isinstance(d, Ball):
        return Ball(tuple(lam * np.asarray(d.center)), lam * d.radius)
    if isinstance(d, ConvexPolygon):
        return ConvexPolygon(tuple(tuple(lam * np.asarray(v)) for v in d.vertices))
    raise TypeError(f"cannot dilate {type(d).__name__}")


def _sign_changes(u: SampledFunction, scan: int) -> list[float]:
    c, r = u.region.bounding_ball()
    lo, hi = c[0] - r, c[0] + r
    x = np.linspace(lo, hi, scan)[1:-1]
    v = u.rule(x)
    roots = []
    for i in np.nonzero(np.sign(v[:-1]) * np.sign(v[1:]) < 0)[0]:
        roots.append(brentq(lambda t: float(u.rule(np.array([t]))[0]), x[i], x[i + 1], xtol=1e-15))
    return roots


def combine(terms: list[tuple[float, SampledFunction]], name: str = "combination") -> SampledFunction:
    """Linear combination sum c_i u_i, with the merged breakpoint metadata.

    The combination is tagged with the weakest smoothness of its terms and
    uses the most singular edge exponent; the region is the union hull when
    all terms share one, else ``None`` (global evaluation).
    """
    if not terms:
        raise ValueError("empty combination")
    dim = terms[0][1].dim
    if any(u.dim != dim for _, u in terms):
        raise ValueError("dimension mismatch")
    coeffs = [float(c) for c, _ in terms]
    funcs = [u for _, u in terms]

    def value(x: Any) -> np.ndarray:
        pts = as_points(x, dim)
        return sum(c * u.evaluate_points(pts) for c, u in zip(coeffs, funcs))

    regions = [u.region for u in funcs]
    same_region = all(r is not None and r == regions[0] for r in regions)
    zero_ext = all(u.vanishes_outside_region() for u in funcs)
    knots = set()
    for u in funcs:
        knots.update(u.knots)
        if dim == 1 and not same_region:
            knots.update(u.breakpoints_1d())
    far = [u for u in funcs if u.far_radius is not None]
    far_radius = max((u.far_radius for u in far), default=None)
    far_value = None
    if far_radius is not None:
        if len(far) != len(funcs) and not all(u.vanishes_outside_region() or u.far_radius for u in funcs):
            far_radius = None
        else:
            far_value = sum(c * (u.far_value or 0.0) for c, u in zip(coeffs, funcs))
            for u in funcs:
                if u.far_radius is None:
                    _, rr = u.region.bounding_ball()
                    far_radius = max(far_radius, rr + float(np.linalg.norm(u.region.bounding_ball()[0])))
    rank = {"C0": 0, "C1": 1, "C2": 2}
    smooth = min((u.smoothness for u in funcs), key=rank.__getitem__)
    exps = [u.edge_exponent for u in funcs]
    if same_region:
        region = regions[0]
        rule = lambda x: sum(c * u.rule(x) for c, u in zip(coeffs, funcs))
        ext: Extension = "zero" if zero_ext else (lambda x: value(x))
    elif zero_ext and dim == 1:
        lo = min(u.region.bounding_ball()[0][0] - u.region.bounding_ball()[1] for u in funcs)
        hi = max(u.region.bounding_ball()[0][0] + u.region.bounding_ball()[1] for u in funcs)
        region, rule, ext = Interval(lo, hi), value, "zero"
    else:
        region, rule, ext = None, value, "zero"
    return SampledFunction(
        rule=rule,
        dim=dim,
        region=region,
        extension=ext,
        smoothness=smooth,
        edge_exponent=min(exps) if same_region else 0.0,
        knots=tuple(sorted(knots)) if dim == 1 else (),
        far_value=far_value,
        far_radius=far_radius,
        extension_support=None,
        flat_edges=all(u.flat_edges for u in funcs),
        length_scale=min((u.length_scale for u in funcs if u.length_scale), default=None),
        name=name,
    )


# {{{ grids


def from_grid(
    nodes: Any, values: Any, interpolation: str = "cubic", extension: Extension = "zero", name: str = "grid"
) -> SampledFunction:
    """Grid data; 1D nodes must increase strictly, 2D is a tensor grid (xs, ys)."""
    if interpolation not in ("linear", "cubic"):
        raise ValueError("interpolation is 'linear' or 'cubic'")
    smooth = "C2" if interpolation == "cubic" else "C0"
    if isinstance(nodes, (tuple, list)) and len(nodes) == 2 and np.ndim(nodes[0]) == 1 and np.ndim(values) == 2:
        xs, ys = (np.asarray(n, dtype=float) for n in nodes)
        vals = np.asarray(values, dtype=float)
        if np.any(np.diff(xs) <= 0) or np.any(np.diff(ys) <= 0):
            raise ValueError("grid nodes must increase strictly")
        interp = RegularGridInterpolator((xs, ys), vals, method=interpolation)
        region = ConvexPolygon(((xs[0], ys[0]), (xs[-1], ys[0]), (xs[-1], ys[-1]), (xs[0], ys[-1])))
        return SampledFunction(
            lambda p: interp(np.clip(p, [xs[0], ys[0]], [xs[-1], ys[-1]])),
            dim=2,
            region=region,
            extension=extension,
            smoothness=smooth,
            name=name,
        )
    x = np.asarray(nodes, dtype=float).ravel()
    v = np.asarray(values, dtype=float).ravel()
    if len(x) != len(v) or len(x) < 2:
        raise ValueError("need matching nodes and values")
    if np.any(np.diff(x) <= 0):
        raise ValueError("grid nodes must increase strictly")
    if interpolation == "cubic":
        spline = CubicSpline(x, v)
        rule = lambda t: spline(t)
        knots: tuple[float, ...] = ()
    else:
        rule = lambda t: np.interp(t, x, v)
        knots = tuple(x[1:-1])
    return SampledFunction(
        rule, dim=1, region=Interval(x[0], x[-1]), extension=extension, smoothness=smooth, knots=knots, name=name
    )


# }}}


# {{{ builtins


def constant(c: float, dim: int = 1, radius: float = 1.0) -> SampledFunction:
    """u = c on all of R^d (far field declared beyond ``radius``)."""
    return SampledFunction(
        lambda x: np.full(np.shape(x)[0], float(c)),
        dim=dim,
        region=None,
        far_value=float(c),
        far_radius=float(radius),
        name=f"const({c:g})",
    )


def bump(center: Any, width: float, height: float = 1.0, dim: int | None = None) -> SampledFunction:
    """height * exp(1 - 1/(1 - |x-c|^2/w^2)), peak value ``height``, smooth, compact."""
    c = np.atleast_1d(np.asarray(center, dtype=float))
    d = dim or len(c)

    def rule(x: np.ndarray) -> np.ndarray:
        p = as_points(x, d)
        r2 = np.sum((p - c) ** 2, axis=1) / width**2
        out = np.zeros(len(p))
        m = r2 < 1
        out[m] = height * np.exp(1.0 - 1.0 / (1.0 - r2[m]))
        return out

    region: Domain = Interval(c[0] - width, c[0] + width) if d == 1 else Ball(tuple(c), width)
    return SampledFunction(rule, dim=d, region=region, flat_edges=True, length_scale=width, name=f"bump({c.tolist()},{width:g})")


def power_profile(p: float, dim: int = 1, name: str | None = None) -> SampledFunction:
    """(1 - |x|^2)_+^p on the unit ball; p = s-1 gives the harmonic counterexample."""

    def rule(x: np.ndarray) -> np.ndarray:
        q = as_points(x, dim)
        return np.maximum(1.0 - np.sum(q * q, axis=1), 0.0) ** p

    region = Interval(-1.0, 1.0) if dim == 1 else Ball(tuple([0.0] * dim), 1.0)
    return SampledFunction(rule, dim=dim, region=region, edge_exponent=float(p), name=name or f"(1-|x|^2)^{p:g}")


def counterexample(s: float, perturbation: float = 0.0, dim: int = 1) -> SampledFunction:
    return power_profile(s - 1.0 + perturbation, dim, name=f"(1-|x|^2)_+^(s-1{perturbation:+g})")


def distance_power(domain: Domain, p: float) -> SampledFunction:
    """dist(x, boundary)^p inside the domain, zero outside."""
    return SampledFunction(
        lambda x: domain.distance_to_boundary(x) ** p,
        dim=domain.dim,
        region=domain,
        smoothness="C0",
        edge_exponent=float(p),
        name=f"dist^{p:g}",
    )


def sign_changing_subsolution(s: float) -> SampledFunction:
    """(1-x^2)_+^{s-1} (2x^2 - 1) on (-1, 1).

    Negative core, positive next to the boundary.  It is the harmonic profile
    minus twice (1-x^2)_+^s, so the operator maps it to -2 K_s < 0 inside.
    """
    a, b = power_profile(s - 1.0), power_profile(s)
    u = combine([(1.0, a), (-2.0, b)], name="sign-changing subsolution")
    return replace(u, edge_exponent=s - 1.0)


def wedge_domain() -> ConvexPolygon:
    """{0 < x, y < 1, x < 2y < 3x}."""
    return ConvexPolygon(((0.0, 0.0), (1.0, 0.5), (1.0, 1.0), (2.0 / 3.0, 1.0)))


def wedge_function() -> SampledFunction:
    """(xy)^{-1} on the wedge, zero elsewhere."""
    return SampledFunction(
        lambda p: 1.0 / (p[:, 0] * p[:, 1]), dim=2, region=wedge_domain(), smoothness="C2", name="1/(xy)"
    )


def quadratic_form(a: float, b: float, c: float = 0.0) -> SampledFunction:
    """a x^2 + b y^2 + c on the plane (for the classical mode)."""
    return SampledFunction(lambda p: a * p[:, 0] ** 2 + b * p[:, 1] ** 2 + c, dim=2, region=None, name="quadratic")


# }}}
