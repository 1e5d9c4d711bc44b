"""Bounded convex domains, collars, exhaustions and the mollifier.

Point arrays follow one convention throughout the package: shape ``(n,)``
in one dimension and ``(n, d)`` otherwise.  :func:`as_points` converts to
the internal ``(n, d)`` layout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Any, Callable

import numpy as np
from scipy import integrate
from scipy.optimize import linprog

from .errors import InvalidDomainError, RangeError, ToleranceError
from .quadrature import composite_rule, split_segments


def as_points(x: Any, dim: int) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if dim == 1:
        return arr.reshape(-1, 1)
    if arr.ndim == 1:
        if arr.size != dim:
            raise ValueError(f"expected points of dimension {dim}, got shape {arr.shape}")
        return arr.reshape(1, dim)
    if arr.shape[-1] != dim:
        raise ValueError(f"expected points of dimension {dim}, got shape {arr.shape}")
    return arr.reshape(-1, dim)


def user_points(pts: np.ndarray) -> np.ndarray:
    """Inverse of :func:`as_points` for callables written by users."""
    return pts[:, 0] if pts.shape[1] == 1 else pts


class Domain:
    """Open, bounded, convex set.

    Subclasses provide membership, distance to the boundary and the chord
    ``{r : x + r*theta in domain}``, which is an open interval by convexity.
    """

    dim: int
    exterior_ball_radius: float = math.inf
    lipschitz_constant: float = 1.0

    def contains(self, x: Any) -> np.ndarray:
        raise NotImplementedError

    def distance_to_boundary(self, x: Any) -> np.ndarray:
        raise NotImplementedError

    def chord(self, x: np.ndarray, theta: np.ndarray) -> tuple[float, float] | None:
        raise NotImplementedError

    def bounding_ball(self) -> tuple[np.ndarray, float]:
        raise NotImplementedError

    def sample_boundary(self, n: int) -> np.ndarray:
        raise NotImplementedError

    def thinned(self, t: float) -> "Domain":
        """The set of points farther than ``t`` from the complement."""
        raise NotImplementedError

    def bbox(self) -> tuple[np.ndarray, np.ndarray]:
        c, r = self.bounding_ball()
        return c - r, c + r

    @property
    def inradius(self) -> float:
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError

    def signed_distance(self, x: Any) -> np.ndarray:
        """Negative inside, positive outside."""
        d = self.distance_to_boundary(x)
        return np.where(self.contains(x), -d, d)

    def distance_to(self, x: Any) -> np.ndarray:
        """Distance to the closed domain (zero inside)."""
        return np.maximum(self.signed_distance(x), 0.0)


@dataclass(frozen=True)
class Interval(Domain):
    a: float
    b: float
    exterior_ball_radius: float = math.inf
    lipschitz_constant: float = 0.0

    def __post_init__(self) -> None:
        if not self.b > self.a:
            raise InvalidDomainError(f"interval needs a < b, got ({self.a}, {self.b})")

    dim = 1

    def contains(self, x):
        p = as_points(x, 1)[:, 0]
        return (p > self.a) & (p < self.b)

    def distance_to_boundary(self, x):
        p = as_points(x, 1)[:, 0]
        return np.minimum(np.abs(p - self.a), np.abs(p - self.b))

    def chord(self, x, theta):
        x0 = float(np.ravel(x)[0])
        th = float(np.ravel(theta)[0])
        if th == 0.0:
            return None
        r1, r2 = (self.a - x0) / th, (self.b - x0) / th
        return (min(r1, r2), max(r1, r2))

    def bounding_ball(self):
        return np.array([0.5 * (self.a + self.b)]), 0.5 * (self.b - self.a)

    def sample_boundary(self, n):
        return np.array([self.a, self.b])

    def thinned(self, t):
        if 2 * t >= self.b - self.a:
            raise RangeError(f"thinning by {t} empties the interval")
        return Interval(self.a + t, self.b - t)

    @property
    def inradius(self):
        return 0.5 * (self.b - self.a)

    def to_dict(self):
        return {"kind": "interval", "a": self.a, "b": self.b}


@dataclass(frozen=True)
class Ball(Domain):
    center: tuple[float, ...]
    radius: float
    exterior_ball_radius: float = math.inf
    lipschitz_constant: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "center", tuple(float(c) for c in np.ravel(self.center)))
        if not self.radius > 0:
            raise InvalidDomainError("ball radius must be positive")

    @property
    def dim(self) -> int:  # type: ignore[override]
        return len(self.center)

    @cached_property
    def _c(self) -> np.ndarray:
        return np.asarray(self.center)

    def contains(self, x):
        p = as_points(x, self.dim)
        return np.linalg.norm(p - self._c, axis=1) < self.radius

    def distance_to_boundary(self, x):
        p = as_points(x, self.dim)
        return np.abs(np.linalg.norm(p - self._c, axis=1) - self.radius)

    def chord(self, x, theta):
        y = np.ravel(x) - self._c
        th = np.ravel(theta)
        a = float(th @ th)
        b = float(y @ th)
        c = float(y @ y) - self.radius**2
        disc = b * b - a * c
        if disc <= 0.0:
            return None
        sq = math.sqrt(disc)
        # stable root pair
        q = -(b + math.copysign(sq, b)) if b != 0 else -sq
        r1 = q / a
        r2 = c / q if q != 0 else -r1
        return (min(r1, r2), max(r1, r2))

    def bounding_ball(self):
        return self._c.copy(), self.radius

    def sample_boundary(self, n):
        if self.dim == 1:
            return np.array([self.center[0] - self.radius, self.center[0] + self.radius])
        if self.dim == 2:
            phi = 2 * np.pi * np.arange(n) / n
            return self._c + self.radius * np.column_stack([np.cos(phi), np.sin(phi)])
        # Fibonacci sphere
        k = np.arange(n) + 0.5
        z = 1 - 2 * k / n
        phi = np.pi * (1 + 5**0.5) * k
        rho = np.sqrt(1 - z * z)
        return self._c + self.radius * np.column_stack([rho * np.cos(phi), rho * np.sin(phi), z])

    def thinned(self, t):
        if t >= self.radius:
            raise RangeError(f"thinning by {t} empties the ball")
        return Ball(self.center, self.radius - t)

    @property
    def inradius(self):
        return self.radius

    def to_dict(self):
        return {"kind": "ball", "center": list(self.center), "r": self.radius}


def _clip_halfplane(poly: np.ndarray, n: np.ndarray, c: float) -> np.ndarray:
    """Sutherland-Hodgman clip of a convex polygon to {x : n.x <= c}."""
    out = []
    m = len(poly)
    for i in range(m):
        p, q = poly[i], poly[(i + 1) % m]
        fp, fq = n @ p - c, n @ q - c
        if fp <= 0:
            out.append(p)
        if fp * fq < 0:
            out.append(p + (q - p) * (fp / (fp - fq)))
    return np.asarray(out)


def _segment_distance(p: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    ab = b - a
    t = np.clip(((p - a) @ ab) / (ab @ ab), 0.0, 1.0)
    proj = a + t[:, None] * ab
    return np.linalg.norm(p - proj, axis=1)


@dataclass(frozen=True)
class ConvexPolygon(Domain):
    vertices: tuple[tuple[float, float], ...]
    exterior_ball_radius: float = math.inf
    lipschitz_constant: float = 1.0

    dim = 2

    def __post_init__(self) -> None:
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or len(v) < 3:
            raise InvalidDomainError("polygon needs at least three 2D vertices")
        object.__setattr__(self, "vertices", tuple(map(tuple, v.tolist())))
        e = np.roll(v, -1, axis=0) - v
        cross = e[:, 0] * np.roll(e, -1, axis=0)[:, 1] - e[:, 1] * np.roll(e, -1, axis=0)[:, 0]
        if np.any(cross <= 1e-14):
            raise InvalidDomainError("polygon must be strictly convex and counterclockwise")

    @cached_property
    def _v(self) -> np.ndarray:
        return np.asarray(self.vertices)

    @cached_property
    def _halfplanes(self) -> tuple[np.ndarray, np.ndarray]:
        v = self._v
        e = np.roll(v, -1, axis=0) - v
        n = np.column_stack([e[:, 1], -e[:, 0]])
        n /= np.linalg.norm(n, axis=1)[:, None]
        return n, np.einsum("ij,ij->i", n, v)

    def contains(self, x):
        p = as_points(x, 2)
        n, c = self._halfplanes
        return np.all(p @ n.T < c, axis=1)

    def distance_to_boundary(self, x):
        p = as_points(x, 2)
        v = self._v
        d = np.stack([_segment_distance(p, v[i], v[(i + 1) % len(v)]) for i in range(len(v))])
        return d.min(axis=0)

    def chord(self, x, theta):
        x = np.ravel(x)
        th = np.ravel(theta)
        n, c = self._halfplanes
        lo, hi = -math.inf, math.inf
        for ni, ci in zip(n, c):
            den = float(ni @ th)
            num = float(ci - ni @ x)
            if abs(den) < 1e-300:
                if num <= 0:
                    return None
                continue
            r = num / den
            if den > 0:
                hi = min(hi, r)
            else:
                lo = max(lo, r)
        if hi <= lo:
            return None
        return (lo, hi)

    def bounding_ball(self):
        v = self._v
        c = 0.5 * (v.min(axis=0) + v.max(axis=0))
        return c, float(np.linalg.norm(v - c, axis=1).max())

    def sample_boundary(self, n):
        v = self._v
        lengths = np.linalg.norm(np.roll(v, -1, axis=0) - v, axis=1)
        per = np.maximum(1, np.round(n * lengths / lengths.sum()).astype(int))
        pts = []
        for i, k in enumerate(per):
            t = np.arange(k) / k
            pts.append(v[i] + t[:, None] * (v[(i + 1) % len(v)] - v[i]))
        return np.vstack(pts)

    def thinned(self, t):
        n, c = self._halfplanes
        lo, hi = self.bbox()
        poly = np.array([[lo[0], lo[1]], [hi[0], lo[1]], [hi[0], hi[1]], [lo[0], hi[1]]])
        for ni, ci in zip(n, c):
            poly = _clip_halfplane(poly, ni, ci - t)
            if len(poly) < 3:
                raise RangeError(f"thinning by {t} empties the polygon")
        # drop near-duplicate vertices left by clipping at corners
        keep = [poly[0]]
        for p in poly[1:]:
            if np.linalg.norm(p - keep[-1]) > 1e-12:
                keep.append(p)
        if np.linalg.norm(keep[0] - keep[-1]) <= 1e-12:
            keep.pop()
        try:
            return ConvexPolygon(tuple(map(tuple, keep)))
        except InvalidDomainError as exc:
            raise RangeError(f"thinning by {t} degenerates the polygon") from exc

    @cached_property
    def inradius(self):
        n, c = self._halfplanes
        # maximise rho subject to n_i . x + rho <= c_i
        a_ub = np.column_stack([n, np.ones(len(n))])
        res = linprog([0, 0, -1], A_ub=a_ub, b_ub=c, bounds=[(None, None)] * 3)
        return float(res.x[2])

    @cached_property
    def min_interior_angle(self) -> float:
        v = self._v
        m = len(v)
        angles = []
        for i in range(m):
            a = v[i - 1] - v[i]
            b = v[(i + 1) % m] - v[i]
            angles.append(math.acos(np.clip(a @ b / np.linalg.norm(a) / np.linalg.norm(b), -1, 1)))
        return min(angles)

    def to_dict(self):
        return {"kind": "polygon", "vertices": [list(p) for p in self.vertices]}


@dataclass(frozen=True)
class RoundedPolygon(Domain):
    """Points within ``radius`` of a closed convex polygon ``core``.

    Boundary is C^{1,1}: offset edges joined by circular arcs.
    """

    core: ConvexPolygon
    radius: float
    exterior_ball_radius: float = math.inf
    lipschitz_constant: float = 1.0

    dim = 2

    def _core_signed(self, p: np.ndarray) -> np.ndarray:
        return self.core.signed_distance(p)

    def contains(self, x):
        return self._core_signed(as_points(x, 2)) < self.radius

    def distance_to_boundary(self, x):
        return np.abs(self._core_signed(as_points(x, 2)) - self.radius)

    @cached_property
    def _pieces(self) -> list[Domain]:
        v = self.core._v
        n, _ = self.core._halfplanes
        pieces: list[Domain] = [self.core]
        for i in range(len(v)):
            a, b = v[i], v[(i + 1) % len(v)]
            off = self.radius * n[i]
            pieces.append(ConvexPolygon((tuple(a + off), tuple(b + off), tuple(b - off), tuple(a - off))))
            pieces.append(Ball(tuple(a), self.radius))
        return pieces

    def chord(self, x, theta):
        lo, hi = math.inf, -math.inf
        for piece in self._pieces:
            ch = piece.chord(x, theta)
            if ch is not None:
                lo, hi = min(lo, ch[0]), max(hi, ch[1])
        return None if hi <= lo else (lo, hi)

    def bounding_ball(self):
        c, r = self.core.bounding_ball()
        return c, r + self.radius

    def sample_boundary(self, n):
        v = self.core._v
        nrm, _ = self.core._halfplanes
        m = len(v)
        per = max(2, n // (2 * m))
        pts = []
        for i in range(m):
            a, b = v[i], v[(i + 1) % m]
            t = np.arange(per) / per
            pts.append(a + self.radius * nrm[i] + t[:, None] * (b - a))
            # arc around vertex b from normal of edge i to normal of edge i+1
            p0 = math.atan2(nrm[i][1], nrm[i][0])
            p1 = math.atan2(nrm[(i + 1) % m][1], nrm[(i + 1) % m][0])
            if p1 < p0:
                p1 += 2 * math.pi
            phi = p0 + (p1 - p0) * np.arange(per) / per
            pts.append(b + self.radius * np.column_stack([np.cos(phi), np.sin(phi)]))
        return np.vstack(pts)

    def thinned(self, t):
        if t < self.radius:
            return RoundedPolygon(self.core, self.radius - t)
        return self.core.thinned(t - self.radius)

    @property
    def inradius(self):
        return self.core.inradius + self.radius

    def to_dict(self):
        return {"kind": "rounded-polygon", "core": self.core.to_dict(), "r": self.radius}


def domain_from_dict(spec: dict) -> Domain:
    kind = spec.get("kind")
    if kind == "interval":
        return Interval(float(spec["a"]), float(spec["b"]))
    if kind == "ball":
        return Ball(tuple(spec["center"]), float(spec["r"]))
    if kind == "polygon":
        return ConvexPolygon(tuple(tuple(v) for v in spec["vertices"]))
    raise InvalidDomainError(f"unknown domain kind {kind!r}")


def distance_to_boundary(domain: Domain, x: Any) -> np.ndarray | float:
    """Euclidean distance to the boundary; scalar in, scalar out."""
    d = domain.distance_to_boundary(x)
    return float(d[0]) if np.ndim(x) == 0 or (domain.dim > 1 and np.ndim(x) == 1) else d


# {{{ collars and exhaustion


@dataclass(frozen=True)
class Collar:
    parent: Domain
    epsilon: float
    kind: str = "band"  # "thinned", "thickened" or "band"

    def __post_init__(self) -> None:
        if self.kind not in ("thinned", "thickened", "band"):
            raise ValueError(f"unknown collar kind {self.kind!r}")
        if self.epsilon <= 0:
            raise ValueError("collar width must be positive")

    def contains(self, x) -> np.ndarray:
        inside = self.parent.contains(x)
        d = self.parent.distance_to_boundary(x)
        if self.kind == "thinned":
            return inside & (d > self.epsilon)
        if self.kind == "thickened":
            return inside | (d < self.epsilon)
        return inside & (d < self.epsilon)


@dataclass(frozen=True)
class Exhaustion:
    """Nested family D_eps of subdomains with eps <= dist(dD_eps, dOmega) <= lam*eps.

    Intervals and balls shrink concentrically.  Polygons are eroded by
    2*eps and dilated back by eps, which rounds every corner with an arc of
    radius eps.
    """

    parent: Domain
    lam: float | None = None

    def __post_init__(self) -> None:
        if self.lam is None:
            if isinstance(self.parent, ConvexPolygon):
                lam = 2.0 - math.sin(0.5 * self.parent.min_interior_angle)
            else:
                lam = 2.0
            object.__setattr__(self, "lam", lam)
        if not self.lam > 1.0:
            raise ValueError("exhaustion constant must exceed 1")

    @property
    def eps0(self) -> float:
        if isinstance(self.parent, ConvexPolygon):
            return 0.5 * self.parent.inradius
        return self.parent.inradius

    def at(self, eps: float) -> Domain:
        if not 0 < eps < self.eps0:
            raise RangeError(f"eps={eps} outside (0, {self.eps0})")
        p = self.parent
        if isinstance(p, ConvexPolygon):
            return RoundedPolygon(p.thinned(2.0 * eps), eps)
        return p.thinned(eps)


def exhaustion_at(ex: Exhaustion, eps: float) -> Domain:
    return ex.at(eps)


# }}}


# {{{ mollifier


def _bump_profile(r2: np.ndarray) -> np.ndarray:
    out = np.zeros_like(r2)
    m = r2 < 1.0
    out[m] = np.exp(-1.0 / (1.0 - r2[m]))
    return out


@lru_cache(maxsize=None)
def bump_normalization(dim: int) -> float:
    """1 / integral of exp(-1/(1-|x|^2)) over the unit ball of R^dim."""
    area = 2 * math.pi ** (dim / 2) / math.gamma(dim / 2)  # |S^{dim-1}|
    val, _ = integrate.quad(
        lambda r: r ** (dim - 1) * math.exp(-1.0 / (1.0 - r * r)), 0.0, 1.0, epsabs=0, epsrel=1e-13
    )
    return 1.0 / (area * val) if dim > 1 else 1.0 / (2.0 * val)


@dataclass(frozen=True)
class Mollifier:
    epsilon: float
    dim: int = 1

    def __post_init__(self) -> None:
        if self.epsilon <= 0:
            raise ValueError("mollifier width must be positive")

    @property
    def sup(self) -> float:
        return bump_normalization(self.dim) * math.exp(-1.0) * self.epsilon ** (-self.dim)

    def __call__(self, y: Any) -> np.ndarray:
        p = as_points(y, self.dim) / self.epsilon
        r2 = np.einsum("ij,ij->i", p, p)
        return bump_normalization(self.dim) * self.epsilon ** (-self.dim) * _bump_profile(r2)


def mollify(u, m: Mollifier, x: Any, order: int = 16, angular: int = 64) -> np.ndarray:
    """(u * eta_eps)(x) at the given points.

    ``u`` needs ``evaluate(points)`` and, in one dimension, ``cuts_1d()``
    listing (position, left exponent, right exponent) of its breakpoints.
    """
    pts = as_points(x, m.dim)
    eps = m.epsilon
    out = np.empty(len(pts))
    if m.dim == 1:
        cuts = list(u.cuts_1d())
        for k, x0 in enumerate(pts[:, 0]):
            segs = split_segments(x0 - eps, x0 + eps, cuts)
            sing = [c[0] for c in cuts] + [x0 - eps, x0 + eps]
            # the bump is flat but not analytic at its support edge
            y, w = composite_rule(segs, sing, order, max_len=eps / 5)
            vals = u.evaluate(y) * m(x0 - y)
            out[k] = float(w @ vals)
            if not np.isfinite(out[k]):
                raise ToleranceError(f"mollification not finite at x={x0}")
        return out
    if m.dim != 2:
        raise NotImplementedError("mollify supports d = 1, 2")
    rad, wr = composite_rule(split_segments(0.0, eps), [], order, max_len=eps / 5)
    phi = 2 * np.pi * np.arange(angular) / angular
    dirs = np.column_stack([np.cos(phi), np.sin(phi)])
    offs = (rad[:, None, None] * dirs[None, :, :]).reshape(-1, 2)
    wts = (wr[:, None] * rad[:, None] * (2 * np.pi / angular) * np.ones(angular)[None, :]).ravel()
    ker = m(offs)
    for k, x0 in enumerate(pts):
        out[k] = float((wts * ker) @ u.evaluate(x0 - offs))
    return out


# }}}


# {{{ convolved distance estimate


def band_samples(domain: Domain, width: float, spacing: float, max_points: int = 4000) -> np.ndarray:
    """Points of {x in domain : dist(x, boundary) < width} on a grid of the given spacing.

    Balls in d >= 2 are sampled along one radius (rotation invariance).
    """
    if domain.dim == 1:
        c, r = domain.bounding_ball()
        lo, hi = c[0] - r, c[0] + r
        k = np.arange(1, int(math.ceil(width / spacing)))
        k = k[k * spacing < width]
        return np.concatenate([lo + k * spacing, hi - k * spacing])
    if isinstance(domain, Ball):
        k = np.arange(1, int(math.ceil(width / spacing)))
        rho = domain.radius - k * spacing
        rho = rho[rho > 0]
        pts = np.zeros((len(rho), domain.dim))
        pts[:, 0] = rho
        return pts + np.asarray(domain.center)
    lo, hi = domain.bbox()
    gx = np.arange(lo[0] + 0.5 * spacing, hi[0], spacing)
    gy = np.arange(lo[1] + 0.5 * spacing, hi[1], spacing)
    pts = np.column_stack([a.ravel() for a in np.meshgrid(gx, gy)])
    keep = domain.contains(pts) & (domain.distance_to_boundary(pts) < width)
    pts = pts[keep]
    if len(pts) > max_points:
        pts = pts[np.linspace(0, len(pts) - 1, max_points).astype(int)]
    return pts


def convolved_distance(
    inner: Domain, m: Mollifier, s: float, x: Any, order: int = 16, angular: int = 128
) -> np.ndarray:
    """(dist(., boundary of inner)^{-s} * eta_eps)(x)."""
    pts = as_points(x, inner.dim)
    eps = m.epsilon
    out = np.empty(len(pts))
    if inner.dim == 1:
        c, r = inner.bounding_ball()
        ends = (c[0] - r, c[0] + r)
        cuts = [(e, -s, -s) for e in ends]
        for k, x0 in enumerate(pts[:, 0]):
            segs = split_segments(x0 - eps, x0 + eps, cuts)
            y, w = composite_rule(segs, list(ends) + [x0 - eps, x0 + eps], order, max_len=eps / 5)
            ker = m(x0 - y)
            with np.errstate(divide="ignore"):
                f = np.where(ker > 0, inner.distance_to_boundary(y) ** (-s), 0.0) * ker
            out[k] = float(w @ f)
        return out
    if inner.dim != 2:
        raise NotImplementedError("convolved distance supports d = 1, 2")
    # polar coordinates around x; each ray meets the convex boundary at chord ends
    phi = 2 * np.pi * (np.arange(angular) + 0.5) / angular
    dirs = np.column_stack([np.cos(phi), np.sin(phi)])
    for k, x0 in enumerate(pts):
        total = 0.0
        for th in dirs:
            ch = inner.chord(x0, th)
            cuts = []
            if ch is not None:
                cuts = [(r, -s, -s) for r in ch if 0 < r < eps]
            segs = split_segments(0.0, eps, cuts)
            t, w = composite_rule(segs, [c[0] for c in cuts] + [eps], order, max_len=eps / 5)
            y = x0 + t[:, None] * th
            d = np.maximum(inner.distance_to_boundary(y), 1e-300)
            total += float(w @ (t * d ** (-s) * m(t[:, None] * th)))
        out[k] = total * 2 * np.pi / angular
    return out


@dataclass
class ConvolvedDistanceTable:
    s: float
    eps: list[float]
    normalized_sup: list[float]
    argmax: list[Any] = field(default_factory=list)

    @property
    def spread(self) -> float:
        v = np.asarray(self.normalized_sup)
        return float(v.max() / v.min())

    @property
    def constant(self) -> float:
        return float(max(self.normalized_sup))


def convolved_distance_bound(
    ex: Exhaustion, s: float, ladder: list[float], spacing_factor: float = 20.0
) -> ConvolvedDistanceTable:
    """eps^s * sup over the band dist(x, dOmega) < (1+lam) eps of the convolved distance."""
    sups, where = [], []
    for eps in ladder:
        inner = ex.at(eps)
        pts = band_samples(ex.parent, (1.0 + ex.lam) * eps, eps / spacing_factor)
        vals = convolved_distance(inner, Mollifier(eps, ex.parent.dim), s, pts)
        j = int(np.argmax(vals))
        sups.append(float(vals[j]) * eps**s)
        where.append(pts[j].tolist() if np.ndim(pts[j]) else float(pts[j]))
    return ConvolvedDistanceTable(s, list(ladder), sups, where)


# }}}


# {{{ integration over domains


def integrate_over(
    domain: Domain,
    f: Callable[[np.ndarray], np.ndarray],
    x_limits: tuple[float, float] | None = None,
    epsrel: float = 1e-9,
    epsabs: float = 1e-12,
    limit: int = 200,
) -> tuple[float, float]:
    """Adaptive integral of ``f`` over the domain, optionally cut to x in x_limits.

    Two-dimensional domains are sliced by vertical chords; ``f`` receives
    points in the package convention.
    """
    if domain.dim == 1:
        c, r = domain.bounding_ball()
        lo, hi = c[0] - r, c[0] + r
        if x_limits is not None:
            lo, hi = max(lo, x_limits[0]), min(hi, x_limits[1])
        val, err = integrate.quad(
            lambda t: float(f(np.array([t]))[0]), lo, hi, epsrel=epsrel, epsabs=epsabs, limit=limit
        )
        return val, err
    if domain.dim != 2:
        raise NotImplementedError("integration over d >= 3 domains is not supported")
    lo, hi = domain.bbox()
    xa, xb = lo[0], hi[0]
    if x_limits is not None:
        xa, xb = max(xa, x_limits[0]), min(xb, x_limits[1])
    up = np.array([0.0, 1.0])
    brk = None
    if isinstance(domain, ConvexPolygon):
        brk = sorted({v[0] for v in domain.vertices if xa < v[0] < xb}) or None

    def inner(x: float) -> float:
        ch = domain.chord(np.array([x, 0.0]), up)
        if ch is None:
            return 0.0
        val, _ = integrate.quad(
            lambda y: float(f(np.array([[x, y]]))[0]), ch[0], ch[1], epsrel=epsrel, epsabs=epsabs, limit=limit
        )
        return val

    return integrate.quad(inner, xa, xb, points=brk, epsrel=epsrel, epsabs=epsabs, limit=limit)


# }}}


# {{{ fixed area rules


def domain_rule(
    domain: Domain, order: int = 16, max_len: float | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Tensor Gauss rule over a domain, in the package point convention.

    Intervals use composite Gauss-Legendre, planar balls a polar product
    rule, polygons vertical slices between vertex abscissae (exact for
    polynomials of degree < 2*order on every slice).
    """
    if domain.dim == 1:
        c, r = domain.bounding_ball()
        lo, hi = c[0] - r, c[0] + r
        return composite_rule(split_segments(lo, hi), [], order, max_len=max_len or (hi - lo) / 4)
    if domain.dim != 2:
        raise NotImplementedError("area rules exist for d = 1, 2")
    if isinstance(domain, Ball):
        rad, wr = composite_rule(split_segments(0.0, domain.radius), [], order, max_len=max_len or domain.radius / 4)
        n = 4 * order
        phi = 2 * np.pi * np.arange(n) / n
        pts = np.asarray(domain.center) + (rad[:, None, None] * np.stack([np.cos(phi), np.sin(phi)], -1)[None]).reshape(-1, 2)
        w = (wr * rad)[:, None] * np.full(n, 2 * np.pi / n)[None, :]
        return pts, w.ravel()
    lo, hi = domain.bbox()
    xs = [lo[0], hi[0]]
    if isinstance(domain, ConvexPolygon):
        xs += [v[0] for v in domain.vertices]
    xs = sorted(set(xs))
    width = max_len or (hi[0] - lo[0]) / 4
    tx, wx = composite_rule(
        [s for a, b in zip(xs[:-1], xs[1:]) for s in split_segments(a, b)], [], order, max_len=width
    )
    pts, wts = [], []
    up = np.array([0.0, 1.0])
    for x, w in zip(tx, wx):
        ch = domain.chord(np.array([x, 0.0]), up)
        if ch is None:
            continue
        ty, wy = composite_rule(split_segments(ch[0], ch[1]), [], order, max_len=max_len or math.inf)
        pts.append(np.column_stack([np.full(len(ty), x), ty]))
        wts.append(w * wy)
    return np.vstack(pts), np.concatenate(wts)


# }}}
