"""Spectral measures on the sphere, the induced Levy measure and the tail weight."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Any, Callable, NamedTuple

import numpy as np
from scipy import integrate
from scipy.special import roots_legendre

from .errors import DivergentNormError, InvalidMeasureError, ToleranceError
from .geometry import Ball, Domain, as_points, integrate_over

UNIT_TOL = 1e-12


def sphere_area(dim: int) -> float:
    """sigma(S^{dim-1}); equals 2 for the two-point sphere S^0."""
    return 2 * math.pi ** (dim / 2) / math.gamma(dim / 2)


@dataclass(frozen=True)
class SpectralMeasure:
    """Finite nonnegative measure on S^{d-1}.

    Use the constructors :meth:`uniform`, :meth:`atomic` and
    :meth:`density`.  Every variant exposes a discrete representation
    through :meth:`nodes`, which the operator and tail weight consume.
    """

    dim: int
    kind: str
    mass: float = 0.0
    directions: np.ndarray = field(default_factory=lambda: np.empty((0, 1)), compare=False)
    weights: np.ndarray = field(default_factory=lambda: np.empty(0), compare=False)
    density_fn: Callable[[np.ndarray], np.ndarray] | None = field(default=None, compare=False)
    resolution: int = 256
    samples: tuple[float, ...] = ()  # equispaced planar samples behind a density, if any

    @classmethod
    def uniform(cls, dim: int, mass: float | None = None, resolution: int = 256) -> "SpectralMeasure":
        mass = sphere_area(dim) if mass is None else float(mass)
        if not mass > 0:
            raise InvalidMeasureError("uniform mass must be positive")
        if dim not in (1, 2, 3):
            raise InvalidMeasureError("sphere quadrature is available for d = 1, 2, 3")
        return cls(dim, "uniform", mass, resolution=resolution)

    @classmethod
    def atomic(cls, directions: Any, weights: Any) -> "SpectralMeasure":
        dirs = np.atleast_2d(np.asarray(directions, dtype=float))
        w = np.asarray(weights, dtype=float).ravel()
        if dirs.ndim != 2 or len(dirs) != len(w) or len(w) == 0:
            raise InvalidMeasureError("need one weight per direction")
        norms = np.linalg.norm(dirs, axis=1)
        if np.any(np.abs(norms - 1.0) > UNIT_TOL):
            raise InvalidMeasureError(f"atom directions must be unit vectors, norms {norms}")
        if np.any(w <= 0):
            raise InvalidMeasureError("atom weights must be positive")
        dirs.setflags(write=False)
        w.setflags(write=False)
        return cls(dirs.shape[1], "atomic", float(w.sum()), dirs, w)

    @classmethod
    def density(
        cls, dim: int, fn: Callable[[np.ndarray], np.ndarray], resolution: int = 256
    ) -> "SpectralMeasure":
        """Density with respect to surface measure; ``fn`` maps (n, d) directions to values."""
        if dim not in (2, 3):
            raise InvalidMeasureError("density measures need d = 2 or 3")
        probe = cls(dim, "density", 0.0, density_fn=fn, resolution=resolution)
        dirs, w = probe.nodes()
        if np.any(w < 0):
            raise InvalidMeasureError("density must be nonnegative")
        total = float(w.sum())
        if not total > 0:
            raise InvalidMeasureError("density has zero mass")
        return cls(dim, "density", total, density_fn=fn, resolution=resolution)

    @classmethod
    def density_samples(cls, samples: Any) -> "SpectralMeasure":
        """Planar density given on equispaced angles 2*pi*k/n (periodic linear interpolation)."""
        vals = np.asarray(samples, dtype=float).ravel()
        if len(vals) < 4 or np.any(vals < 0):
            raise InvalidMeasureError("need at least four nonnegative samples")
        n = len(vals)

        def fn(theta: np.ndarray) -> np.ndarray:
            phi = np.mod(np.arctan2(theta[:, 1], theta[:, 0]), 2 * np.pi)
            grid = 2 * np.pi * np.arange(n + 1) / n
            return np.interp(phi, grid, np.append(vals, vals[0]))

        mu = cls.density(2, fn, resolution=max(256, 4 * n))
        return replace(mu, samples=tuple(float(v) for v in vals))

    def total_mass(self) -> float:
        return self.mass

    def nodes(self, resolution: int | None = None) -> tuple[np.ndarray, np.ndarray]:
        """Directions and weights of a quadrature for mu (exact for atoms)."""
        n = resolution or self.resolution
        if self.kind == "atomic":
            return self.directions, self.weights
        if self.dim == 1:
            return np.array([[1.0], [-1.0]]), np.array([0.5 * self.mass, 0.5 * self.mass])
        dens = self._density
        if self.dim == 2:
            phi = 2 * np.pi * np.arange(n) / n
            dirs = np.column_stack([np.cos(phi), np.sin(phi)])
            return dirs, dens(dirs) * (2 * np.pi / n)
        m = max(8, n // 2)
        z, wz = roots_legendre(m)
        phi = 2 * np.pi * np.arange(n) / n
        zz, pp = np.meshgrid(z, phi, indexing="ij")
        rho = np.sqrt(1 - zz**2)
        dirs = np.column_stack([(rho * np.cos(pp)).ravel(), (rho * np.sin(pp)).ravel(), zz.ravel()])
        w = (wz[:, None] * np.full(n, 2 * np.pi / n)[None, :]).ravel()
        return dirs, dens(dirs) * w

    def folded_nodes(self, resolution: int | None = None) -> tuple[np.ndarray, np.ndarray]:
        """Nodes on a half sphere with antipodal weights merged.

        Valid for integrands even in theta, which is the case for every
        symmetrized quantity in this package.
        """
        dirs, w = self.nodes(resolution)
        if self.kind == "atomic":
            return dirs, w
        if self.dim == 1:
            return dirs[:1], np.array([self.mass])
        if self.dim == 2 and len(dirs) % 2 == 0:
            h = len(dirs) // 2
            return dirs[:h], w[:h] + w[h:]
        return dirs, w

    @property
    def _density(self) -> Callable[[np.ndarray], np.ndarray]:
        if self.kind == "uniform":
            c = self.mass / sphere_area(self.dim)
            return lambda th: np.full(len(th), c)
        assert self.density_fn is not None
        return lambda th: np.asarray(self.density_fn(th), dtype=float)

    def to_dict(self) -> dict:
        if self.kind == "uniform":
            return {"kind": "uniform", "mass": self.mass, "dim": self.dim}
        if self.kind == "atomic":
            return {
                "kind": "atomic",
                "atoms": [{"dir": d.tolist(), "w": float(w)} for d, w in zip(self.directions, self.weights)],
            }
        if not self.samples:
            raise InvalidMeasureError("a density given by a callable cannot be serialized")
        return {"kind": "density", "samples": list(self.samples)}


def measure_from_dict(spec: dict, dim: int | None = None) -> SpectralMeasure:
    kind = spec.get("kind")
    if kind == "uniform":
        d = int(spec.get("dim", dim or 1))
        return SpectralMeasure.uniform(d, spec.get("mass"))
    if kind == "atomic":
        atoms = spec["atoms"]
        return SpectralMeasure.atomic([a["dir"] for a in atoms], [a["w"] for a in atoms])
    if kind == "density":
        return SpectralMeasure.density_samples(spec["samples"])
    raise InvalidMeasureError(f"unknown measure kind {kind!r}")


# {{{ nondegeneracy


def _directional_moment(mu: SpectralMeasure, s: float, omega: np.ndarray, quad_res: int) -> np.ndarray:
    dirs, w = mu.nodes(quad_res)
    dots = np.abs(omega @ dirs.T)
    # products of unit vectors below a few ulps are orthogonal up to rounding
    dots[dots < 1e-14] = 0.0
    return (dots ** (2 * s)) @ w


def nondegeneracy_constant(mu: SpectralMeasure, s: float, resolution: int = 64, rounds: int = 3) -> float:
    """min over sampled omega of  int |omega . theta|^{2s} mu(dtheta).

    A dense angular grid is refined ``rounds`` times by a factor of four
    around the current minimiser.  For atomic measures the directions
    orthogonal to the atoms are added to the sample, so hyperplane-supported
    measures are detected exactly.  The result is an upper bound on the
    infimum.
    """
    if not 0 < s < 1:
        raise ValueError("s must lie in (0, 1)")
    if resolution < 64:
        raise ValueError("resolution must be at least 64 directions")
    quad_res = max(4096, 16 * resolution)
    d = mu.dim
    if d == 1:
        return float(_directional_moment(mu, s, np.array([[1.0]]), quad_res)[0])

    if d == 2:
        def omega(phi):
            phi = np.atleast_1d(phi)
            return np.column_stack([np.cos(phi), np.sin(phi)])

        h = np.pi / resolution
        phi = np.arange(resolution) * h
        vals = _directional_moment(mu, s, omega(phi), quad_res)
        best_phi, best = float(phi[np.argmin(vals)]), float(vals.min())
        for _ in range(rounds):
            grid = best_phi + np.linspace(-h, h, 9)
            vals = _directional_moment(mu, s, omega(grid), quad_res)
            k = int(np.argmin(vals))
            if vals[k] < best:
                best_phi, best = float(grid[k]), float(vals[k])
            h /= 4
        if mu.kind == "atomic":
            perp = np.column_stack([-mu.directions[:, 1], mu.directions[:, 0]])
            best = min(best, float(_directional_moment(mu, s, perp, quad_res).min()))
        return best

    def omega3(a, b):
        a, b = np.broadcast_arrays(np.atleast_1d(a), np.atleast_1d(b))
        return np.column_stack([np.sin(a) * np.cos(b), np.sin(a) * np.sin(b), np.cos(a)]).reshape(-1, 3)

    # upper hemisphere suffices by symmetry
    ha, hb = 0.5 * np.pi / resolution, 2 * np.pi / resolution
    aa, bb = np.meshgrid(np.arange(resolution + 1) * ha, np.arange(resolution) * hb, indexing="ij")
    vals = _directional_moment(mu, s, omega3(aa.ravel(), bb.ravel()), quad_res)
    k = int(np.argmin(vals))
    ba, bb_, best = float(aa.ravel()[k]), float(bb.ravel()[k]), float(vals[k])
    for _ in range(rounds):
        ga, gb = np.meshgrid(ba + np.linspace(-ha, ha, 9), bb_ + np.linspace(-hb, hb, 9), indexing="ij")
        vals = _directional_moment(mu, s, omega3(ga.ravel(), gb.ravel()), quad_res)
        k = int(np.argmin(vals))
        if vals[k] < best:
            ba, bb_, best = float(ga.ravel()[k]), float(gb.ravel()[k]), float(vals[k])
        ha, hb = ha / 4, hb / 4
    if mu.kind == "atomic":
        cands = []
        dirs = mu.directions
        for i in range(len(dirs)):
            for j in range(i + 1, len(dirs)):
                c = np.cross(dirs[i], dirs[j])
                if np.linalg.norm(c) > 1e-12:
                    cands.append(c / np.linalg.norm(c))
            e = np.eye(3)[np.argmin(np.abs(dirs[i]))]
            c = np.cross(dirs[i], e)
            cands.append(c / np.linalg.norm(c))
        best = min(best, float(_directional_moment(mu, s, np.asarray(cands), quad_res).min()))
    return best


# }}}


# {{{ Levy measure


@dataclass(frozen=True)
class LevyMeasure:
    spectral: SpectralMeasure
    s: float

    def __post_init__(self) -> None:
        if not 0 < self.s < 1:
            raise ValueError("s must lie in (0, 1)")

    def radial_density(self, r: Any) -> np.ndarray:
        return np.abs(np.asarray(r, dtype=float)) ** (-1 - 2 * self.s)

    def box_measure(self, lo: Any, hi: Any, resolution: int | None = None) -> float:
        """nu of the open box prod (lo_i, hi_i); the box must avoid the origin."""
        lo, hi = np.asarray(lo, dtype=float), np.asarray(hi, dtype=float)
        if np.all(lo < 0) and np.all(hi > 0):
            return math.inf
        dirs, w = self.spectral.nodes(resolution)
        total = 0.0
        a = 2 * self.s
        for th, wt in zip(dirs, w):
            rlo, rhi = -math.inf, math.inf
            empty = False
            for k in range(len(th)):
                if abs(th[k]) < 1e-300:
                    if not lo[k] < 0 < hi[k]:
                        empty = True
                    continue
                r1, r2 = lo[k] / th[k], hi[k] / th[k]
                rlo, rhi = max(rlo, min(r1, r2)), min(rhi, max(r1, r2))
            if empty or rhi <= rlo:
                continue
            # the chord does not contain r = 0 since the box avoids the origin
            p, q = sorted((abs(rlo), abs(rhi)))
            if p == 0.0:
                return math.inf
            total += wt * ((p ** (-a) - (q ** (-a) if math.isfinite(q) else 0.0)) / a)
        return total


class ScalingIdentity(NamedTuple):
    lhs: float
    rhs: float

    @property
    def rel_gap(self) -> float:
        return abs(self.lhs - self.rhs) / abs(self.rhs)


def levy_scaling_identity(levy: LevyMeasure, t: float, tol: float = 1e-10) -> ScalingIdentity:
    """Quadrature of int (t ^ |z|)^2 nu(dz) against its closed form."""
    if not t > 0:
        raise ValueError("t must be positive")
    s = levy.s
    dirs, w = levy.spectral.nodes()
    # the radial profile is direction independent; integrate it once per
    # half line, split where the minimum switches
    inner, e1 = integrate.quad(lambda r: r * r * r ** (-1 - 2 * s), 0.0, t, epsabs=0, epsrel=1e-13, limit=200)
    outer, e2 = integrate.quad(
        lambda r: t * t * r ** (-1 - 2 * s), t, math.inf, epsabs=0, epsrel=1e-13, limit=200
    )
    radial = 2.0 * (inner + outer)
    lhs = float(np.sum(w) * radial)
    rhs = levy.spectral.total_mass() * t ** (2 - 2 * s) * (1 / (1 - s) + 1 / s)
    if 2.0 * (e1 + e2) > tol * abs(radial):
        raise ToleranceError("radial quadrature did not converge", achieved=2.0 * (e1 + e2) / abs(radial))
    return ScalingIdentity(lhs, rhs)


# }}}


# {{{ tail weight


def _tail_antiderivative(r: float, s: float) -> float:
    """F with F' = (1+|r|)^{-1-2s}, F(0) = 0."""
    if math.isinf(r):
        return math.copysign(1.0 / (2 * s), r)
    return math.copysign((1.0 - (1.0 + abs(r)) ** (-2 * s)) / (2 * s), r)


@dataclass(frozen=True)
class TailWeight:
    levy: LevyMeasure
    domain: Domain
    angular_nodes: int = 96

    def chord_weight(self, x: np.ndarray, theta: np.ndarray) -> float:
        ch = self.domain.chord(x, theta)
        if ch is None:
            return 0.0
        s = self.levy.s
        return _tail_antiderivative(ch[1], s) - _tail_antiderivative(ch[0], s)

    def _continuous_2d(self, x: np.ndarray) -> float:
        mu = self.levy.spectral
        dens = mu._density
        c, rad = self.domain.bounding_ball()
        off = c - x
        dist = float(np.linalg.norm(off))
        n = self.angular_nodes
        if dist <= rad * (1 + 1e-12):
            phi = 2 * np.pi * np.arange(n) / n
            dirs = np.column_stack([np.cos(phi), np.sin(phi)])
            w = dens(dirs) * (2 * np.pi / n)
            return float(sum(wi * self.chord_weight(x, th) for th, wi in zip(dirs, w)))
        # only directions inside the cone over the bounding circle (and their
        # antipodes) meet the domain; the substitution absorbs the square-root
        # behaviour of the chord length at the cone edge
        phic = math.atan2(off[1], off[0])
        half = math.asin(rad / dist)
        t, wt = roots_legendre(n)
        phi = phic + half * np.sin(0.5 * np.pi * t)
        jac = half * 0.5 * np.pi * np.cos(0.5 * np.pi * t) * wt
        total = 0.0
        for sign in (1.0, -1.0):
            dirs = sign * np.column_stack([np.cos(phi), np.sin(phi)])
            w = dens(dirs) * jac
            total += sum(wi * self.chord_weight(x, th) for th, wi in zip(dirs, w))
        return float(total)

    def __call__(self, x: Any) -> np.ndarray:
        mu = self.levy.spectral
        pts = as_points(x, self.domain.dim)
        out = np.empty(len(pts))
        use_nodes = mu.kind == "atomic" or mu.dim in (1, 3)
        if use_nodes:
            dirs, w = mu.nodes(self.angular_nodes if mu.dim == 3 else None)
        for k, p in enumerate(pts):
            if use_nodes:
                out[k] = sum(wi * self.chord_weight(p, th) for th, wi in zip(dirs, w))
            else:
                out[k] = self._continuous_2d(p)
        return out


def tail_weight_at(tw: TailWeight, x: Any) -> float | np.ndarray:
    v = tw(x)
    single = np.ndim(x) == 0 or (tw.domain.dim > 1 and np.ndim(x) == 1)
    return float(v[0]) if single else v


class TailNorm(NamedTuple):
    value: float
    tail_estimate: float
    radius: float


def tail_norm(
    u, tw: TailWeight, rel_shell: float = 1e-6, max_doublings: int = 40, epsrel: float = 1e-8
) -> TailNorm:
    """int |u| nu_star over R^d.

    Functions that vanish outside a bounded region are integrated over that
    region.  Otherwise balls of doubling radius are added until the last
    shell contributes less than ``rel_shell`` of the running total.
    """
    dim = tw.domain.dim

    def f(p: np.ndarray) -> np.ndarray:
        return np.abs(u.evaluate_points(p)) * tw(p)

    if u.vanishes_outside_region():
        val, err = integrate_over(u.region, f, epsrel=epsrel, epsabs=1e-13)
        return TailNorm(val, err, u.region.bounding_ball()[1])
    if u.region is not None and u.extension_support is not None and u.far_value is None:
        # exterior data lives on a bounded set: two bounded integrals
        region = u.region
        val, err = integrate_over(region, f, epsrel=epsrel, epsabs=1e-13)
        outside = lambda p: f(p) * ~region.contains(p)
        ext, err2 = integrate_over(u.extension_support, outside, epsrel=epsrel, epsabs=1e-13)
        c, r = u.extension_support.bounding_ball()
        return TailNorm(val + ext, err + err2, max(region.bounding_ball()[1], float(np.linalg.norm(c)) + r))

    c, rad = tw.domain.bounding_ball()
    radius = max(1.0, float(np.linalg.norm(c)) + rad)
    if u.region is not None:
        rc, rr = u.region.bounding_ball()
        radius = max(radius, float(np.linalg.norm(rc)) + rr)
    if u.far_radius is not None:
        radius = max(radius, u.far_radius)

    def shell(r0: float, r1: float) -> float:
        if dim == 1:
            g = lambda t: float(f(np.array([t]))[0])
            a = integrate.quad(g, r0, r1, epsrel=epsrel, limit=200)[0]
            b = integrate.quad(g, -r1, -r0, epsrel=epsrel, limit=200)[0]
            return a + b
        if dim != 2:
            raise NotImplementedError("tail_norm supports d = 1, 2")

        def ring(phi: float) -> float:
            e = np.array([math.cos(phi), math.sin(phi)])
            return integrate.quad(lambda r: r * float(f((r * e)[None, :])[0]), r0, r1, epsrel=epsrel, limit=100)[0]

        return integrate.quad(ring, 0.0, 2 * np.pi, epsrel=epsrel, limit=100)[0]

    core = Ball(tuple([0.0] * dim), radius) if dim > 1 else None
    if dim == 1:
        total = integrate.quad(lambda t: float(f(np.array([t]))[0]), -radius, radius, epsrel=epsrel, limit=400)[0]
    else:
        total = integrate_over(core, f, epsrel=epsrel)[0]
    last = math.inf
    for _ in range(max_doublings):
        last = shell(radius, 2 * radius)
        total += last
        radius *= 2
        if last <= rel_shell * abs(total):
            return TailNorm(total, last, radius)
    raise DivergentNormError(f"tail norm still growing at radius {radius:g} (last shell {last:.3e})")


# }}}
