"""The stable operator A_s: pointwise and truncated evaluation, pairing, energy.

Every evaluation is a sum over directions theta of a symmetrised radial
integral.  Along each ray the integrand's breakpoints come from the
function metadata (region chord, knots, far field) and are resolved by
composite Gauss rules with Jacobi end weights.  Node sets never depend on
function values, so the evaluation is exactly linear in ``u`` whenever the
metadata agrees.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, NamedTuple

import numpy as np

from .errors import (
    DivergentNormError,
    IntegrabilityError,
    InvalidMeasureError,
    RegularityError,
    TruncationError,
)
from .functions import SampledFunction
from .geometry import Domain, Interval, as_points, domain_rule
from .quadrature import QuadratureConfig, composite_rule, panel_rule, split_segments
from .spectral import LevyMeasure, SpectralMeasure, TailWeight, tail_norm


@dataclass(frozen=True)
class StableOperator:
    s: float
    mu: SpectralMeasure
    quad: QuadratureConfig = field(default_factory=QuadratureConfig)

    def __post_init__(self) -> None:
        if not 0 < self.s < 1:
            raise ValueError(f"s must lie strictly inside (0, 1), got {self.s}")

    @property
    def dim(self) -> int:
        return self.mu.dim

    @property
    def levy(self) -> LevyMeasure:
        return LevyMeasure(self.mu, self.s)

    def directions(self) -> tuple[np.ndarray, np.ndarray]:
        return self.mu.folded_nodes(self.quad.angular_nodes)

    def with_quad(self, quad: QuadratureConfig) -> "StableOperator":
        return StableOperator(self.s, self.mu, quad)

    @property
    def line_mass(self) -> float:
        """In d = 1 every symmetric measure acts as this multiple of |r|^{-1-2s}."""
        if self.dim != 1:
            raise InvalidMeasureError("line_mass is defined for d = 1")
        return self.mu.total_mass()


class Evaluation(NamedTuple):
    value: float
    error: float


# {{{ rays


@dataclass
class _Ray:
    """Breakpoint data of u along the line x + r theta, r in R."""

    cuts: list[tuple[float, float, float]]
    support: list[tuple[float, float]] | None  # None: possibly nonzero everywhere
    far: float | None  # |r| beyond which u equals far_value
    hard: list[float]  # breakpoints where u loses smoothness


def _chord(dom: Domain, x: np.ndarray, th: np.ndarray) -> tuple[float, float] | None:
    return dom.chord(x, th)


def _ray(u: SampledFunction, x: np.ndarray, th: np.ndarray) -> _Ray:
    cuts: list[tuple[float, float, float]] = []
    support: list[tuple[float, float]] = []
    hard: list[float] = []
    if u.region is not None:
        ch = _chord(u.region, x, th)
        if ch is not None:
            b = u.edge_exponent
            cuts += [(ch[0], 0.0, b), (ch[1], b, 0.0)]
            support.append(ch)
            if not u.flat_edges:
                hard += list(ch)
    if u.dim == 1 and u.knots:
        for k in u.knots:
            cuts.append(((k - x[0]) / th[0], 0.0, 0.0))
            hard.append(cuts[-1][0])
    if u.extension_support is not None:
        ch = _chord(u.extension_support, x, th)
        if ch is not None:
            cuts += [(ch[0], 0.0, 0.0), (ch[1], 0.0, 0.0)]
            support.append(ch)
            hard += list(ch)
    far = None
    if u.far_radius is not None:
        far = u.far_radius + float(np.linalg.norm(x))
        cuts += [(far, 0.0, 0.0), (-far, 0.0, 0.0)]
    # the support is known along the ray only when everything outside the
    # region (and the declared extension support) vanishes
    nonzero_far = u.far_value not in (None, 0.0)
    known = u.region is not None and not nonzero_far and (u.zero_extension or u.extension_support is not None)
    return _Ray(sorted(cuts), support if known else None, far, hard)


def _one_sided(
    u: SampledFunction, x: np.ndarray, th: np.ndarray, ray: _Ray, start: float, s: float, q: QuadratureConfig
) -> float:
    """int_start^inf u(x + rho th) rho^{-1-2s} d rho, with ``ray`` given along +th."""
    if ray.support is not None:
        pieces = [(max(a, start), b) for a, b in ray.support if b > start]
        if not pieces:
            return 0.0
        lo = min(p[0] for p in pieces)
        hi = max(p[1] for p in pieces)
        tail = 0.0
    elif ray.far is not None:
        lo, hi = start, max(start, ray.far)
        tail = u.far_value * hi ** (-2 * s) / (2 * s)
    else:
        lo, hi = start, max(start, q.truncation_radius)
        end = u.evaluate_points((x + hi * th)[None, :])[0]
        tail = 0.0
        est = abs(end) * hi ** (-2 * s) / (2 * s)
        if est > q.abs_tol:
            raise TruncationError(
                f"ray tail estimate {est:.2e} exceeds abs_tol at R={hi:g}", achieved=est
            )
    if hi <= lo:
        return tail
    segs = split_segments(lo, hi, [c for c in ray.cuts if c[0] > start - 1e-300])
    if lo > start and ray.support is not None:
        # lo is a chord end; carry its exponent
        for c in ray.cuts:
            if abs(c[0] - lo) <= 1e-12 * max(1.0, abs(lo)):
                segs[0] = type(segs[0])(segs[0].lo, segs[0].hi, c[2], segs[0].hi_exp)
    sing = [c[0] for c in ray.cuts] + [0.0]
    rho, w = composite_rule(segs, sing, q.order, max_len=_panel_cap(u))
    if rho.size == 0:
        return tail
    vals = u.evaluate_points(x[None, :] + rho[:, None] * th[None, :])
    return float(w @ (vals * rho ** (-1 - 2 * s))) + tail


def _flip(ray: _Ray) -> _Ray:
    cuts = sorted((-p, r, l) for p, l, r in ray.cuts)
    support = None if ray.support is None else [(-b, -a) for a, b in ray.support]
    return _Ray(cuts, support, ray.far, [-h for h in ray.hard])


# }}}


# {{{ pointwise and truncated evaluation


def _panel_cap(u: SampledFunction) -> float:
    return math.inf if u.length_scale is None else 0.2 * u.length_scale


def _inner_cutoff(u: SampledFunction, ray: _Ray, q: QuadratureConfig, x: np.ndarray) -> float:
    if q.inner_cutoff is not None:
        return q.inner_cutoff
    nearest = min((abs(h) for h in ray.hard), default=math.inf)
    if nearest < 1e-12:
        raise RegularityError(f"x={x.tolist()} sits on a breakpoint of u")
    # flat edges are smooth but not analytic; keep the Jacobi panel off them too
    nearest = min([nearest] + [abs(c[0]) for c in ray.cuts])
    return max(min(0.5 * nearest, _panel_cap(u), 1.0), q.inner_floor)


def _pointwise(op: StableOperator, u: SampledFunction, x: np.ndarray, q: QuadratureConfig) -> float:
    s = op.s
    dirs, wts = op.directions()
    ux = float(u.evaluate_points(x[None, :])[0])
    inner_exp = 1.0 - 2 * s if u.smoothness == "C2" else -2 * s
    total = 0.0
    for th, w in zip(dirs, wts):
        ray = _ray(u, x, th)
        delta = _inner_cutoff(u, ray, q, x)
        rho, rw = panel_rule(0.0, delta, q.order, left_exp=inner_exp)
        plus = u.evaluate_points(x[None, :] + rho[:, None] * th[None, :])
        minus = u.evaluate_points(x[None, :] - rho[:, None] * th[None, :])
        inner = float(rw @ ((2 * ux - plus - minus) * rho ** (-1 - 2 * s)))
        outer = ux * delta ** (-2 * s) / s
        outer -= _one_sided(u, x, th, ray, delta, s, q)
        outer -= _one_sided(u, x, -th, _flip(ray), delta, s, q)
        total += w * (inner + outer)
    return total


def _check_regular(op: StableOperator, u: SampledFunction) -> None:
    if u.smoothness == "C0":
        raise RegularityError(f"{u.name} is tagged C0; the principal value is refused")
    if u.smoothness == "C1" and op.s >= 0.5:
        raise RegularityError(f"{u.name} is tagged C1, which needs s < 1/2")


def _map_points(fn, pts: np.ndarray, threads: int) -> np.ndarray:
    if threads <= 1 or len(pts) < 2:
        return np.array([fn(p) for p in pts])
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return np.array(list(pool.map(fn, pts)))


def _shape_out(x: Any, dim: int, vals: np.ndarray):
    single = np.ndim(x) == 0 or (dim > 1 and np.ndim(x) == 1)
    return float(vals[0]) if single else vals


def apply_pointwise(op: StableOperator, u: SampledFunction, x: Any, threads: int = 1):
    """A_s u(x) by the double-difference representation."""
    _check_regular(op, u)
    pts = as_points(x, op.dim)
    vals = _map_points(lambda p: _pointwise(op, u, p, op.quad), pts, threads)
    return _shape_out(x, op.dim, vals)


def apply_pointwise_with_error(op: StableOperator, u: SampledFunction, x: Any, threads: int = 1) -> list[Evaluation]:
    """Values plus the gap to the same rule at half the per-panel order."""
    _check_regular(op, u)
    pts = as_points(x, op.dim)
    coarse = op.quad.coarser()
    out = []
    for p in pts:
        fine = _pointwise(op, u, p, op.quad)
        out.append(Evaluation(fine, abs(fine - _pointwise(op, u, p, coarse))))
    return out


def _truncated(op: StableOperator, u: SampledFunction, x: np.ndarray, kappa: float) -> float:
    s = op.s
    q = op.quad
    dirs, wts = op.directions()
    ux = float(u.evaluate_points(x[None, :])[0])
    total = 0.0
    for th, w in zip(dirs, wts):
        ray = _ray(u, x, th)
        val = ux * kappa ** (-2 * s) / s
        val -= _one_sided(u, x, th, ray, kappa, s, q)
        val -= _one_sided(u, x, -th, _flip(ray), kappa, s, q)
        total += w * val
    return total


def apply_truncated(op: StableOperator, u: SampledFunction, x: Any, kappa: float, threads: int = 1):
    """A_s^kappa u(x): the operator with jumps shorter than kappa removed."""
    if not kappa > 0:
        raise ValueError("kappa must be positive")
    pts = as_points(x, op.dim)
    vals = _map_points(lambda p: _truncated(op, u, p, kappa), pts, threads)
    return _shape_out(x, op.dim, vals)


# }}}


# {{{ pairing


def _support_inside(eta: SampledFunction, domain: Domain) -> None:
    if not eta.vanishes_outside(domain):
        raise ValueError(f"{eta.name} must vanish outside the domain")
    if eta.smoothness != "C2":
        raise RegularityError("test functions must be tagged C2")


def _check_integrable(u: SampledFunction, op: StableOperator, domain: Domain) -> None:
    if u.vanishes_outside_region() or u.far_value is not None:
        return
    try:
        tail_norm(u, TailWeight(op.levy, domain))
    except DivergentNormError as exc:
        raise IntegrabilityError(f"{u.name} is not in the tail space: {exc}") from exc


def _line_rule(
    lo: float, hi: float, cuts: list[tuple[float, float, float]], sing: list[float], order: int, max_len: float
) -> tuple[np.ndarray, np.ndarray]:
    segs = split_segments(lo, hi, cuts)
    return composite_rule(segs, sing, order, max_len=max_len)


def pairing(
    u: SampledFunction, eta: SampledFunction, op: StableOperator, domain: Domain, threads: int = 1
) -> float:
    """(u, A_s eta) over R^d for eta compactly supported in the domain."""
    _support_inside(eta, domain)
    _check_integrable(u, op, domain)
    q = op.quad
    if op.dim == 1:
        return _pairing_1d(u, eta, op, domain, threads)
    if op.dim != 2:
        raise NotImplementedError("pairing supports d = 1, 2")
    if not (u.vanishes_outside(domain) or u.extension_support is not None) or u.far_value is not None:
        raise NotImplementedError("in d = 2 the exterior part of u must live on extension_support")
    total = 0.0
    parts = [domain] + ([u.extension_support] if u.extension_support is not None else [])
    for part in parts:
        pts, w = domain_rule(part, order=q.order // 2)
        a_eta = apply_pointwise(op, eta, pts, threads=threads)
        total += float(w @ (u.evaluate_points(pts) * a_eta))
    return total


def _pairing_1d(u, eta, op, domain, threads) -> float:
    q = op.quad
    s = op.s
    c, r = domain.bounding_ball()
    a, b = c[0] - r, c[0] + r
    ec, er = eta.region.bounding_ball()
    width = er
    sing = [cc[0] for cc in u.cuts_1d()]
    # A_s eta inherits the non-analytic flatness of eta at its support ends:
    # panels of a fifth of the width across the support, doubling outside
    lo_e, hi_e = ec[0] - er, ec[0] + er
    h0 = width / 5
    marks = list(np.linspace(lo_e, hi_e, 11))
    step = h0
    while lo_e - step > a or hi_e + step < b:
        marks += [lo_e - step, hi_e + step]
        step *= 2
    cuts = u.cuts_1d() + [(m, 0.0, 0.0) for m in marks]
    y, w = _line_rule(a, b, cuts, sing, q.order, max_len=math.inf)
    total = float(w @ (u.evaluate_points(y[:, None]) * apply_pointwise(op, eta, y, threads=threads)))
    if u.vanishes_outside(domain):
        return total
    # exterior: numerically up to the far field, exact beyond it
    sup = u.bounded_support()
    if sup is not None:
        left, right = sup
    elif u.far_radius is not None:
        left, right = -u.far_radius, u.far_radius
    else:
        raise IntegrabilityError("exterior of u needs a bounded support or a far field")
    for lo, hi in ((min(left, a), a), (b, max(right, b))):
        if hi > lo:
            y, w = _line_rule(lo, hi, cuts, sing, q.order, max_len=math.inf)
            total += float(w @ (u.evaluate_points(y[:, None]) * apply_pointwise(op, eta, y, threads=threads)))
    if u.far_value not in (None, 0.0):
        big_f = u.far_radius
        y, w = _line_rule(ec[0] - er, ec[0] + er, [], [], q.order, max_len=width / 4)
        profile = ((big_f - y) ** (-2 * s) + (big_f + y) ** (-2 * s)) / (2 * s)
        total -= u.far_value * op.line_mass * float(w @ (eta.evaluate_points(y[:, None]) * profile))
    return total


# }}}


# {{{ energy


def _kappa_weight(x: np.ndarray, a: float, b: float, s: float) -> np.ndarray:
    """int over the complement of (a, b) of |x - y|^{-1-2s} dy."""
    return ((x - a) ** (-2 * s) + (b - x) ** (-2 * s)) / (2 * s)


def _exterior_integral(op: StableOperator, u: SampledFunction, x: float, a: float, b: float) -> float:
    """int over the complement of (a, b) of u(y)|x - y|^{-1-2s} dy, for x in (a, b)."""
    xv = np.array([x])
    th = np.array([1.0])
    ray = _ray(u, xv, th)
    return _one_sided(u, xv, th, ray, b - x, op.s, op.quad) + _one_sided(
        u, xv, -th, _flip(ray), x - a, op.s, op.quad
    )


def energy(u: SampledFunction, v: SampledFunction, op: StableOperator, domain: Domain) -> float:
    """E(u, v) = 1/2 iint over (Omega^c x Omega^c)^c of (u(x)-u(y))(v(x)-v(y)) nu(x-y).

    One argument must vanish outside the domain.  One-dimensional only.
    """
    if op.dim != 1:
        raise NotImplementedError("energy assembly is one-dimensional")
    if not isinstance(domain, Interval):
        c, r = domain.bounding_ball()
        domain = Interval(c[0] - r, c[0] + r)
    u_in, v_in = u.vanishes_outside(domain), v.vanishes_outside(domain)
    if not (u_in or v_in):
        raise ValueError("energy needs one argument that vanishes outside the domain")
    s, q = op.s, op.quad
    a, b = domain.a, domain.b
    length = b - a
    cuts = sorted({c for c in u.breakpoints_1d() + v.breakpoints_1d() if a < c < b} | {a, b})
    gaps = np.diff(cuts)
    scale = float(gaps.min())

    # Omega x Omega part as 2 int_0^L G(w) w^{-1-2s} dw
    wcuts = sorted({abs(p - r) for p in cuts for r in cuts if 0 < abs(p - r) < length})
    w0 = min(scale, min(wcuts, default=scale)) / 8
    w_nodes, w_wts = [], []
    t, tw = panel_rule(0.0, w0, q.order, left_exp=1.0 - 2 * s)
    w_nodes.append(t)
    w_wts.append(tw)
    edges = [w0]
    while edges[-1] < length:
        edges.append(min(2 * edges[-1], length))
    edges = sorted(set(edges) | {c for c in wcuts if c > w0})
    for p, r in zip(edges[:-1], edges[1:]):
        t, tw = panel_rule(p, r, q.order)
        w_nodes.append(t)
        w_wts.append(tw)
    w_nodes = np.concatenate(w_nodes)
    w_wts = np.concatenate(w_wts)

    xcuts_base = [(c, 0.0, 0.0) for c in cuts]
    g = np.empty(len(w_nodes))
    for k, wv in enumerate(w_nodes):
        xc = xcuts_base + [(c - wv, 0.0, 0.0) for c in cuts]
        x, xw = _line_rule(a, b - wv, xc, [], q.order, max_len=scale / 2)
        du = u.evaluate_points(x[:, None]) - u.evaluate_points((x + wv)[:, None])
        dv = v.evaluate_points(x[:, None]) - v.evaluate_points((x + wv)[:, None])
        g[k] = xw @ (du * dv)
    e_in = 2.0 * float(w_wts @ (g * w_nodes ** (-1 - 2 * s)))

    # Omega x Omega^c (twice, by symmetry)
    if u_in and v_in:
        lead, other = u, v
    elif v_in:
        lead, other = v, u
    else:
        lead, other = u, v
    def end_exponent(end: float) -> float:
        # the kappa weight blows up like dist^{-2s}; it only matters where
        # the leading factor reaches the boundary
        if lead.region is None or end not in lead.breakpoints_1d():
            return 0.0
        e = -2 * s + lead.edge_exponent
        if other.region is not None and end in other.breakpoints_1d():
            e += other.edge_exponent
        return e

    segs = split_segments(a, b, [(c, 0.0, 0.0) for c in cuts], end_exponent(a), end_exponent(b))
    x, xw = composite_rule(segs, cuts, q.order, max_len=scale / 2)
    lv = lead.evaluate_points(x[:, None])
    ov = other.evaluate_points(x[:, None])
    integrand = lv * ov * _kappa_weight(x, a, b, s)
    if not (u_in and v_in):
        ext = np.array([_exterior_integral(op, other, xi, a, b) for xi in x])
        integrand = integrand - lv * ext
    e_out = 2.0 * float(xw @ integrand)
    return 0.5 * op.line_mass * (e_in + e_out)


# }}}


# {{{ L-infinity probe


class LinfProbe(NamedTuple):
    sup_operator: float
    holder_norm: float

    @property
    def ratio(self) -> float:
        return self.sup_operator / self.holder_norm if self.holder_norm > 0 else 0.0


def _sampled_holder(vals: np.ndarray, h: float, gamma: float, max_lag: int = 64) -> float:
    best = 0.0
    for lag in range(1, min(max_lag, len(vals) - 1) + 1):
        d = np.abs(vals[lag:] - vals[:-lag]).max()
        best = max(best, d / (lag * h) ** gamma)
    return best


def linf_bound_probe(
    op: StableOperator, phi: SampledFunction, domain: Domain, alpha: float = 0.1, samples: int = 201
) -> LinfProbe:
    """sup over the domain of |A_s phi| and a sampled C^{2s+alpha} norm of phi (d = 1)."""
    if op.dim != 1:
        raise NotImplementedError("linf_bound_probe is one-dimensional")
    c, r = domain.bounding_ball()
    x = np.linspace(c[0] - r, c[0] + r, samples)[1:-1]
    vals = phi.evaluate_points(x[:, None])
    if not np.any(vals):
        return LinfProbe(0.0, 0.0)
    sup_a = float(np.max(np.abs(apply_pointwise(op, phi, x))))
    fine = np.linspace(c[0] - r, c[0] + r, 8 * samples + 1)
    h = fine[1] - fine[0]
    fv = phi.evaluate_points(fine[:, None])
    gamma = 2 * op.s + alpha
    norm = float(np.abs(fv).max())
    if gamma <= 1:
        norm += _sampled_holder(fv, h, gamma)
    else:
        grad = np.gradient(fv, h)
        norm += float(np.abs(grad).max()) + _sampled_holder(grad, h, gamma - 1)
    return LinfProbe(sup_a, norm)


# }}}
