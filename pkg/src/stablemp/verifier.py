"""Numerical checks of the weak maximum principle for A_s.

Given u on R^d, an operator A_s and a domain the verifier measures

* the subsolution property (u, A_s eta) <= 0 against a finite family of
  nonnegative bumps compactly supported in the domain,
* the exterior sign u <= 0 outside the domain,
* the boundary functional eps^{-s} int_{dist < eps} u+ along a ladder,
* the conclusion sup u+ over an interior grid.

Whenever the three hypotheses pass the conclusion has to hold as well; a
violation marks the report as inconsistent (it points at quadrature
trouble, never at a counterexample).  The universally quantified
subsolution condition can only be tested on finitely many bumps, so a pass
is a necessary-condition pass.

``pipeline_replay`` reruns the Green function approximation on a ladder of
subdomains, and ``classical_mp_check`` is the analogue for the Laplacian
with sphere averages instead of pairings.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field, replace
from typing import Any

import numpy as np
from scipy.optimize import brentq

from .errors import IntegrabilityError
from .functions import SampledFunction, bump
from .geometry import (
    Ball,
    ConvexPolygon,
    Domain,
    Exhaustion,
    Interval,
    Mollifier,
    as_points,
    convolved_distance_bound,
    domain_rule,
    mollify,
)
from .operator import StableOperator, apply_pointwise, pairing
from .quadrature import composite_rule, gauss_legendre, split_segments
from .solver import DiscreteSolution, holder_seminorm, solve_dirichlet

log = logging.getLogger(__name__)

PASS, FAIL, INCONCLUSIVE = "pass", "fail", "inconclusive"


@dataclass(frozen=True)
class VerifierConfig:
    ladder: tuple[float, ...] = (0.1, 0.05, 0.025, 0.0125)
    delta: float = 0.0
    n_centers: int = 5
    width_fractions: tuple[float, ...] = (0.15, 0.3, 0.5, 0.7, 0.9)
    pairing_rel_tol: float = 1e-6
    decay_factor: float = 0.1
    ladder_rel_tol: float = 1e-6
    conclusion_rel_tol: float = 1e-8
    conclusion_points: int = 401
    exterior_samples: int = 64
    check_positive_part: bool = False
    threads: int = 1


@dataclass(frozen=True)
class CheckResult:
    name: str
    verdict: str
    measured: float
    threshold: float
    count: int
    values: tuple[float, ...] = ()
    skipped: int = 0

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class LadderResult:
    exponent: float
    eps: tuple[float, ...]
    values: tuple[float, ...]
    verdict: str
    threshold: float

    @property
    def ratio(self) -> float:
        first, last = self.values[0], self.values[-1]
        if first == 0:
            return 0.0 if last == 0 else math.inf
        return last / first

    def to_dict(self) -> dict:
        d = asdict(self)
        d["ratio"] = self.ratio
        return d


@dataclass(frozen=True)
class HypothesisReport:
    subject: str
    mode: str
    ultrasubharmonic: CheckResult
    exterior_sign: CheckResult | None
    boundary_functional: LadderResult
    conclusion: CheckResult
    positive_part: CheckResult | None = None
    meta: dict = field(default_factory=dict)

    @property
    def verdicts(self) -> dict[str, str]:
        out = {"ultrasubharmonic": self.ultrasubharmonic.verdict}
        if self.exterior_sign is not None:
            out["exterior_sign"] = self.exterior_sign.verdict
        out["boundary_functional"] = self.boundary_functional.verdict
        out["conclusion"] = self.conclusion.verdict
        if self.positive_part is not None:
            out["positive_part"] = self.positive_part.verdict
        return out

    @property
    def hypotheses_pass(self) -> bool:
        hyp = [self.ultrasubharmonic.verdict, self.boundary_functional.verdict]
        if self.exterior_sign is not None:
            hyp.append(self.exterior_sign.verdict)
        return all(v == PASS for v in hyp)

    @property
    def consistent(self) -> bool:
        return not (self.hypotheses_pass and self.conclusion.verdict != PASS)

    def to_dict(self) -> dict:
        return {
            "subject": self.subject,
            "mode": self.mode,
            "verdicts": self.verdicts,
            "hypotheses_pass": self.hypotheses_pass,
            "consistent": self.consistent,
            "ultrasubharmonic": self.ultrasubharmonic.to_dict(),
            "exterior_sign": None if self.exterior_sign is None else self.exterior_sign.to_dict(),
            "boundary_functional": self.boundary_functional.to_dict(),
            "conclusion": self.conclusion.to_dict(),
            "positive_part": None if self.positive_part is None else self.positive_part.to_dict(),
            "meta": self.meta,
        }


# {{{ helpers


def _ends(domain: Domain) -> tuple[float, float]:
    c, r = domain.bounding_ball()
    return float(c[0] - r), float(c[0] + r)


def _sign_roots(u: SampledFunction, lo: float, hi: float, scan: int = 801) -> list[float]:
    x = np.linspace(lo, hi, scan)[1:-1]
    v = u.evaluate_points(x[:, None])
    f = lambda t: float(u.evaluate_points(np.array([[t]]))[0])
    roots = []
    for i in np.nonzero(np.sign(v[:-1]) * np.sign(v[1:]) < 0)[0]:
        roots.append(brentq(f, x[i], x[i + 1], xtol=1e-15))
    return roots


def _line_integral(u: SampledFunction, lo: float, hi: float, fn=None, order: int = 16) -> float:
    """int_lo^hi fn(u) (default u+) with edge exponents and sign changes of u as breakpoints."""
    fn = fn or (lambda v: np.maximum(v, 0.0))
    cuts = list(u.cuts_1d())
    for c in cuts:
        if lo - 1e-12 <= c[0] <= hi + 1e-12 and min(c[1], c[2]) <= -1:
            probe = c[0] + (1e-9 if c[2] <= -1 else -1e-9)
            if fn(u.evaluate_points(np.array([[probe]])))[0] > 0:
                raise IntegrabilityError(f"{u.name} is not integrable near {c[0]:g}")
    cuts += [(r, 0.0, 0.0) for r in _sign_roots(u, lo, hi)]
    segs = split_segments(lo, hi, cuts)
    x, w = composite_rule(segs, [c[0] for c in cuts], order, max_len=(hi - lo) / 4)
    return float(w @ fn(u.evaluate_points(x[:, None])))


def _band_rule(domain: Domain, eps: float, order: int = 16) -> tuple[np.ndarray, np.ndarray]:
    """Points and weights for {x in domain : dist(x, boundary) < eps}, d = 2."""
    if isinstance(domain, Ball):
        r0 = max(domain.radius - eps, 0.0)
        rad, wr = composite_rule(split_segments(r0, domain.radius), [], order, max_len=eps / 2)
        n = 4 * order
        phi = 2 * np.pi * np.arange(n) / n
        circ = np.stack([np.cos(phi), np.sin(phi)], -1)
        pts = np.asarray(domain.center) + (rad[:, None, None] * circ[None]).reshape(-1, 2)
        return pts, ((wr * rad)[:, None] * np.full(n, 2 * np.pi / n)[None, :]).ravel()
    if isinstance(domain, ConvexPolygon):
        quads = _polygon_band(domain, eps)
        if quads is not None:
            parts = [_quad_rule(q, order) for q in quads]
            return np.vstack([p for p, _ in parts]), np.concatenate([w for _, w in parts])
    p_out, w_out = domain_rule(domain, order)
    if domain.inradius <= eps:
        return p_out, w_out
    p_in, w_in = domain_rule(domain.thinned(eps), order)
    return np.vstack([p_out, p_in]), np.concatenate([w_out, -w_in])


def _polygon_band(poly: ConvexPolygon, eps: float) -> list[np.ndarray] | None:
    """The band as one quadrilateral per edge, cut along the angle bisectors.

    Returns None once eps is large enough for an inner edge to disappear.
    """
    v = np.asarray(poly.vertices, dtype=float)
    e = np.roll(v, -1, axis=0) - v
    n = np.column_stack([-e[:, 1], e[:, 0]]) / np.linalg.norm(e, axis=1)[:, None]  # inward for CCW
    prev = np.roll(n, 1, axis=0)
    w = v + eps * (n + prev) / (1.0 + np.einsum("ij,ij->i", n, prev))[:, None]
    inner = np.roll(w, -1, axis=0) - w
    if np.any(np.einsum("ij,ij->i", inner, e) <= 0):
        return None
    return [np.array([v[i], v[(i + 1) % len(v)], w[(i + 1) % len(v)], w[i]]) for i in range(len(v))]


def _quad_rule(q: np.ndarray, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss product rule on the bilinear image of the unit square."""
    g, gw = gauss_legendre(order)
    t = 0.5 * (g + 1.0)
    tw = 0.5 * gw
    a, b = np.meshgrid(t, t, indexing="ij")
    wa = np.outer(tw, tw)
    a, b, wa = a.ravel(), b.ravel(), wa.ravel()
    p0, p1, p2, p3 = q
    pts = (
        (1 - a)[:, None] * (1 - b)[:, None] * p0
        + a[:, None] * (1 - b)[:, None] * p1
        + a[:, None] * b[:, None] * p2
        + (1 - a)[:, None] * b[:, None] * p3
    )
    da = (1 - b)[:, None] * (p1 - p0) + b[:, None] * (p2 - p3)
    db = (1 - a)[:, None] * (p3 - p0) + a[:, None] * (p2 - p1)
    jac = np.abs(da[:, 0] * db[:, 1] - da[:, 1] * db[:, 0])
    return pts, wa * jac


def band_integral(u: SampledFunction, domain: Domain, eps: float) -> float:
    """int over the interior band dist < eps of u+."""
    if domain.dim == 1:
        a, b = _ends(domain)
        eps = min(eps, 0.5 * (b - a))
        return _line_integral(u, a, a + eps) + _line_integral(u, b - eps, b)
    pts, w = _band_rule(domain, eps)
    return float(w @ np.maximum(u.evaluate_points(pts), 0.0))


def _l1_over(u: SampledFunction, domain: Domain) -> float:
    if domain.dim == 1:
        return _line_integral(u, *_ends(domain), fn=np.abs)
    pts, w = domain_rule(domain)
    return float(w @ np.abs(u.evaluate_points(pts)))


def interior_grid(domain: Domain, n: int) -> np.ndarray:
    """Points strictly inside the domain, in (n, d) layout."""
    if domain.dim == 1:
        a, b = _ends(domain)
        return np.linspace(a, b, n + 2)[1:-1].reshape(-1, 1)
    lo, hi = domain.bbox()
    k = max(8, int(math.sqrt(n)))
    gx, gy = np.meshgrid(np.linspace(lo[0], hi[0], k + 2)[1:-1], np.linspace(lo[1], hi[1], k + 2)[1:-1])
    pts = np.column_stack([gx.ravel(), gy.ravel()])
    return pts[domain.contains(pts) & (domain.distance_to_boundary(pts) > 0)]


def _exterior_samples(domain: Domain, n: int) -> np.ndarray:
    if domain.dim == 1:
        a, b = _ends(domain)
        t = np.geomspace(1e-6, 10.0, max(n // 2, 1)) * (b - a)
        return np.concatenate([a - t, b + t]).reshape(-1, 1)
    c, r = domain.bounding_ball()
    bd = domain.sample_boundary(max(n // 4, 4))
    out = []
    for f in (1e-6, 0.1, 1.0, 10.0):
        d = bd - c
        out.append(bd + f * r * d / np.maximum(np.linalg.norm(d, axis=1, keepdims=True), 1e-300))
    pts = np.vstack(out)
    return pts[~domain.contains(pts)]


def _subject_scale(u: SampledFunction, domain: Domain) -> float:
    """Mean absolute value over the domain; the unit for relative thresholds."""
    return _l1_over(u, domain) / _measure(domain)


def _rho(domain: Domain) -> float | None:
    # recorded only; None stands for an unbounded exterior ball (convex domains)
    r = float(domain.exterior_ball_radius)
    return None if math.isinf(r) else r


def _measure(domain: Domain) -> float:
    if domain.dim == 1:
        a, b = _ends(domain)
        return b - a
    _, w = domain_rule(domain)
    return float(w.sum())


# }}}


# {{{ test family


def default_family(domain: Domain, n_centers: int = 5, width_fractions=(0.15, 0.3, 0.5, 0.7, 0.9)) -> list[SampledFunction]:
    """Bumps at n_centers points with widths given as fractions of the distance to the boundary."""
    if domain.dim == 1:
        a, b = _ends(domain)
        centers = a + (b - a) * np.arange(1, n_centers + 1) / (n_centers + 1)
        centers = centers.reshape(-1, 1)
    else:
        grid = interior_grid(domain, 441)
        dist = domain.distance_to_boundary(grid)
        keep = grid[dist >= 0.25 * dist.max()]
        chosen = [keep[int(np.argmax(domain.distance_to_boundary(keep)))]]
        while len(chosen) < min(n_centers, len(keep)):
            gap = np.min(np.linalg.norm(keep[:, None, :] - np.asarray(chosen)[None], axis=2), axis=1)
            chosen.append(keep[int(np.argmax(gap))])
        centers = np.asarray(chosen)
    dist = domain.distance_to_boundary(centers)
    fam = []
    for c, d in zip(centers, dist):
        for f in width_fractions:
            fam.append(bump(c if domain.dim > 1 else float(c[0]), f * float(d), dim=domain.dim))
    return fam


# }}}


# {{{ hypothesis checks


def _pairing_check(
    name: str, u: SampledFunction, op: StableOperator, domain: Domain, family, cfg: VerifierConfig
) -> CheckResult:
    if not family:
        raise ValueError("empty test family")
    vals, peaks = [], []
    for eta in family:
        vals.append(pairing(u, eta, op, domain, threads=cfg.threads))
        c, _ = eta.region.bounding_ball()
        peaks.append(abs(float(apply_pointwise(op, eta, c if op.dim > 1 else float(c[0])))))
    tol = cfg.pairing_rel_tol * _l1_over(u, domain) * max(peaks)
    top = max(vals)
    verdict = PASS if top <= tol else (INCONCLUSIVE if top <= 10 * tol else FAIL)
    return CheckResult(name, verdict, float(top), float(tol), len(family), tuple(float(v) for v in vals))


def check_ultrasubharmonic(
    u: SampledFunction, op: StableOperator, domain: Domain, family=None, cfg: VerifierConfig | None = None
) -> CheckResult:
    """max over the family of (u, A_s eta); pass when it stays below the scale-free tolerance."""
    cfg = cfg or VerifierConfig()
    fam = list(family) if family is not None else default_family(domain, cfg.n_centers, cfg.width_fractions)
    return _pairing_check("ultrasubharmonic", u, op, domain, fam, cfg)


def check_positive_part(
    u: SampledFunction, op: StableOperator, domain: Domain, family=None, cfg: VerifierConfig | None = None
) -> CheckResult:
    """Same test applied to u+."""
    cfg = cfg or VerifierConfig()
    fam = list(family) if family is not None else default_family(domain, cfg.n_centers, cfg.width_fractions)
    if _is_nonpositive(u, domain, cfg):
        return CheckResult("positive_part", PASS, 0.0, 0.0, len(fam), tuple(0.0 for _ in fam))
    up = _positive_line(u) if u.dim == 1 else u.positive_part()
    return _pairing_check("positive_part", up, op, domain, fam, cfg)


def _is_nonpositive(u: SampledFunction, domain: Domain, cfg: VerifierConfig) -> bool:
    pts = np.vstack([interior_grid(domain, cfg.conclusion_points), _exterior_samples(domain, cfg.exterior_samples)])
    far_ok = u.far_value is None or u.far_value <= 0
    return bool(far_ok and u.zero_extension and np.all(u.evaluate_points(pts) <= 0))


def check_exterior_sign(u: SampledFunction, domain: Domain, cfg: VerifierConfig | None = None) -> CheckResult:
    """Largest sampled value of u outside the domain; pass when it is <= 0 up to tolerance."""
    cfg = cfg or VerifierConfig()
    pts = _exterior_samples(domain, cfg.exterior_samples)
    vals = u.evaluate_points(pts)
    if u.far_value is not None:
        vals = np.append(vals, u.far_value)
    top = float(vals.max()) if len(vals) else 0.0
    tol = cfg.conclusion_rel_tol * _subject_scale(u, domain)
    return CheckResult("exterior_sign", PASS if top <= tol else FAIL, top, float(tol), len(vals))


def boundary_functional(
    u: SampledFunction,
    domain: Domain,
    s: float,
    ladder=(0.1, 0.05, 0.025, 0.0125),
    delta: float = 0.0,
    cfg: VerifierConfig | None = None,
) -> LadderResult:
    """eps^{-s+delta} int_{dist < eps} u+ along the ladder.

    The verdict is "pass" (the functional tends to zero) when the last value
    drops below ``decay_factor`` times the first one, or below the absolute
    threshold ``ladder_rel_tol`` times the mean of |u| (covers u+ = 0).
    """
    cfg = cfg or VerifierConfig()
    return _ladder(u, domain, s - delta, ladder, cfg)


def _ladder(u: SampledFunction, domain: Domain, exponent: float, ladder, cfg: VerifierConfig) -> LadderResult:
    eps = tuple(float(e) for e in ladder)
    if len(eps) < 2 or any(e <= 0 for e in eps):
        raise ValueError("ladder needs at least two positive widths")
    vals = tuple(e ** (-exponent) * band_integral(u, domain, e) for e in eps)
    if not all(np.isfinite(vals)):
        raise IntegrabilityError("band quadrature returned a non-finite value")
    thr = cfg.ladder_rel_tol * _subject_scale(u, domain)
    decays = vals[-1] <= thr or vals[-1] < cfg.decay_factor * vals[0]
    return LadderResult(exponent, eps, vals, PASS if decays else FAIL, float(thr))


def check_conclusion(u: SampledFunction, domain: Domain, cfg: VerifierConfig | None = None) -> CheckResult:
    cfg = cfg or VerifierConfig()
    pts = interior_grid(domain, cfg.conclusion_points)
    vals = u.evaluate_points(pts)
    top = max(float(vals.max()), 0.0)
    tol = cfg.conclusion_rel_tol * _subject_scale(u, domain)
    return CheckResult("conclusion", PASS if top <= tol else FAIL, top, float(tol), len(pts))


def verify_max_principle(
    u: SampledFunction,
    op: StableOperator,
    domain: Domain,
    cfg: VerifierConfig | None = None,
    family=None,
) -> HypothesisReport:
    cfg = cfg or VerifierConfig()
    fam = list(family) if family is not None else default_family(domain, cfg.n_centers, cfg.width_fractions)
    ultra = check_ultrasubharmonic(u, op, domain, fam, cfg)
    ext = check_exterior_sign(u, domain, cfg)
    ladder = boundary_functional(u, domain, op.s, cfg.ladder, 0.0, cfg)
    concl = check_conclusion(u, domain, cfg)
    pos = None
    if cfg.check_positive_part and ultra.verdict == PASS and ext.verdict == PASS:
        pos = check_positive_part(u, op, domain, fam, cfg)
    report = HypothesisReport(
        u.name,
        "stable",
        ultra,
        ext,
        ladder,
        concl,
        pos,
        {"s": op.s, "measure": op.mu.to_dict(), "domain": domain.to_dict(), "exterior_ball_radius": _rho(domain)},
    )
    if not report.consistent:
        log.error("hypotheses pass but sup u+ = %g exceeds %g for %s", concl.measured, concl.threshold, u.name)
    return report


# }}}


# {{{ pipeline replay


@dataclass(frozen=True)
class TraceStep:
    eps: float
    subdomain: tuple[float, float]
    integral_v_psi: float
    band_integral: float
    remainder_bound: float
    holder_ratio: float
    residual: float


@dataclass(frozen=True)
class PipelineTrace:
    steps: tuple[TraceStep, ...]
    lam: float
    convolved_constant: float
    holder_constant: float
    psi_sup: float
    solutions: tuple[DiscreteSolution, ...] = field(default=(), repr=False, compare=False)

    @property
    def eps(self) -> tuple[float, ...]:
        return tuple(st.eps for st in self.steps)

    def remainder_decays(self, factor: float = 0.1, abs_tol: float = 1e-12) -> bool:
        first, last = self.steps[0].remainder_bound, self.steps[-1].remainder_bound
        return last <= abs_tol or last < factor * first

    def limit_nonpositive(self, abs_tol: float = 1e-10) -> bool:
        return self.steps[-1].integral_v_psi <= abs_tol

    def bound_respected(self, abs_tol: float = 1e-10) -> bool:
        return all(st.integral_v_psi <= st.remainder_bound + abs_tol for st in self.steps)

    def to_dict(self) -> dict:
        return {
            "lam": self.lam,
            "convolved_constant": self.convolved_constant,
            "holder_constant": self.holder_constant,
            "psi_sup": self.psi_sup,
            "remainder_decays": self.remainder_decays(),
            "limit_nonpositive": self.limit_nonpositive(),
            "bound_respected": self.bound_respected(),
            "steps": [asdict(st) for st in self.steps],
        }


def pipeline_replay(
    op: StableOperator,
    domain: Domain,
    u: SampledFunction,
    psi: SampledFunction | None = None,
    ladder=(0.1, 0.05, 0.025, 0.0125),
    n_nodes: int = 129,
) -> PipelineTrace:
    """Green function approximation on the exhaustion D_eps of an interval.

    Per eps: solve A_s phi_eps = psi in D_eps, mollify u+ at scale eps and
    record int v_eps psi next to the remainder bound
    C C_1 |psi|_inf ((1+lam) eps)^{-s} int_{dist < (1+lam) eps} u+,
    where C is the measured convolved distance constant and C_1 the measured
    C^s norm of the solution divided by |psi|_inf on the first subdomain.
    """
    if domain.dim != 1:
        raise NotImplementedError("the replay runs on intervals")
    ladder = tuple(sorted((float(e) for e in ladder), reverse=True))
    ex = Exhaustion(domain)
    a, b = _ends(domain)
    if psi is None:
        psi = bump(0.5 * (a + b), 0.25 * (b - a))
    if not psi.vanishes_outside(ex.at(ladder[0])):
        raise ValueError("psi must be supported in the first subdomain")
    s = op.s
    table = convolved_distance_bound(ex, s, list(ladder))
    conv = table.constant
    sup_pts = np.linspace(a, b, 2001)
    psi_sup = float(np.max(np.abs(psi.evaluate_points(sup_pts[:, None]))))
    pc, pr = psi.region.bounding_ball()
    segs = split_segments(pc[0] - pr, pc[0] + pr)
    y, wy = composite_rule(segs, [], 16, max_len=pr / 5)
    psi_y = psi.evaluate_points(y[:, None])
    nonpositive = u.zero_extension and _is_nonpositive(u, domain, VerifierConfig())
    up = u if nonpositive else _positive_line(u)

    steps, sols = [], []
    c1 = None
    for eps in ladder:
        sub = ex.at(eps)
        sol = solve_dirichlet(op, sub, psi, n_nodes=n_nodes)
        phi = sol.as_function()
        ratio = (float(np.max(np.abs(sol.nodal_values))) + holder_seminorm(phi, sub, s)) / psi_sup
        if c1 is None:
            c1 = ratio
        if nonpositive:
            iv, band = 0.0, 0.0
        else:
            v = mollify(up, Mollifier(eps, 1), y)
            iv = float(wy @ (v * psi_y))
            band = band_integral(u, domain, (1.0 + ex.lam) * eps)
        bound = conv * c1 * psi_sup * ((1.0 + ex.lam) * eps) ** (-s) * band
        sa, sb = _ends(sub)
        steps.append(TraceStep(eps, (sa, sb), iv, band, bound, ratio, sol.residual))
        sols.append(sol)
        log.info("eps=%g int v psi=%.6g bound=%.6g", eps, iv, bound)
    return PipelineTrace(tuple(steps), float(ex.lam), conv, float(c1), psi_sup, tuple(sols))


def _positive_line(u: SampledFunction) -> SampledFunction:
    """u+ on the line, with the sign changes of u as knots."""
    if u.region is not None:
        c, r = u.region.bounding_ball()
        lo, hi = c[0] - r, c[0] + r
    else:
        lo, hi = -(u.far_radius or 10.0), u.far_radius or 10.0
    base = u.evaluate_points
    pos = lambda x: np.maximum(base(np.reshape(x, (-1, 1))), 0.0)
    return replace(
        u,
        rule=pos,
        extension="zero" if u.zero_extension else pos,
        smoothness="C0",
        knots=tuple(sorted(set(u.knots) | set(_sign_roots(u, lo, hi)))),
        far_value=None if u.far_value is None else max(u.far_value, 0.0),
        name=f"({u.name})+",
    )


# }}}


# {{{ classical mode


@dataclass(frozen=True)
class ClassicalConfig:
    ladder: tuple[float, ...] = (0.1, 0.05, 0.025, 0.0125)
    centers: int = 81
    radius_fractions: tuple[float, ...] = (0.1, 0.25, 0.5, 0.75, 1.0)
    angular_nodes: int = 64
    rel_tol: float = 1e-8
    decay_factor: float = 0.1
    ladder_rel_tol: float = 1e-6
    conclusion_points: int = 401


def sphere_average(u: SampledFunction, center: np.ndarray, radius: float, nodes: int = 64) -> float:
    """Average of u over the sphere of the given radius (trapezoid in d = 2)."""
    c = np.asarray(center, dtype=float).ravel()
    if len(c) == 1:
        return float(np.mean(u.evaluate_points(np.array([[c[0] - radius], [c[0] + radius]]))))
    if len(c) != 2:
        raise NotImplementedError("sphere averages are implemented for d = 1, 2")
    phi = 2 * np.pi * np.arange(nodes) / nodes
    pts = c + radius * np.column_stack([np.cos(phi), np.sin(phi)])
    return float(np.mean(u.evaluate_points(pts)))


def classical_mp_check(u: SampledFunction, domain: Domain, cfg: ClassicalConfig | None = None) -> HypothesisReport:
    """Sub-mean-value property, exponent-one boundary functional and sup u+ for the Laplacian.

    Sphere radii are fractions of the inradius; balls that would leave the
    domain are skipped and counted.  The sub-mean-value check records the
    largest deficit u(center) - average (<= tol for a pass) and, in
    ``values``, the largest absolute gap |average - u(center)|.
    """
    cfg = cfg or ClassicalConfig()
    centers = interior_grid(domain, cfg.centers)
    dist = domain.distance_to_boundary(centers)
    rin = domain.inradius
    scale = max(float(np.max(np.abs(u.evaluate_points(centers)))), 1e-300)
    deficits, gaps, skipped = [], [], 0
    for c, d in zip(centers, dist):
        for f in cfg.radius_fractions:
            r = f * rin
            if r >= d:
                skipped += 1
                continue
            avg = sphere_average(u, c, r, cfg.angular_nodes)
            uc = float(u.evaluate_points(c[None, :])[0])
            deficits.append(uc - avg)
            gaps.append(abs(avg - uc))
    tol = cfg.rel_tol * scale
    worst = max(deficits) if deficits else 0.0
    verdict = PASS if deficits and worst <= tol else (INCONCLUSIVE if not deficits else FAIL)
    smv = CheckResult(
        "sub_mean_value", verdict, float(worst), float(tol), len(deficits), (float(max(gaps, default=0.0)),), skipped
    )
    vcfg = VerifierConfig(ladder=cfg.ladder, decay_factor=cfg.decay_factor, ladder_rel_tol=cfg.ladder_rel_tol)
    ladder = _ladder(u, domain, 1.0, cfg.ladder, vcfg)
    concl = check_conclusion(u, domain, VerifierConfig(conclusion_points=cfg.conclusion_points, conclusion_rel_tol=cfg.rel_tol))
    return HypothesisReport(u.name, "laplacian", smv, None, ladder, concl, None, {"domain": domain.to_dict()})


# }}}
