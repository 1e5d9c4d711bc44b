"""Galerkin solver for A_s phi = psi in an interval, phi = 0 outside.

Piecewise linear hats on a mesh graded toward both endpoints.  The
stiffness entries E(phi_i, phi_j) are split by element pairs:

* same element: closed form,
* neighbours: the double integral is homogeneous around the shared vertex
  and reduces to a one-dimensional smooth integral,
* separated elements: exact inner integrals of the kernel against linear
  functions, Gauss-Legendre outside,
* everything else (including the exterior of the interval) lumps into an
  element-wise weight ((x-L)^{-2s} + (R-x)^{-2s}) / (2s) with closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .errors import AssemblyAccuracyError, InsufficientResolutionError, SingularSystemError
from .functions import SampledFunction
from .geometry import Domain, Interval
from .operator import StableOperator
from .quadrature import gauss_legendre, panel_rule


@dataclass(frozen=True)
class Mesh1D:
    a: float
    b: float
    n_nodes: int = 129
    grading: float = 2.0

    def __post_init__(self) -> None:
        if not self.b > self.a:
            raise ValueError("need a < b")
        if self.n_nodes < 3:
            raise ValueError("need at least three nodes")
        if self.grading < 1:
            raise ValueError("grading exponent must be >= 1")

    @property
    def nodes(self) -> np.ndarray:
        t = np.linspace(-1.0, 1.0, self.n_nodes)
        # distance to the nearer end grows like (graded coordinate)^g
        x = 0.5 * (self.a + self.b) + 0.5 * (self.b - self.a) * np.sign(t) * (1 - (1 - np.abs(t)) ** self.grading)
        x[0], x[-1] = self.a, self.b
        return x

    @property
    def sizes(self) -> np.ndarray:
        return np.diff(self.nodes)

    @property
    def n_dofs(self) -> int:
        return self.n_nodes - 2

    def refined(self) -> "Mesh1D":
        """Every element bisected in the graded coordinate (nested for odd counts)."""
        return Mesh1D(self.a, self.b, 2 * self.n_nodes - 1, self.grading)

    def hat(self, i: int) -> SampledFunction:
        """Interior hat function number i (0-based over the dofs)."""
        x = self.nodes
        vals = np.zeros(len(x))
        vals[i + 1] = 1.0
        return SampledFunction(
            lambda t: np.interp(t, x, vals),
            region=Interval(x[i], x[i + 2]),
            smoothness="C0",
            edge_exponent=1.0,
            knots=(x[i + 1],),
            name=f"hat{i}",
        )


# {{{ element pair integrals


def _same_element(h: np.ndarray, s: float) -> np.ndarray:
    """int_K int_K |x-y|^{1-2s} dx dy."""
    return 2.0 * h ** (3 - 2 * s) / ((2 - 2 * s) * (3 - 2 * s))


def _adjacent_moments(hk: np.ndarray, hl: np.ndarray, s: float, n: int = 24) -> np.ndarray:
    """M_pq = int_0^1 t^p (1-t)^q rho_max(t)^{3-2s} dt / (3-2s) for (p,q) in (2,0),(1,1),(0,2).

    rho_max(t) = min(hk/t, hl/(1-t)); the minimum switches at t* = hk/(hk+hl).
    """
    g, w = gauss_legendre(n)
    tstar = hk / (hk + hl)
    out = np.zeros((len(hk), 3))
    for lo, hi, which in ((np.zeros_like(tstar), tstar, "l"), (tstar, np.ones_like(tstar), "k")):
        half = 0.5 * (hi - lo)
        t = lo[:, None] + half[:, None] * (g[None, :] + 1.0)
        wt = half[:, None] * w[None, :]
        rho = hl[:, None] / (1 - t) if which == "l" else hk[:, None] / t
        base = wt * rho ** (3 - 2 * s)
        out[:, 0] += np.sum(base * t * t, axis=1)
        out[:, 1] += np.sum(base * t * (1 - t), axis=1)
        out[:, 2] += np.sum(base * (1 - t) ** 2, axis=1)
    return out / (3 - 2 * s)


def _power_antiderivative(t: np.ndarray, p: float) -> np.ndarray:
    """int t^{p-1} dt, with the logarithm at p = 0."""
    if abs(p) < 1e-14:
        return np.log(t)
    return t**p / p


def _separated_blocks(x: np.ndarray, s: float, n: int = 24) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """For all element pairs k < l-1: J_ab = int_Kk int_Kl lam_a(x) lam_b(y) (y-x)^{-1-2s}.

    Returns (k index, l index, J with shape (pairs, 2, 2)).
    """
    ne = len(x) - 1
    kk, ll = np.triu_indices(ne, k=2)
    g, w = gauss_legendre(n)
    x0, x1 = x[kk], x[kk + 1]
    y0, y1 = x[ll], x[ll + 1]
    hk, hl = x1 - x0, y1 - y0
    xs = x0[:, None] + 0.5 * hk[:, None] * (g[None, :] + 1.0)
    xw = 0.5 * hk[:, None] * w[None, :]
    lo, hi = y0[:, None] - xs, y1[:, None] - xs
    p0 = _power_antiderivative(hi, -2 * s) - _power_antiderivative(lo, -2 * s)  # int t^{-1-2s}
    p1 = _power_antiderivative(hi, 1 - 2 * s) - _power_antiderivative(lo, 1 - 2 * s)  # int t^{-2s}
    # lam_1(y) = (y - y0)/hl with y = x + t
    in1 = ((xs - y0[:, None]) * p0 + p1) / hl[:, None]
    in0 = p0 - in1
    lam1x = (xs - x0[:, None]) / hk[:, None]
    lam0x = 1.0 - lam1x
    j = np.empty((len(kk), 2, 2))
    j[:, 0, 0] = np.sum(xw * lam0x * in0, axis=1)
    j[:, 0, 1] = np.sum(xw * lam0x * in1, axis=1)
    j[:, 1, 0] = np.sum(xw * lam1x * in0, axis=1)
    j[:, 1, 1] = np.sum(xw * lam1x * in1, axis=1)
    return kk, ll, j


def _lumped_weights(x: np.ndarray, s: float, n: int = 24) -> np.ndarray:
    """2 int_Kk lam_a lam_b W_k with W_k = ((x-L)^{-2s} + (R-x)^{-2s})/(2s), [L, R] the patch of Kk."""
    ne = len(x) - 1
    out = np.zeros((ne, 2, 2))
    for k in range(ne):
        x0, x1 = x[k], x[k + 1]
        left = x[max(k - 1, 0)]
        right = x[min(k + 2, ne)]
        at_left, at_right = left == x0, right == x1
        # at the interval ends only the hat vanishing there survives, and
        # lam^2 dist^{-2s} behaves like dist^{2-2s}
        t, w = panel_rule(x0, x1, n, 2 - 2 * s if at_left else 0.0, 2 - 2 * s if at_right else 0.0)
        weight = ((t - left) ** (-2 * s) + (right - t) ** (-2 * s)) / (2 * s)
        l1 = (t - x0) / (x1 - x0)
        l0 = 1 - l1
        if not at_left:
            out[k, 0, 0] = w @ (l0 * l0 * weight)
        if not (at_left or at_right):
            out[k, 0, 1] = out[k, 1, 0] = w @ (l0 * l1 * weight)
        if not at_right:
            out[k, 1, 1] = w @ (l1 * l1 * weight)
    return 2.0 * out


# }}}


def assemble(mesh: Mesh1D, op: StableOperator) -> np.ndarray:
    """Stiffness matrix A_ij = E(phi_i, phi_j) over the interior hats."""
    if op.dim != 1:
        raise NotImplementedError("the Galerkin solver is one-dimensional")
    s = op.s
    x = mesh.nodes
    h = np.diff(x)
    ne = len(h)
    full = np.zeros((len(x), len(x)))

    # same element: phi'_a phi'_b int int |x-y|^{1-2s}
    same = _same_element(h, s)
    sgn = np.array([[1.0, -1.0], [-1.0, 1.0]])
    for a in range(2):
        for b in range(2):
            np.add.at(full, (np.arange(ne) + a, np.arange(ne) + b), sgn[a, b] * same / h**2)

    # neighbours sharing vertex p = x[k+1]; Delta_i = b_i xi - d_i eta
    hk, hl = h[:-1], h[1:]
    m = _adjacent_moments(hk, hl, s)
    bcoef = np.stack([1.0 / hk, -1.0 / hk, np.zeros_like(hk)], axis=1)
    dcoef = np.stack([np.zeros_like(hk), -1.0 / hl, 1.0 / hl], axis=1)
    idx = np.stack([np.arange(ne - 1), np.arange(ne - 1) + 1, np.arange(ne - 1) + 2], axis=1)
    for i in range(3):
        for j in range(3):
            # (b_i t - d_i (1-t)) (b_j t - d_j (1-t)) against the moments
            val = (
                bcoef[:, i] * bcoef[:, j] * m[:, 0]
                - (bcoef[:, i] * dcoef[:, j] + dcoef[:, i] * bcoef[:, j]) * m[:, 1]
                + dcoef[:, i] * dcoef[:, j] * m[:, 2]
            )
            np.add.at(full, (idx[:, i], idx[:, j]), 2.0 * val)

    # separated elements: cross terms only; their diagonal blocks are lumped
    kk, ll, jb = _separated_blocks(x, s)
    for a in range(2):
        for b in range(2):
            np.add.at(full, (kk + a, ll + b), -2.0 * jb[:, a, b])
            np.add.at(full, (ll + b, kk + a), -2.0 * jb[:, a, b])

    lump = _lumped_weights(x, s)
    for a in range(2):
        for b in range(2):
            np.add.at(full, (np.arange(ne) + a, np.arange(ne) + b), lump[:, a, b])

    stiff = 0.5 * op.line_mass * full[1:-1, 1:-1]
    return 0.5 * (stiff + stiff.T)


def load_vector(mesh: Mesh1D, psi: SampledFunction, order: int = 8) -> np.ndarray:
    x = mesh.nodes
    g, w = gauss_legendre(order)
    x0, h = x[:-1], np.diff(x)
    t = x0[:, None] + 0.5 * h[:, None] * (g[None, :] + 1.0)
    wt = 0.5 * h[:, None] * w[None, :]
    vals = psi.evaluate_points(t.reshape(-1, 1)).reshape(t.shape)
    l1 = (t - x0[:, None]) / h[:, None]
    full = np.zeros(len(x))
    np.add.at(full, np.arange(len(h)), np.sum(wt * vals * (1 - l1), axis=1))
    np.add.at(full, np.arange(len(h)) + 1, np.sum(wt * vals * l1, axis=1))
    return full[1:-1]


@dataclass(frozen=True)
class DiscreteSolution:
    mesh: Mesh1D
    coefficients: np.ndarray
    energy: float
    residual: float
    s: float = 0.5
    matrix: np.ndarray | None = field(default=None, repr=False, compare=False)

    @property
    def nodal_values(self) -> np.ndarray:
        return np.concatenate([[0.0], self.coefficients, [0.0]])

    def __call__(self, x: Any) -> np.ndarray:
        xs = np.asarray(x, dtype=float)
        return np.interp(xs, self.mesh.nodes, self.nodal_values, left=0.0, right=0.0)

    def as_function(self, scale: float = 1.0, name: str = "phi_h") -> SampledFunction:
        nodes, vals = self.mesh.nodes, scale * self.nodal_values
        return SampledFunction(
            lambda t: np.interp(t, nodes, vals),
            region=Interval(self.mesh.a, self.mesh.b),
            smoothness="C0",
            knots=tuple(nodes[1:-1]),
            name=name,
        )


def solve_dirichlet(
    op: StableOperator,
    domain: Domain,
    psi: SampledFunction,
    n_nodes: int = 257,
    grading: float = 2.0,
) -> DiscreteSolution:
    if domain.dim != 1:
        raise NotImplementedError("the Galerkin solver is one-dimensional")
    c, r = domain.bounding_ball()
    mesh = Mesh1D(c[0] - r, c[0] + r, n_nodes, grading)
    mat = assemble(mesh, op)
    rhs = load_vector(mesh, psi)
    if not np.all(np.isfinite(mat)):
        raise SingularSystemError("stiffness matrix has non-finite entries")
    try:
        factor = cho_factor(mat)
    except LinAlgError as exc:
        raise AssemblyAccuracyError("stiffness matrix is not positive definite; refine quadrature") from exc
    coef = cho_solve(factor, rhs)
    res = mat @ coef - rhs
    scale = max(np.linalg.norm(rhs), 1e-300)
    energy = float(coef @ mat @ coef)
    return DiscreteSolution(mesh, coef, energy, float(np.linalg.norm(res) / scale), op.s, mat)


# {{{ regularity probes


@dataclass(frozen=True)
class DecayFit:
    beta: float
    residual: float
    n_points: int


def boundary_decay_fit(sol: DiscreteSolution, band: tuple[float, float] | None = None) -> DecayFit:
    """Least-squares slope of log phi_h against log dist over the boundary band."""
    x = sol.mesh.nodes[1:-1]
    phi = sol.coefficients
    a, b = sol.mesh.a, sol.mesh.b
    d = np.minimum(x - a, b - x)
    lo, hi = band if band is not None else (float(sol.mesh.sizes.min()), 0.1)
    keep = (d >= lo) & (d <= hi) & (phi > 0)
    if keep.sum() < 5:
        raise InsufficientResolutionError(f"only {int(keep.sum())} mesh nodes in the band [{lo:g}, {hi:g}]")
    return fit_power_law(d[keep], phi[keep])


def fit_power_law(d: np.ndarray, values: np.ndarray) -> DecayFit:
    ld, lv = np.log(d), np.log(values)
    coef, res, *_ = np.polyfit(ld, lv, 1, full=True)
    resid = float(np.sqrt(res[0] / len(ld))) if len(res) else 0.0
    return DecayFit(float(coef[0]), resid, len(ld))


def holder_seminorm(u, domain: Domain, gamma: float, samples: int = 400, chunk: int = 512) -> float:
    """max over sampled pairs of |u(x)-u(y)| / |x-y|^gamma (closure of the domain)."""
    if not 0 < gamma < 1:
        raise ValueError("gamma must lie in (0, 1)")
    pts = _closure_samples(domain, samples)
    vals = u(pts) if callable(u) and not isinstance(u, SampledFunction) else u.evaluate_points(pts)
    best = 0.0
    for start in range(0, len(pts), chunk):
        p = pts[start : start + chunk]
        v = vals[start : start + chunk]
        dist = np.linalg.norm(p[:, None, :] - pts[None, :, :], axis=2)
        diff = np.abs(v[:, None] - vals[None, :])
        mask = dist > 0
        if mask.any():
            best = max(best, float(np.max(diff[mask] / dist[mask] ** gamma)))
    return best


def _closure_samples(domain: Domain, n: int) -> np.ndarray:
    if domain.dim == 1:
        c, r = domain.bounding_ball()
        return np.linspace(c[0] - r, c[0] + r, n).reshape(-1, 1)
    lo, hi = domain.bbox()
    k = max(4, int(math.sqrt(n)))
    gx, gy = np.meshgrid(np.linspace(lo[0], hi[0], k), np.linspace(lo[1], hi[1], k))
    grid = np.column_stack([gx.ravel(), gy.ravel()])
    grid = grid[domain.contains(grid)]
    return np.vstack([grid, domain.sample_boundary(4 * k)])


# }}}
