"""Centered, non-centered, truncated and restricted fractional maximal functions.

Every evaluation is a global maximization of the objective

    Phi(r) = r^beta * avg_{B(x, r)} |f|

over an admissible radius range, or of its two-parameter analogue over
all balls containing ``x``.  Points are given as a signed coordinate for
functions on the line and as the distance ``t = |x|`` for radial functions
in ``d >= 2``.

On the line the centered problem is solved exactly: between consecutive
breakpoints ``|x - k_i|`` the mass ``int_{x-r}^{x+r} |f|`` is a quadratic
in ``r``, so stationary points are roots of a quadratic.  In ``d >= 2`` a
logarithmic grid brackets every local maximum and a vectorized
golden-section search refines all brackets at once; nothing is lost above
the certified tail cutoff because ``Phi(r) <= ||f||_1 r^{beta-d} / omega_d``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .geometry import (
    DEFAULT_QUAD,
    BallSpec,
    PiecewisePolynomial,
    QuadratureConfig,
    ball_average,
    ball_averages,
    line_average,
)
from .profile import PiecewiseLinearProfile, RadialFunction, abs_profile, unit_ball_volume

_GOLD = (math.sqrt(5.0) - 1.0) / 2.0
_LINE_PEAKS = 6
# relative error allowance of the low-order coarse scan when pruning brackets
COARSE_MARGIN = 1e-6

FunctionLike = Union[PiecewiseLinearProfile, RadialFunction]


class SolverError(RuntimeError):
    """A maximization did not converge."""


@dataclass(frozen=True)
class Beta:
    """Fractional order ``beta`` in dimension ``d``, with ``q = d / (d - beta)``.

    ``0 < beta < d`` is accepted; the theorems cover ``0 < beta < 1`` and
    :attr:`in_theorem_range` flags the rest.
    """

    beta: float
    d: int

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 1:
            raise ValueError("dimension must be a positive integer")
        object.__setattr__(self, "d", int(self.d))
        if not (0.0 < self.beta < self.d):
            raise ValueError(f"need 0 < beta < d, got beta={self.beta}, d={self.d}")
        object.__setattr__(self, "beta", float(self.beta))

    @property
    def q(self) -> float:
        return self.d / (self.d - self.beta)

    @property
    def in_theorem_range(self) -> bool:
        return self.beta < 1.0


@dataclass(frozen=True)
class SolverConfig:
    """Optimizer settings.

    Parameters
    ----------
    per_decade : int
        Coarse log-grid density for the radius search.
    eps_argmax : float
        Radii whose objective is within this relative gap of the sup are good radii.
    cluster_rtol : float
        Good radii closer than ``cluster_rtol * r`` are one cluster.
    r_min_rel : float
        Smallest searched radius, relative to the support scale.
    xtol : float
        Relative bracket width at which golden-section refinement stops.
    max_iter : int
        Golden-section iteration cap.
    line_method : {"exact", "search"}
        Centered solver on the line: closed-form breakpoints or the generic grid search.
    nc_per_decade, nc_u : int
        Coarse grid for the non-centered search (radii per decade, centre offsets).
    nc_starts : int
        Number of coarse cells used as starting points for coordinate ascent.
    nc_line_points : int
        Grid size of each one-dimensional sub-maximization.
    nc_rounds : int
        Coordinate-ascent round cap; reaching it sets ``cap_hit``.
    refine_split : int
        Coarse cells that may still hold the sup are split into this many
        geometric sub-cells before brackets are picked.
    coarse_nodes : int
        Gauss-Legendre nodes per panel during the coarse radius scan in
        ``d >= 2``; refinement and the reported value use ``quad``.
    quad : QuadratureConfig
        Quadrature for ``d >= 2`` averages.
    """

    per_decade: int = 256
    eps_argmax: float = 1e-9
    cluster_rtol: float = 1e-6
    r_min_rel: float = 1e-8
    xtol: float = 1e-12
    max_iter: int = 200
    line_method: str = "exact"
    nc_per_decade: int = 24
    nc_u: int = 33
    nc_starts: int = 4
    nc_line_points: int = 96
    nc_rounds: int = 40
    refine_split: int = 16
    coarse_nodes: int = 12
    quad: QuadratureConfig = DEFAULT_QUAD

    def __post_init__(self):
        if self.per_decade < 4 or self.nc_per_decade < 2 or self.nc_u < 3:
            raise ValueError("grid densities too small")
        if not (0 < self.eps_argmax < 1e-2):
            raise ValueError("eps_argmax must lie in (0, 1e-2)")
        if self.line_method not in ("exact", "search"):
            raise ValueError("line_method must be 'exact' or 'search'")
        if self.nc_starts < 1 or self.nc_rounds < 1 or self.max_iter < 10 or self.refine_split < 2:
            raise ValueError("iteration counts too small")


DEFAULT_SOLVER = SolverConfig()


@dataclass(frozen=True, eq=False)
class GoodRadiusResult:
    """Value of a centered-type maximal function and its good radii.

    ``radii`` holds one representative per cluster of near-maximizers
    (objective within ``eps_argmax`` of ``value``), in increasing order;
    ``smallest`` is the least of them.
    """

    value: float
    radii: tuple
    smallest: float
    point: float
    beta: float
    d: int
    r_max: float
    degenerate: bool = False
    _objective: Optional[Callable] = field(default=None, repr=False)

    @property
    def unique_radius(self) -> bool:
        return len(self.radii) == 1

    def objective_at(self, r) -> np.ndarray:
        """``r^beta * avg |f|`` on the centered ball of radius ``r``."""
        if self._objective is None:
            raise RuntimeError("objective not attached")
        return self._objective(r)

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "radii": list(self.radii),
            "smallest": self.smallest,
            "point": self.point,
            "beta": self.beta,
            "d": self.d,
            "r_max": self.r_max,
            "degenerate": self.degenerate,
            "unique_radius": self.unique_radius,
        }


@dataclass(frozen=True)
class NoncenteredResult:
    """Best ball ``B(z, r)`` containing the point, with ``|z| = s_opt`` (signed centre on the line)."""

    value: float
    s_opt: float
    r_opt: float
    point: float
    boundary_contact: bool
    cap_hit: bool = False
    degenerate: bool = False

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "s_opt": self.s_opt,
            "r_opt": self.r_opt,
            "point": self.point,
            "boundary_contact": self.boundary_contact,
            "cap_hit": self.cap_hit,
            "degenerate": self.degenerate,
        }


# ---------------------------------------------------------------------------
# targets: |f| on the line, or |F| for a radial function in d >= 2


class _Target:
    """Averages of ``|f|`` over balls given by centre coordinate and radius."""

    def __init__(self, f: FunctionLike, d: int, cfg: SolverConfig):
        if isinstance(f, RadialFunction):
            if f.d != d:
                raise ValueError(f"function dimension {f.d} does not match beta dimension {d}")
            line = f.line_profile() if d == 1 else None
            F = f.F
        elif isinstance(f, PiecewiseLinearProfile):
            if d != 1:
                raise ValueError("a bare profile is a function on the line; wrap it in RadialFunction for d > 1")
            if f.half_line:
                line, F = f.even_extension(), f
            else:
                line, F = f, None
        else:
            raise TypeError(f"unsupported function type {type(f).__name__}")
        self.d = d
        self.cfg = cfg
        if d == 1:
            self.p = abs_profile(line)
            a, b = self.p.support
            self.lo, self.hi = a, b
            self.scale = max(abs(a), abs(b), b - a)
            self.l1 = float(self.p.integral())
            self.zero = self.p.is_zero()
            self.sup = float(np.max(self.p.values))
        else:
            self.F_abs = abs_profile(F)
            self.G = PiecewisePolynomial.from_profile(self.F_abs)
            self.rho_max = float(self.F_abs.knots[-1])
            self.scale = self.rho_max
            self.l1 = f.l1_norm() if isinstance(f, RadialFunction) else RadialFunction(d, F).l1_norm()
            self.zero = self.F_abs.is_zero()
            self.sup = float(np.max(self.F_abs.values))

    def check_point(self, x: float) -> float:
        x = float(x)
        if not math.isfinite(x):
            raise ValueError("point must be finite")
        if self.d > 1 and x < 0:
            raise ValueError("radial coordinate must be nonnegative")
        return x

    def reach(self, c):
        """Radius beyond which a ball centred at ``c`` covers the whole support."""
        c = np.asarray(c, dtype=float)
        if self.d == 1:
            return np.maximum(np.abs(c - self.lo), np.abs(self.hi - c))
        return c + self.rho_max

    def averages(self, c, r, nodes: Optional[int] = None) -> np.ndarray:
        c = np.asarray(c, dtype=float)
        r = np.asarray(r, dtype=float)
        c, r = np.broadcast_arrays(c, r)
        if self.d == 1:
            return line_average(self.p, c, r)
        m = self.cfg.quad.radial_nodes if nodes is None else nodes
        out = ball_averages(self.G, np.abs(c).ravel(), r.ravel(), self.d, m)
        return out.reshape(c.shape)

    def objective(self, c, r, beta: float, nodes: Optional[int] = None) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        return np.where(r > 0, np.power(np.maximum(r, 1e-300), beta) * self.averages(c, np.maximum(r, 1e-300), nodes), 0.0)

    def certified_average(self, c: float, r: float) -> float:
        """Average with quadrature refinement (raises if it does not converge)."""
        if self.d == 1:
            return float(line_average(self.p, c, r))
        return ball_average(self.F_abs, BallSpec(abs(c), r, self.d), self.cfg.quad)


# ---------------------------------------------------------------------------
# vectorized golden section


def golden_maximize(fn: Callable[[np.ndarray], np.ndarray], a, b, xtol: float, max_iter: int):
    """Maximize ``fn`` on each bracket ``[a_i, b_i]`` simultaneously.

    ``fn`` maps an array of abscissae to objective values.  Returns the
    best abscissae, their values and the iteration count used.  Endpoint
    values are included so a maximum sitting at a bracket end is found.
    """
    a = np.array(a, dtype=float)
    b = np.array(b, dtype=float)
    if a.size == 0:
        return a, a.copy(), 0
    fa, fb = fn(a), fn(b)
    x1 = b - _GOLD * (b - a)
    x2 = a + _GOLD * (b - a)
    f1, f2 = fn(x1), fn(x2)
    it = 0
    scale = np.maximum(np.abs(a), np.abs(b))
    scale = np.where(scale > 0, scale, 1.0)
    while it < max_iter:
        active = (b - a) > xtol * scale
        if not np.any(active):
            break
        it += 1
        left = f1 >= f2  # maximum in [a, x2]
        na = np.where(left, a, x1)
        nb = np.where(left, x2, b)
        nx1 = np.where(left, nb - _GOLD * (nb - na), x2)
        nx2 = np.where(left, x1, na + _GOLD * (nb - na))
        new_pt = np.where(left, nx1, nx2)
        fnew = fn(new_pt)
        nf1 = np.where(left, fnew, f2)
        nf2 = np.where(left, f1, fnew)
        a, b, x1, x2, f1, f2 = (
            np.where(active, na, a),
            np.where(active, nb, b),
            np.where(active, nx1, x1),
            np.where(active, nx2, x2),
            np.where(active, nf1, f1),
            np.where(active, nf2, f2),
        )
    cand_x = np.stack([x1, x2, a, b])
    cand_f = np.stack([f1, f2, fn(a), fn(b)])
    del fa, fb
    best = np.argmax(cand_f, axis=0)
    cols = np.arange(a.size)
    return cand_x[best, cols], cand_f[best, cols], it


# ---------------------------------------------------------------------------
# centered solvers


def _cluster(radii: np.ndarray, rtol: float) -> list:
    radii = np.sort(radii)
    out: list = []
    for r in radii:
        if out and r - out[-1] <= rtol * max(r, out[-1]):
            continue
        out.append(float(r))
    return out


def _line_exact(tg: _Target, xs: np.ndarray, beta: float, lo: np.ndarray, hi: np.ndarray):
    """Exact centered maximization on the line for every point in ``xs``.

    Returns candidate radii and objective values, both of shape ``(n, m)``.
    """
    p = tg.p
    k = p.knots
    n_k = k.size
    v = p.values
    sl = p.slopes
    cum = p.antiderivative(k)
    # extended interval table: e = 0 left exterior, 1..n_k-1 knot intervals, n_k right exterior
    K = np.concatenate([[k[0]], k[:-1], [k[-1]]])
    GK = np.concatenate([[0.0], cum[:-1], [cum[-1]]])
    V = np.concatenate([[0.0], v[:-1], [0.0]])
    S = np.concatenate([[0.0], sl, [0.0]])

    br = np.sort(np.abs(xs[:, None] - k[None, :]), axis=1)
    edges = np.concatenate([np.zeros((xs.size, 1)), br], axis=1)  # (n, n_k + 1)
    a = np.clip(edges[:, :-1], lo[:, None], hi[:, None])
    b = np.clip(edges[:, 1:], lo[:, None], hi[:, None])
    mid = 0.5 * (a + b)
    X = xs[:, None]
    ep = np.searchsorted(k, X + mid, side="right")
    em = np.searchsorted(k, X - mid, side="right")
    dp = X - K[ep]
    dm = X - K[em]
    A = (GK[ep] + V[ep] * dp + 0.5 * S[ep] * dp * dp) - (GK[em] + V[em] * dm + 0.5 * S[em] * dm * dm)
    B = (V[ep] + S[ep] * dp) + (V[em] + S[em] * dm)
    C = 0.5 * (S[ep] - S[em])
    a2, a1, a0 = (beta + 1) * C, beta * B, (beta - 1) * A
    roots = np.full(a2.shape + (2,), np.nan)
    lin = np.abs(a2) <= 1e-14 * (np.abs(a1) + np.abs(a0) / np.maximum(mid, 1e-300))
    with np.errstate(divide="ignore", invalid="ignore"):
        roots[..., 0] = np.where(lin & (a1 != 0), -a0 / a1, np.nan)
        disc = a1 * a1 - 4 * a2 * a0
        sq = np.sqrt(np.where(disc >= 0, disc, np.nan))
        qq = -0.5 * (a1 + np.copysign(sq, a1))
        r1 = qq / a2
        r2 = a0 / qq
        roots[..., 0] = np.where(lin, roots[..., 0], r1)
        roots[..., 1] = np.where(lin, np.nan, r2)
    inside = (roots > a[..., None]) & (roots < b[..., None]) & (b > a)[..., None]
    roots = np.where(inside, roots, np.nan).reshape(xs.size, -1)
    finite_hi = np.where(np.isfinite(hi), hi, lo)
    cand = np.concatenate([edges, roots, lo[:, None], finite_hi[:, None]], axis=1)
    cand = np.where((cand >= lo[:, None]) & (cand <= hi[:, None]) & (cand > 0), cand, np.nan)
    safe = np.where(np.isnan(cand), 1.0, cand)
    vals = np.where(np.isnan(cand), -np.inf, tg.objective(X, safe, beta))
    return cand, vals


def _search_grid(tg: _Target, xs: np.ndarray, beta: float, lo: np.ndarray, hi: np.ndarray, cfg: SolverConfig):
    """Log-grid bracketing plus golden-section refinement, batched over points."""
    d = tg.d
    n = xs.size
    counts = np.maximum(2, np.ceil(cfg.per_decade * np.log10(np.maximum(hi / lo, 1.0 + 1e-15))).astype(int) + 1)
    counts = np.where(hi > lo, counts, 1)
    off = np.concatenate([[0], np.cumsum(counts)])
    owner = np.repeat(np.arange(n), counts)
    pos = np.arange(off[-1]) - off[owner]
    frac = np.where(counts[owner] > 1, pos / np.maximum(counts[owner] - 1, 1), 0.0)
    grid = lo[owner] * np.power(hi[owner] / lo[owner], frac)
    coarse = cfg.coarse_nodes if d > 1 else None
    slack = 1 - cfg.eps_argmax - (COARSE_MARGIN if d > 1 else 0.0)
    vals = tg.objective(xs[owner], grid, beta, coarse)

    # Since r^d avg is increasing, Phi on a cell [r_i, r_{i+1}] is at most
    # Phi(r_{i+1}) (r_{i+1}/r_i)^(d - beta).  Cells whose bound reaches the
    # running max are subdivided so that close peaks get separate brackets.
    gmax = np.full(n, -np.inf)
    np.maximum.at(gmax, owner, vals)
    same = owner[1:] == owner[:-1]
    bound = vals[1:] * (grid[1:] / np.maximum(grid[:-1], 1e-300)) ** (d - beta)
    cells = np.nonzero(same & (bound >= slack * gmax[owner[1:]]) & (grid[1:] > grid[:-1] * (1 + 1e-9)))[0]
    if cells.size:
        k = cfg.refine_split
        j = np.arange(1, k)[None, :] / k
        ca, cb = grid[cells][:, None], grid[cells + 1][:, None]
        fine = (ca * (cb / ca) ** j).ravel()
        fowner = np.repeat(owner[cells], k - 1)
        fvals = tg.objective(xs[fowner], fine, beta, coarse)
        grid = np.concatenate([grid, fine])
        owner = np.concatenate([owner, fowner])
        vals = np.concatenate([vals, fvals])
        order = np.lexsort((grid, owner))
        grid, owner, vals = grid[order], owner[order], vals[order]
        np.maximum.at(gmax, fowner, fvals)
    counts = np.bincount(owner, minlength=n)
    off = np.concatenate([[0], np.cumsum(counts)])
    pos = np.arange(grid.size) - off[owner]

    # bracket selection around local maxima of the merged grid
    prev = np.concatenate([[-np.inf], vals[:-1]])
    nxt = np.concatenate([vals[1:], [-np.inf]])
    first = pos == 0
    last = pos == counts[owner] - 1
    prev = np.where(first, -np.inf, prev)
    nxt = np.where(last, -np.inf, nxt)
    is_max = (vals >= prev) & (vals >= nxt) & (vals > 0)
    g_prev = np.where(first, grid, np.concatenate([[1.0], grid[:-1]]))
    g_next = np.where(last, grid, np.concatenate([grid[1:], [1.0]]))
    local_ratio = np.maximum(grid / np.maximum(g_prev, 1e-300), g_next / np.maximum(grid, 1e-300))
    # a peak between nodes exceeds its neighbours by at most local_ratio^(d - beta)
    keep = is_max & (vals * local_ratio ** (d - beta) >= slack * gmax[owner])
    idx = np.nonzero(keep)[0]
    left = np.where(first[idx], grid[idx], grid[np.maximum(idx - 1, 0)])
    right = np.where(last[idx], grid[idx], grid[np.minimum(idx + 1, grid.size - 1)])
    bowner = owner[idx]
    xb = xs[bowner]
    rb, fb, it = golden_maximize(lambda r: tg.objective(xb, r, beta), left, right, cfg.xtol, cfg.max_iter)
    if it >= cfg.max_iter:
        raise SolverError("golden-section refinement hit its iteration cap")
    m = np.bincount(bowner, minlength=n).max(initial=0)
    cand = np.full((n, max(m, 1)), np.nan)
    cv = np.full((n, max(m, 1)), -np.inf)
    slot = np.zeros(n, dtype=int)
    for j, o in enumerate(bowner):
        cand[o, slot[o]] = rb[j]
        cv[o, slot[o]] = fb[j]
        slot[o] += 1
    return cand, cv


def _r_bounds(tg: _Target, xs: np.ndarray, beta: float, eps: Optional[float], rmax_restrict: Optional[np.ndarray], cfg: SolverConfig):
    """Certified radius window ``[lo, hi]`` containing every maximizer.

    A value ``v_lower`` attained at probe radii inside the admissible range
    bounds the sup from below.  Since ``Phi(r) <= r^beta sup|f|`` and
    ``Phi(r) <= ||f||_1 r^{beta-d} / omega_d``, maximizers satisfy
    ``(v_lower / sup|f|)^{1/beta} <= r <= (||f||_1 / (omega_d v_lower))^{1/(d-beta)}``.
    """
    d = tg.d
    r_min = cfg.r_min_rel * tg.scale
    lo = np.full(xs.size, r_min if eps is None else max(eps, 0.0))
    lo = np.maximum(lo, 1e-300)
    reach = tg.reach(xs)
    hi = np.maximum(reach, lo)
    if rmax_restrict is not None:
        hi = np.minimum(hi, rmax_restrict)
    lo = np.minimum(lo, hi)
    probes = np.clip(reach[:, None] * np.logspace(-3, 0, 16)[None, :], lo[:, None], hi[:, None])
    v_lower = np.max(tg.objective(xs[:, None], probes, beta), axis=1)
    with np.errstate(divide="ignore"):
        tail = np.where(v_lower > 0, (tg.l1 / (unit_ball_volume(d) * v_lower)) ** (1.0 / (d - beta)), np.inf)
        floor = np.where(v_lower > 0, (v_lower / tg.sup) ** (1.0 / beta), 0.0)
    hi = np.minimum(hi, np.maximum(tail * (1 + 1e-12), lo))
    lo = np.minimum(np.maximum(lo, floor * (1 - 1e-9)), hi)
    return lo, hi


def _centered_batch(
    f: FunctionLike,
    xs,
    b: Beta,
    cfg: SolverConfig,
    eps: Optional[float] = None,
    restrict_quarter: bool = False,
) -> list:
    tg = _Target(f, b.d, cfg)
    xs = np.atleast_1d(np.asarray(xs, dtype=float)).copy()
    for i, x in enumerate(xs):
        xs[i] = tg.check_point(x)
    if restrict_quarter and np.any(np.abs(xs) <= 0):
        raise ValueError("the restricted operator needs |x| > 0")
    beta = b.beta

    def objective_for(x):
        return lambda r: tg.objective(x, np.asarray(r, dtype=float), beta)

    if tg.zero:
        return [
            GoodRadiusResult(0.0, (), math.nan, float(x), beta, b.d, math.nan, True, objective_for(float(x)))
            for x in xs
        ]
    rmax = np.abs(xs) / 4 if restrict_quarter else None
    lo, hi = _r_bounds(tg, xs, beta, eps, rmax, cfg)
    if restrict_quarter:
        lo = np.minimum(lo, hi)
    if tg.d == 1 and cfg.line_method == "exact":
        cand, vals = _line_exact(tg, xs, beta, lo, hi)
    else:
        cand, vals = _search_grid(tg, xs, beta, lo, hi, cfg)
    out = []
    for i, x in enumerate(xs):
        ci, vi = cand[i], vals[i]
        ok = np.isfinite(vi) & ~np.isnan(ci)
        if not np.any(ok) or np.max(vi[ok]) <= 0:
            out.append(GoodRadiusResult(0.0, (), math.nan, float(x), beta, b.d, float(hi[i]), True, objective_for(float(x))))
            continue
        vmax = np.max(vi[ok])
        near = ok & (vi >= (1 - cfg.eps_argmax) * vmax)
        radii = _cluster(ci[near], cfg.cluster_rtol)
        r0 = radii[0]
        if tg.d == 1:
            best = float(vmax)  # candidates were evaluated in closed form
        else:
            best = max(float(vmax), r0**beta * tg.certified_average(float(x), r0))
        out.append(
            GoodRadiusResult(float(best), tuple(radii), float(r0), float(x), beta, b.d, float(hi[i]), False, objective_for(float(x)))
        )
    return out


def centered_values(f: FunctionLike, points, b: Beta, cfg: SolverConfig = DEFAULT_SOLVER) -> list:
    """:func:`centered_value` at many points, batched."""
    return _centered_batch(f, points, b, cfg)


def centered_value(f: FunctionLike, t: float, b: Beta, cfg: SolverConfig = DEFAULT_SOLVER) -> GoodRadiusResult:
    """``M_beta f`` at one point, with its good radii.

    Parameters
    ----------
    f : PiecewiseLinearProfile or RadialFunction
        A profile on the line (``b.d == 1``) or a radial function.
    t : float
        Signed coordinate on the line, or ``|x| >= 0`` for ``d > 1``.
    b : Beta
    cfg : SolverConfig

    Returns
    -------
    GoodRadiusResult
        ``degenerate`` is set when ``f`` vanishes identically.
    """
    return _centered_batch(f, [t], b, cfg)[0]


def truncated_values(f: FunctionLike, points, b: Beta, eps: float, cfg: SolverConfig = DEFAULT_SOLVER) -> list:
    if not eps > 0:
        raise ValueError("eps must be positive")
    return _centered_batch(f, points, b, cfg, eps=eps)


def truncated_value(f: FunctionLike, t: float, b: Beta, eps: float, cfg: SolverConfig = DEFAULT_SOLVER) -> GoodRadiusResult:
    """``M_beta^eps f``: the centered sup restricted to radii ``r >= eps``."""
    return truncated_values(f, [t], b, eps, cfg)[0]


def mI_values(f: FunctionLike, points, b: Beta, cfg: SolverConfig = DEFAULT_SOLVER) -> list:
    pts = np.atleast_1d(np.asarray(points, dtype=float))
    if np.any(np.abs(pts) == 0):
        raise ValueError("the restricted operator is defined for |x| > 0")
    return _centered_batch(f, pts, b, cfg, restrict_quarter=True)


def mI_value(f: FunctionLike, t: float, b: Beta, cfg: SolverConfig = DEFAULT_SOLVER) -> GoodRadiusResult:
    """Centered sup restricted to ``r <= |x| / 4``."""
    return mI_values(f, [t], b, cfg)[0]


# ---------------------------------------------------------------------------
# non-centered search in endpoint coordinates
#
# A ball is (a, b) = (s - r, s + r): its nearest and farthest signed extent
# along the ray through x.  x lies in the closed ball iff a <= t <= b, and in
# d >= 2 the centre distance s >= 0 means a + b >= 0.  Profile kinks occur at
# a = +-k and b = k, all axis-aligned, so coordinate ascent does not stall on
# oblique ridges.


def _psi(tg: _Target, a, b, beta: float) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    r = 0.5 * (b - a)
    c = 0.5 * (a + b)
    return tg.objective(c, r, beta)


def _line_max_batch(fn: Callable, lo, hi, anchor, n: int, cfg: SolverConfig):
    """Global maximum of ``fn(x, rows)`` on ``[lo_i, hi_i]`` for every row.

    The grid is geometric in the distance from ``anchor`` (the fixed ball
    endpoint) so short intervals are resolved; the best grid cell is then
    refined by golden section.
    """
    lo, hi, anchor = (np.asarray(v, dtype=float) for v in (lo, hi, anchor))
    hi = np.maximum(hi, lo)
    m = lo.size
    dlo, dhi = np.abs(lo - anchor), np.abs(hi - anchor)
    far = np.maximum(dlo, dhi)
    near = np.maximum(np.minimum(dlo, dhi), far * 1e-9)
    frac = np.linspace(0.0, 1.0, n)[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        dist = near[:, None] * np.power(np.where(near > 0, far / near, 1.0)[:, None], frac)
    sign = np.where(hi > anchor, 1.0, -1.0)[:, None]
    geo = anchor[:, None] + sign * dist
    uni = lo[:, None] + (hi - lo)[:, None] * frac
    pts = np.clip(np.concatenate([geo, uni], axis=1), lo[:, None], hi[:, None])
    pts = np.sort(np.concatenate([lo[:, None], pts, hi[:, None]], axis=1), axis=1)
    ncol = pts.shape[1]
    rows = np.repeat(np.arange(m), ncol)
    vals = fn(pts.ravel(), rows).reshape(pts.shape)
    # refine the best few grid peaks: nearly equal local maxima are common
    k = min(_LINE_PEAKS, ncol)
    pad = np.full((m, 1), -np.inf)
    lm = (vals >= np.hstack([pad, vals[:, :-1]])) & (vals >= np.hstack([vals[:, 1:], pad]))
    top = np.argsort(-np.where(lm, vals, -np.inf), axis=1, kind="stable")[:, :k]
    rr = np.repeat(np.arange(m), k)
    ti = top.ravel()
    left = pts[rr, np.maximum(ti - 1, 0)]
    right = pts[rr, np.minimum(ti + 1, ncol - 1)]
    x, v, _ = golden_maximize(lambda z: fn(z, rr), left, right, cfg.xtol, cfg.max_iter)
    gx, gv = pts[rr, ti], vals[rr, ti]
    better = v >= gv
    x = np.where(better, x, gx).reshape(m, k)
    v = np.where(better, v, gv).reshape(m, k)
    j = np.argmax(v, axis=1)
    ar = np.arange(m)
    return x[ar, j], v[ar, j]


def noncentered_value(
    f: FunctionLike,
    t: float,
    b: Beta,
    cfg: SolverConfig = DEFAULT_SOLVER,
    centered: Optional[GoodRadiusResult] = None,
) -> NoncenteredResult:
    """``M~_beta f``: the sup of ``r^beta avg_B |f|`` over balls ``B`` whose closure contains the point.

    A coarse grid over (radius, centre offset) seeds coordinate ascent in
    the ball endpoints; the centered optimum is always one of the seeds, so
    the result never falls below the centered value.  ``s_opt`` is the
    centre distance from the origin (the signed centre on the line).
    """
    tg = _Target(f, b.d, cfg)
    t = tg.check_point(t)
    beta, d = b.beta, b.d
    if tg.zero:
        return NoncenteredResult(0.0, t, math.nan, t, False, False, True)
    if centered is None:
        centered = centered_value(f, t, b, cfg)
    v_c = centered.value
    r_min = cfg.r_min_rel * tg.scale
    r_hi = (tg.l1 / (unit_ball_volume(d) * v_c)) ** (1.0 / (d - beta)) * (1 + 1e-12)
    r_hi = max(r_hi, centered.smallest * (1 + 1e-12))

    # coarse grid over (r, u), centre s = t + u r
    decades = max(math.log10(r_hi / r_min), 1.0)
    nr = int(math.ceil(cfg.nc_per_decade * decades)) + 1
    rg = np.geomspace(r_min, r_hi, nr)
    ug = np.linspace(0.0, 1.0, cfg.nc_u)
    R, U = np.meshgrid(rg, ug, indexing="ij")
    ulo = -np.ones_like(R) if d == 1 else np.maximum(-1.0, -t / R)
    U = ulo + (1.0 - ulo) * U
    S = t + U * R
    V = tg.objective(S, R, beta)
    order = np.argsort(-V.ravel(), kind="stable")[: cfg.nc_starts]
    i1, i2 = np.unravel_index(order, V.shape)
    A = np.concatenate([[t - centered.smallest], S[i1, i2] - R[i1, i2]])
    Bv = np.concatenate([[t + centered.smallest], S[i1, i2] + R[i1, i2]])
    A = np.minimum(A, t)
    Bv = np.maximum(Bv, t)
    L_max = 2 * r_hi
    val = _psi(tg, A, Bv, beta)
    done = np.zeros(A.size, dtype=bool)

    for _ in range(cfg.nc_rounds):
        act = np.nonzero(~done)[0]
        if act.size == 0:
            break
        a_act, b_act = A[act], Bv[act]
        # best right endpoint for fixed left endpoint
        lo = np.maximum(t, a_act + 2 * r_min)
        if d > 1:
            lo = np.maximum(lo, -a_act)
        nb, vb = _line_max_batch(lambda z, rows: _psi(tg, a_act[rows], z, beta), lo, a_act + L_max, a_act, cfg.nc_line_points, cfg)
        up = vb >= val[act]
        b_new = np.where(up, nb, b_act)
        v_mid = np.where(up, vb, val[act])
        # best left endpoint for fixed right endpoint
        hi = np.minimum(t, b_new - 2 * r_min)
        lo = b_new - L_max
        if d > 1:
            lo = np.maximum(lo, -b_new)
        na, va = _line_max_batch(lambda z, rows: _psi(tg, z, b_new[rows], beta), np.minimum(lo, hi), hi, b_new, cfg.nc_line_points, cfg)
        up = va >= v_mid
        a_new = np.where(up, na, a_act)
        v_new = np.where(up, va, v_mid)
        moved = (np.abs(a_new - a_act) + np.abs(b_new - b_act)) > 1e-10 * np.maximum(1.0, b_new - a_new)
        gain = v_new - val[act]
        done[act] = (gain <= 1e-14 * np.maximum(v_new, 1e-300)) & ~moved
        A[act], Bv[act], val[act] = a_new, b_new, v_new
    cap_hit = not bool(np.all(done))

    best_val = float(np.max(val))
    cand = [k for k in range(val.size) if val[k] >= (1 - cfg.eps_argmax) * best_val]
    # ties toward smaller r, then smaller |s - t|
    cand.sort(key=lambda k: (round(float(Bv[k] - A[k]) / 2, 12), abs(float(A[k] + Bv[k]) / 2 - t)))
    k = cand[0]
    r_opt = 0.5 * float(Bv[k] - A[k])
    s_opt = 0.5 * float(A[k] + Bv[k])
    value = r_opt**beta * tg.certified_average(s_opt, r_opt)
    if value < v_c:
        # the centered good ball is feasible and better
        value, s_opt, r_opt = v_c, t, centered.smallest
    tol = 1e-9 * max(r_opt, 1.0)
    contact = abs(abs(s_opt - t) - r_opt) <= tol
    return NoncenteredResult(float(value), float(s_opt), float(r_opt), t, bool(contact), cap_hit, False)


def noncentered_values(f: FunctionLike, points: Sequence[float], b: Beta, cfg: SolverConfig = DEFAULT_SOLVER) -> list:
    cents = centered_values(f, points, b, cfg)
    return [noncentered_value(f, t, b, cfg, centered=c) for t, c in zip(points, cents)]
