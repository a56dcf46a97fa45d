"""Averages of radial functions over off-origin balls and spheres.

A ball is described by the distance ``s`` of its centre from the origin and
its radius ``r``; radial integrands only see ``|y|``.  Solid averages are
reduced to one radial integral weighted by the spherical-cap fraction,
sphere averages to one angular integral.  Both are panelized at the
preimages of the integrand's knots so that composite Gauss-Legendre rules
converge spectrally.  :func:`solid_average` is a separate two-dimensional
polar rule about the origin, used as an independent route.

In ``d == 1`` every average is evaluated exactly on intervals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Union

import numpy as np
from scipy.special import betainc, gamma

from .profile import (
    PiecewiseLinearProfile,
    StepProfile,
    abs_profile,
    unit_ball_volume,
    unit_sphere_area,
)

_CHUNK = 20000


class QuadratureError(RuntimeError):
    """A quadrature did not reach its tolerance within the refinement cap."""


@dataclass(frozen=True)
class QuadratureConfig:
    """Gauss-Legendre orders per knot-induced panel and refinement policy."""

    angular_nodes: int = 24
    radial_nodes: int = 24
    atol: float = 1e-10
    max_refine: int = 3

    def __post_init__(self):
        if self.angular_nodes < 2 or self.radial_nodes < 2:
            raise ValueError("panel node counts must be >= 2")
        if not self.atol > 0:
            raise ValueError("atol must be positive")
        if self.max_refine < 0:
            raise ValueError("max_refine must be >= 0")

    def refined(self, factor: int = 2) -> "QuadratureConfig":
        return QuadratureConfig(self.angular_nodes * factor, self.radial_nodes * factor, self.atol, self.max_refine)


DEFAULT_QUAD = QuadratureConfig()


@dataclass(frozen=True)
class BallSpec:
    """Ball ``B(z, r)`` with ``|z| = s`` in R^d."""

    s: float
    r: float
    d: int

    def __post_init__(self):
        if not self.r > 0:
            raise ValueError("ball radius must be positive")
        if not self.s >= 0:
            raise ValueError("centre distance must be nonnegative")
        if int(self.d) != self.d or self.d < 1:
            raise ValueError("dimension must be a positive integer")

    def contains_point_at(self, t: float, tol: float = 0.0) -> bool:
        """Whether some point at distance ``t`` from the origin lies in the closed ball."""
        return abs(self.s - t) <= self.r * (1 + tol)


@lru_cache(maxsize=None)
def gauss_legendre(m: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(m)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def sphere_weight_norm(d: int) -> float:
    """``Z_d = int_0^pi sin^{d-2}(phi) dphi`` for ``d >= 2``."""
    if d < 2:
        raise ValueError("Z_d is defined for d >= 2")
    return math.sqrt(math.pi) * gamma((d - 1) / 2) / gamma(d / 2)


# ---------------------------------------------------------------------------
# piecewise-polynomial radial integrands


@dataclass(frozen=True, eq=False)
class PiecewisePolynomial:
    """Piecewise polynomial on ``[knots[0], knots[-1]]``, zero outside.

    On interval ``i`` the value is ``sum_j coeffs[i, j] * (t - knots[i])**j``.
    Used for every radial integrand the checks need: ``|F|``, ``|F|'``,
    ``t |F|'(t)``, level-set restrictions, and so on.  Jumps at knots are
    allowed.
    """

    knots: np.ndarray
    coeffs: np.ndarray

    def __post_init__(self):
        knots = np.asarray(self.knots, dtype=float)
        coeffs = np.atleast_2d(np.asarray(self.coeffs, dtype=float))
        if knots.ndim != 1 or coeffs.shape[0] != knots.size - 1:
            raise ValueError("need one coefficient row per knot interval")
        if np.any(np.diff(knots) <= 0):
            raise ValueError("knots must be strictly increasing")
        object.__setattr__(self, "knots", knots)
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def from_profile(cls, p: PiecewiseLinearProfile) -> "PiecewisePolynomial":
        return cls(p.knots, np.column_stack([p.values[:-1], p.slopes]))

    @classmethod
    def from_step(cls, g: StepProfile) -> "PiecewisePolynomial":
        return cls(g.knots, g.slopes[:, None])

    @property
    def degree(self) -> int:
        return self.coeffs.shape[1] - 1

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        k, c = self.knots, self.coeffs
        idx = np.searchsorted(k, t, side="right") - 1
        inside = (idx >= 0) & (idx < c.shape[0])
        idx = np.clip(idx, 0, c.shape[0] - 1)
        dt = t - k[idx]
        out = np.zeros_like(dt)
        for j in range(c.shape[1] - 1, -1, -1):
            out = out * dt + c[idx, j]
        return np.where(inside, out, 0.0)

    def times_identity(self) -> "PiecewisePolynomial":
        """``t -> t * p(t)``."""
        c = self.coeffs
        out = np.zeros((c.shape[0], c.shape[1] + 1))
        out[:, 1:] += c
        out[:, :-1] += self.knots[:-1, None] * c
        return PiecewisePolynomial(self.knots, out)

    def scaled(self, a: float) -> "PiecewisePolynomial":
        return PiecewisePolynomial(self.knots, a * self.coeffs)

    def absolute(self) -> "PiecewisePolynomial":
        """Absolute value; only valid when each piece keeps one sign (true for degree <= 1 after abs_profile)."""
        k = self.knots
        mid = 0.5 * (k[:-1] + k[1:])
        sign = np.sign(self(mid))
        return PiecewisePolynomial(k, self.coeffs * sign[:, None])

    def refine(self, extra) -> "PiecewisePolynomial":
        """Same function with additional knots inserted."""
        extra = np.asarray(extra, dtype=float)
        extra = extra[(extra > self.knots[0]) & (extra < self.knots[-1])]
        if extra.size == 0:
            return self
        knots = np.unique(np.concatenate([self.knots, extra]))
        src = np.searchsorted(self.knots, knots[:-1], side="right") - 1
        shift = knots[:-1] - self.knots[src]
        c = self.coeffs[src]
        deg = c.shape[1] - 1
        out = np.zeros_like(c)
        # re-expand sum_j c_j (u + shift)^j in powers of u
        for j in range(deg + 1):
            for i in range(j + 1):
                out[:, i] += c[:, j] * math.comb(j, i) * shift ** (j - i)
        return PiecewisePolynomial(knots, out)

    def masked(self, keep: np.ndarray) -> "PiecewisePolynomial":
        """Zero the pieces where ``keep`` is False."""
        return PiecewisePolynomial(self.knots, self.coeffs * np.asarray(keep, dtype=float)[:, None])

    def moment(self, rho, d: int) -> np.ndarray:
        """``int_0^rho p(t) t^{d-1} dt`` (exact: Gauss-Legendre of sufficient order)."""
        rho = np.asarray(rho, dtype=float)
        m = (self.degree + d) // 2 + 1
        x, w = gauss_legendre(m)
        k = np.clip(self.knots, 0, None)
        a, b = k[:-1], k[1:]
        half = 0.5 * (b - a)
        nodes = (a + b)[:, None] * 0.5 + half[:, None] * x[None, :]
        piece_vals = self._piece_eval(np.arange(a.size)[:, None], nodes) * nodes ** (d - 1)
        full = np.concatenate([[0.0], np.cumsum(np.sum(piece_vals * w[None, :], axis=1) * half)])
        flat = rho.ravel()
        idx = np.clip(np.searchsorted(k, flat, side="right") - 1, 0, a.size - 1)
        top = np.clip(flat, k[0], k[-1])
        lo = k[idx]
        h2 = 0.5 * (top - lo)
        pn = (lo + top)[:, None] * 0.5 + h2[:, None] * x[None, :]
        part = np.sum(self._piece_eval(idx[:, None], pn) * pn ** (d - 1) * w[None, :], axis=1) * h2
        res = full[idx] + part
        res = np.where(flat <= k[0], 0.0, res)
        return res.reshape(rho.shape)

    def _piece_eval(self, idx, t):
        c = self.coeffs
        dt = t - self.knots[idx]
        out = np.zeros(np.broadcast(idx, t).shape)
        for j in range(c.shape[1] - 1, -1, -1):
            out = out * dt + c[idx, j]
        return out


RadialIntegrand = Union[PiecewiseLinearProfile, StepProfile, PiecewisePolynomial]


def as_integrand(F: RadialIntegrand) -> PiecewisePolynomial:
    if isinstance(F, PiecewisePolynomial):
        return F
    if isinstance(F, PiecewiseLinearProfile):
        return PiecewisePolynomial.from_profile(F)
    if isinstance(F, StepProfile):
        return PiecewisePolynomial.from_step(F)
    raise TypeError(f"cannot integrate {type(F).__name__}")


def abs_gradient_integrand(F: PiecewiseLinearProfile) -> PiecewisePolynomial:
    """Radial derivative of ``|F|``: ``grad|f|(y) = G'(|y|) y/|y|``."""
    a = abs_profile(F)
    return PiecewisePolynomial(a.knots, a.slopes[:, None])


# ---------------------------------------------------------------------------
# cap fraction


def _cap_from_factors(omc, opc, d: int):
    """Cap fraction from ``1 - cos`` and ``1 + cos`` of the cap half-angle.

    Taking both factors separately keeps full relative accuracy for caps
    of tiny angle, where ``cos`` itself rounds to 1.
    """
    omc = np.clip(omc, 0.0, 2.0)
    opc = np.clip(opc, 0.0, 2.0)
    c = 0.5 * (opc - omc)
    sin2 = np.clip(omc * opc, 0.0, 1.0)
    if d == 2:
        return np.arctan2(np.sqrt(sin2), c) / math.pi
    if d == 3:
        return 0.5 * omc
    half = 0.5 * betainc((d - 1) / 2, 0.5, sin2)
    return np.where(c >= 0, half, 1.0 - half)


def cap_fraction(rho, ball: BallSpec):
    """Fraction of the sphere ``|y| = rho`` lying inside ``ball``.

    For ``d == 1`` the "sphere" is the point pair ``{-rho, rho}``.
    """
    rho_arr = np.asarray(rho, dtype=float)
    if np.any(rho_arr < 0):
        raise ValueError("rho must be nonnegative")
    s, r, d = ball.s, ball.r, ball.d
    if d == 1:
        inside = (np.abs(rho_arr - s) <= r).astype(float) + (np.abs(-rho_arr - s) <= r).astype(float)
        out = 0.5 * inside
    else:
        if s == 0:
            out = (rho_arr <= r).astype(float)
        else:
            delta = rho_arr - s
            with np.errstate(divide="ignore", invalid="ignore"):
                den = 2 * s * rho_arr
                omc = (r - delta) * (r + delta) / den
                opc = (s + rho_arr - r) * (s + rho_arr + r) / den
            out = _cap_from_factors(np.nan_to_num(omc, nan=0.0, posinf=2.0), np.nan_to_num(opc, nan=2.0, posinf=2.0), d)
            out = np.where(rho_arr <= r - s, 1.0, np.where(rho_arr >= r + s, 0.0, out))
    return float(out) if np.ndim(out) == 0 else out


# ---------------------------------------------------------------------------
# vectorized kernels (d >= 2)


def _chunks(n: int):
    for start in range(0, n, _CHUNK):
        yield slice(start, min(n, start + _CHUNK))


def _panels(edges: np.ndarray, m: int, eps: float = 1e-15):
    """Flatten per-row sorted edges into Gauss-Legendre nodes of positive-width panels."""
    a, b = edges[:, :-1], edges[:, 1:]
    mask = (b - a) > eps
    row = np.nonzero(mask)[0]
    A, B = a[mask], b[mask]
    x, w = gauss_legendre(m)
    half = 0.5 * (B - A)
    nodes = (0.5 * (A + B))[:, None] + half[:, None] * x[None, :]
    weights = half[:, None] * w[None, :]
    return row, nodes, weights


def ball_integrals(F: PiecewisePolynomial, s, r, d: int, m: int) -> np.ndarray:
    """``int_{B} F(|y|) dy`` for arrays of balls (centre distance ``s``, radius ``r``), ``d >= 2``."""
    s = np.asarray(s, dtype=float).ravel()
    r = np.asarray(r, dtype=float).ravel()
    out = np.empty(s.size)
    sigma = unit_sphere_area(d)
    knots = F.knots[F.knots > 0]
    for sl in _chunks(s.size):
        ss, rr = s[sl], r[sl]
        total = sigma * F.moment(np.clip(rr - ss, 0, None), d)
        part = ss > 0
        if np.any(part):
            sp, rp = ss[part], rr[part]
            # rho = c - h cos(u) sweeps [|s - r|, s + r]
            g, h = np.abs(sp - rp), np.minimum(sp, rp)
            c = g + h
            with np.errstate(divide="ignore", invalid="ignore"):
                z = (c[:, None] - knots[None, :]) / h[:, None]
            u = np.arccos(np.clip(np.nan_to_num(z, nan=1.0), -1, 1))
            n = sp.size
            edges = np.sort(np.concatenate([np.zeros((n, 1)), u, np.full((n, 1), math.pi)], axis=1), axis=1)
            row, U, W = _panels(edges, m)
            S, R, Hh, Gg = sp[row, None], rp[row, None], h[row, None], g[row, None]
            sh, ch = np.sin(0.5 * U), np.cos(0.5 * U)
            A, B = 2 * sh * sh, 2 * ch * ch  # 1 - cos u, 1 + cos u
            rho = c[row, None] - Hh * (B - 1.0)
            jac = 2 * Hh * sh * ch
            outer = S >= R
            # (r - delta)(r + delta) and (s + rho - r)(s + rho + r), delta = rho - s, without cancellation
            num_m = np.where(outer, R * B * R * A, S * B * (2 * Gg + S * A))
            num_p = np.where(outer, (2 * Gg + R * A) * (2 * S + R * A), S * A * (2 * R + S * A))
            with np.errstate(divide="ignore", invalid="ignore"):
                den = 2 * S * rho
                cap = _cap_from_factors(np.nan_to_num(num_m / den, nan=0.0), np.nan_to_num(num_p / den, nan=2.0), d)
            vals = F(rho) * rho ** (d - 1) * cap * jac * W
            total[part] += sigma * np.bincount(row, weights=vals.sum(axis=1), minlength=n)
        out[sl] = total
    return out


def ball_averages(F: PiecewisePolynomial, s, r, d: int, m: int) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    return ball_integrals(F, s, r, d, m) / (unit_ball_volume(d) * r.ravel() ** d)


def sphere_integrals(F: PiecewisePolynomial, s, r, d: int, m: int, weight: str = "one") -> np.ndarray:
    """``(1/Z_d) int_0^pi F(|y(phi)|) w(phi) sin^{d-2} phi dphi`` with ``w = 1`` or ``cos``.

    ``|y(phi)|^2 = s^2 + r^2 + 2 s r cos(phi)``: the point of the sphere
    ``|y - z| = r`` at angle ``phi`` from the outward direction of ``z``.
    """
    s = np.asarray(s, dtype=float).ravel()
    r = np.asarray(r, dtype=float).ravel()
    out = np.empty(s.size)
    z_d = sphere_weight_norm(d)
    knots = F.knots[F.knots > 0]
    for sl in _chunks(s.size):
        ss, rr = s[sl], r[sl]
        n = ss.size
        with np.errstate(divide="ignore", invalid="ignore"):
            cphi = (knots[None, :] ** 2 - ss[:, None] ** 2 - rr[:, None] ** 2) / (2 * ss[:, None] * rr[:, None])
        ph = np.arccos(np.clip(np.nan_to_num(cphi, nan=2.0, posinf=2.0, neginf=-2.0), -1, 1))
        edges = np.sort(np.concatenate([np.zeros((n, 1)), ph, np.full((n, 1), math.pi)], axis=1), axis=1)
        row, P, W = _panels(edges, m)
        cp = np.cos(P)
        y = np.sqrt(np.clip(ss[row, None] ** 2 + rr[row, None] ** 2 + 2 * ss[row, None] * rr[row, None] * cp, 0, None))
        vals = F(y) * np.sin(P) ** (d - 2) * W
        if weight == "cos":
            vals = vals * cp
        elif weight != "one":
            raise ValueError(f"unknown weight {weight!r}")
        out[sl] = np.bincount(row, weights=vals.sum(axis=1), minlength=n) / z_d
    return out


# ---------------------------------------------------------------------------
# exact d == 1 kernels on the line


def line_average(p: PiecewiseLinearProfile, c, r):
    """``(1/2r) int_{c-r}^{c+r} p``, exact."""
    c = np.asarray(c, dtype=float)
    r = np.asarray(r, dtype=float)
    return (p.antiderivative(c + r) - p.antiderivative(c - r)) / (2 * r)


def line_sphere_average(p: PiecewiseLinearProfile, c, r):
    return 0.5 * (np.interp(c - r, p.knots, p.values, 0, 0) + np.interp(c + r, p.knots, p.values, 0, 0))


def line_flux(p: PiecewiseLinearProfile, c, r):
    """``(1/2r) int_{c-r}^{c+r} p'``, exact."""
    return (np.interp(c + r, p.knots, p.values, 0, 0) - np.interp(c - r, p.knots, p.values, 0, 0)) / (2 * r)


def line_moment_of_derivative(p: PiecewiseLinearProfile, c: float, r: float, w0: float, w1: float) -> float:
    """``(1/2r) int_{c-r}^{c+r} p'(y) (w0 + w1 (y - c)) dy`` exact, by walking the knot intervals."""
    a, b = c - r, c + r
    k = p.knots
    edges = np.concatenate([[a], k[(k > a) & (k < b)], [b]])
    lo, hi = edges[:-1], edges[1:]
    mid = 0.5 * (lo + hi)
    slope = StepProfile(k, p.slopes)(mid)
    integral = slope * (w0 * (hi - lo) + 0.5 * w1 * ((hi - c) ** 2 - (lo - c) ** 2))
    return float(np.sum(integral) / (2 * r))


# ---------------------------------------------------------------------------
# public scalar API


def _refine_until(fn: Callable[[QuadratureConfig], float], cfg: QuadratureConfig) -> float:
    prev = fn(cfg)
    cur_cfg = cfg
    for _ in range(cfg.max_refine):
        cur_cfg = cur_cfg.refined()
        cur = fn(cur_cfg)
        if abs(cur - prev) <= cfg.atol * max(1.0, abs(cur)):
            return cur
        prev = cur
    if cfg.max_refine == 0:
        return prev
    raise QuadratureError(f"quadrature did not converge to atol={cfg.atol}")


def _line_of(F: PiecewiseLinearProfile) -> PiecewiseLinearProfile:
    return F.even_extension() if F.half_line else F


def ball_average(F, ball: BallSpec, cfg: QuadratureConfig = DEFAULT_QUAD) -> float:
    """Average of ``F(|y|)`` over ``ball``.

    ``F`` is a radial integrand (the profile of ``|f|`` in the operators).
    For ``d == 1`` it is averaged exactly over ``[s - r, s + r]``.
    """
    if ball.d == 1 and isinstance(F, PiecewiseLinearProfile):
        return float(line_average(_line_of(F), ball.s, ball.r))
    G = as_integrand(F)
    if ball.d == 1:
        return _line_generic_average(G, ball.s, ball.r)
    return _refine_until(lambda c: float(ball_averages(G, [ball.s], [ball.r], ball.d, c.radial_nodes)[0]), cfg)


def _line_generic_average(G: PiecewisePolynomial, s: float, r: float) -> float:
    # F(|y|) over [s - r, s + r] split at 0
    a, b = s - r, s + r
    total = 0.0
    if b > 0:
        total += float(G.moment(b, 1) - G.moment(max(a, 0.0), 1))
    if a < 0:
        total += float(G.moment(-a, 1) - G.moment(max(-b, 0.0), 1))
    return total / (2 * r)


def sphere_average(F, ball: BallSpec, cfg: QuadratureConfig = DEFAULT_QUAD) -> float:
    """Average of ``F(|y|)`` over the boundary sphere of ``ball`` (two-point rule in d=1)."""
    if ball.d == 1:
        G = as_integrand(F)
        return 0.5 * float(G(abs(ball.s - ball.r)) + G(ball.s + ball.r))
    G = as_integrand(F)
    if ball.s == 0:
        return float(G(ball.r))
    return _refine_until(lambda c: float(sphere_integrals(G, [ball.s], [ball.r], ball.d, c.angular_nodes)[0]), cfg)


def boundary_flux(F_abs, ball: BallSpec, cfg: QuadratureConfig = DEFAULT_QUAD) -> float:
    """Component of ``avg_B grad|f|`` along the outward direction of the ball centre.

    Divergence theorem: ``(d / r) * (1/Z_d) int F_abs(|y(phi)|) cos(phi) sin^{d-2}(phi) dphi``.
    For ``d == 1`` it is ``avg_B |f|'`` over ``[s - r, s + r]``.
    """
    if ball.d == 1:
        G = as_integrand(F_abs)
        return float(G(ball.s + ball.r) - G(abs(ball.s - ball.r))) / (2 * ball.r)
    if ball.s == 0:
        return 0.0
    G = as_integrand(F_abs)
    d, r = ball.d, ball.r
    return _refine_until(
        lambda c: d / r * float(sphere_integrals(G, [ball.s], [r], d, c.angular_nodes, "cos")[0]), cfg
    )


def weighted_sphere_average(F_abs, ball: BallSpec, cfg: QuadratureConfig = DEFAULT_QUAD, inward: bool = False) -> float:
    """``(d/r^2) avg_{dB} |f|(y) (zb - c).(y - c)`` with ``zb = c + r * xhat`` (``- r * xhat`` if inward).

    Evaluated on explicit boundary points ``y = c + r (cos phi, sin phi)``
    in the plane spanned by the centre direction, not via the flux kernel.
    """
    G = as_integrand(F_abs)
    d, s, r = ball.d, ball.s, ball.r
    sign = -1.0 if inward else 1.0
    if d == 1:
        # points c - r and c + r; (zb - c)(y - c) = sign * r * (y - c)
        return sign * 0.5 * float(G(s + r) - G(abs(s - r)))
    if s == 0:
        return 0.0

    def run(c: QuadratureConfig) -> float:
        m = c.angular_nodes
        knots = G.knots[G.knots > 0]
        with np.errstate(divide="ignore", invalid="ignore"):
            cphi = (knots**2 - s * s - r * r) / (2 * s * r)
        ph = np.arccos(np.clip(np.nan_to_num(cphi, nan=2.0, posinf=2.0, neginf=-2.0), -1, 1))
        edges = np.sort(np.concatenate([[0.0], ph, [math.pi]]))[None, :]
        _, P, W = _panels(edges, m)
        y1 = s + r * np.cos(P)
        y2 = r * np.sin(P)
        dot = sign * r * (y1 - s)  # (zb - c).(y - c), zb - c = sign * r * e1
        vals = G(np.hypot(y1, y2)) * dot * np.sin(P) ** (d - 2) * W
        return d / (r * r) * float(vals.sum()) / sphere_weight_norm(d)

    return _refine_until(run, cfg)


def solid_average(
    integrand: Callable[[np.ndarray, np.ndarray], np.ndarray],
    knots,
    ball: BallSpec,
    cfg: QuadratureConfig = DEFAULT_QUAD,
) -> float:
    """Direct two-dimensional quadrature of ``avg_B g`` (``d >= 2``).

    Polar coordinates about the origin: ``y = rho (cos th e + sin th e')``
    with ``e`` the outward direction of the ball centre.  ``integrand(rho,
    cos_th)`` must be smooth in ``th`` and piecewise smooth in ``rho`` with
    breaks at ``knots``.  The angular integral runs over the cap
    ``th <= th*(rho)`` cut out by the ball, with its own Gauss-Legendre
    rule; the radial integral uses knot panels, cosine-mapped on the
    partial-cap range to absorb the square-root behaviour of ``th*``.
    """
    d, s, r = ball.d, ball.s, ball.r
    if d < 2:
        raise ValueError("solid_average is for d >= 2")
    knots = np.asarray(knots, dtype=float)
    knots = knots[knots > 0]
    z_d = sphere_weight_norm(d)

    def angular(rho, top, m):
        # (1/Z_d) int_0^top g(rho, cos th) sin^{d-2} th dth for each rho
        x, w = gauss_legendre(m)
        th = 0.5 * top[:, None] * (x[None, :] + 1)
        wt = 0.5 * top[:, None] * w[None, :]
        vals = integrand(rho[:, None] * np.ones_like(th), np.cos(th)) * np.sin(th) ** (d - 2) * wt
        return vals.sum(axis=1) / z_d

    def run(c: QuadratureConfig) -> float:
        total = 0.0
        full = max(r - s, 0.0)
        if full > 0:
            edges = np.unique(np.concatenate([[0.0, full], knots[knots < full]]))[None, :]
            _, R, W = _panels(edges, c.radial_nodes)
            rho, w = R.ravel(), W.ravel()
            total += np.sum(angular(rho, np.full(rho.size, math.pi), c.angular_nodes) * rho ** (d - 1) * w)
        if s > 0:
            lo, hi = abs(s - r), s + r
            mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
            inner = knots[(knots > lo) & (knots < hi)]
            u = np.arccos(np.clip((mid - inner) / half, -1, 1))
            edges = np.unique(np.concatenate([[0.0, math.pi], u]))[None, :]
            _, U, W = _panels(edges, c.radial_nodes)
            U, W = U.ravel(), W.ravel()
            rho = mid - half * np.cos(U)
            jac = half * np.sin(U) * W
            cth = np.clip((s * s + rho * rho - r * r) / (2 * s * rho), -1, 1)
            total += np.sum(angular(rho, np.arccos(cth), c.angular_nodes) * rho ** (d - 1) * jac)
        return float(total * unit_sphere_area(d) / (unit_ball_volume(d) * r**d))

    return _refine_until(run, cfg)


_UNIT_WEIGHTS = {
    # w(y) as (coefficient of cos th, coefficient of rho, constant) in  grad|f|.w = G'(rho) (a cos th + b rho + c)
    "outward": lambda s, r: (1.0, 0.0, 0.0),
    "y": lambda s, r: (0.0, 1.0, 0.0),
    "center-minus-y": lambda s, r: (s, -1.0, 0.0),
    "outer-point-minus-y": lambda s, r: (s + r, -1.0, 0.0),
    "inner-point-minus-y": lambda s, r: (s - r, -1.0, 0.0),
}


def radial_gradient_moment(F_abs: PiecewiseLinearProfile, ball: BallSpec, target: str, cfg: QuadratureConfig = DEFAULT_QUAD) -> float:
    """``avg_B grad|f|(y) . w(y)`` by :func:`solid_average`.

    ``target`` selects ``w``: ``"center-minus-y"`` (``z - y``),
    ``"outward"`` (``e``), ``"y"`` (``y``), ``"outer-point-minus-y"``
    (``z + r e - y``), ``"inner-point-minus-y"`` (``z - r e - y``), where
    ``z = s e`` is the ball centre.  With ``grad|f|(y) = G'(|y|) y/|y|``
    each is ``G'(rho) (a cos th + b rho)``.  In d=1 the same quantities
    are computed exactly on intervals.
    """
    if target not in _UNIT_WEIGHTS:
        raise ValueError(f"unknown target {target!r}")
    s, r, d = ball.s, ball.r, ball.d
    if d == 1:
        line = _line_of(F_abs)
        table = {
            "center-minus-y": (0.0, -1.0),
            "outward": (1.0, 0.0),
            "y": (s, 1.0),
            "outer-point-minus-y": (r, -1.0),
            "inner-point-minus-y": (-r, -1.0),
        }
        w0, w1 = table[target]
        return line_moment_of_derivative(line, s, r, w0, w1)
    dG = abs_gradient_integrand(F_abs)
    a, b, c0 = _UNIT_WEIGHTS[target](s, r)

    def integrand(rho, cth):
        return dG(rho) * (a * cth + b * rho + c0)

    return solid_average(integrand, dG.knots, ball, cfg)
