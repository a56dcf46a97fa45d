"""Exact calculus for compactly supported piecewise-linear functions.

Every function the library handles is a :class:`PiecewiseLinearProfile`
(continuous, linear between knots, zero outside its support).  Averages,
moments and norms are computed in closed form on the knot intervals, so
downstream identity checks are limited by optimizer and quadrature error
only.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Union

import numpy as np
from scipy.special import gamma

KNOT_MERGE_TOL = 1e-12


def unit_ball_volume(d: int) -> float:
    """Volume of the unit ball in R^d."""
    return math.pi ** (d / 2) / gamma(d / 2 + 1)


def unit_sphere_area(d: int) -> float:
    """Hausdorff measure of the unit sphere S^{d-1} (equals 2 for d=1)."""
    return d * unit_ball_volume(d)


def _as_readonly(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


def _merge_knots(knots: np.ndarray, tol: float = KNOT_MERGE_TOL) -> np.ndarray:
    knots = np.unique(knots)
    if knots.size < 2:
        return knots
    keep = np.concatenate([[True], np.diff(knots) > tol * np.maximum(1.0, np.abs(knots[1:]))])
    return knots[keep]


@dataclass(frozen=True, eq=False)
class PiecewiseLinearProfile:
    """Continuous piecewise-linear function with compact support.

    Parameters
    ----------
    knots : array_like
        Strictly increasing breakpoints, at least two.
    values : array_like
        Function values at the knots.  The function is linear in between
        and identically zero outside ``[knots[0], knots[-1]]``.
    half_line : bool, default=False
        Profile of a radial function on ``[0, inf)``.  The first knot must
        then be nonnegative, and when it equals 0 the value there may be
        nonzero.
    """

    knots: np.ndarray
    values: np.ndarray
    half_line: bool = False

    def __post_init__(self):
        knots = _as_readonly(self.knots)
        values = _as_readonly(self.values)
        if knots.ndim != 1 or knots.size < 2:
            raise ValueError("a profile needs at least two knots")
        if values.shape != knots.shape:
            raise ValueError("knots and values must have the same length")
        if not (np.all(np.isfinite(knots)) and np.all(np.isfinite(values))):
            raise ValueError("knots and values must be finite")
        if np.any(np.diff(knots) <= 0):
            raise ValueError("knots must be strictly increasing")
        if values[-1] != 0:
            raise ValueError("value at the last knot must be 0")
        if self.half_line:
            if knots[0] < 0:
                raise ValueError("radial profile knots must be nonnegative")
            if knots[0] > 0 and values[0] != 0:
                raise ValueError("value at the first knot must be 0 unless it sits at the origin")
        elif values[0] != 0:
            raise ValueError("value at the first knot must be 0")
        object.__setattr__(self, "knots", knots)
        object.__setattr__(self, "values", values)

    # -- construction helpers -------------------------------------------------

    @classmethod
    def zero(cls, a: float = -1.0, b: float = 1.0) -> "PiecewiseLinearProfile":
        return cls([a, b], [0.0, 0.0])

    @classmethod
    def from_dict(cls, data: dict) -> "PiecewiseLinearProfile":
        unknown = set(data) - {"knots", "values", "half_line", "name"}
        if unknown:
            raise ValueError(f"unknown profile keys: {sorted(unknown)}")
        return cls(data["knots"], data["values"], bool(data.get("half_line", False)))

    @classmethod
    def from_json(cls, text: str) -> "PiecewiseLinearProfile":
        return cls.from_dict(json.loads(text))

    def to_dict(self) -> dict:
        out = {"knots": self.knots.tolist(), "values": self.values.tolist()}
        if self.half_line:
            out["half_line"] = True
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    # -- basic queries --------------------------------------------------------

    @property
    def slopes(self) -> np.ndarray:
        return np.diff(self.values) / np.diff(self.knots)

    @property
    def support(self) -> tuple[float, float]:
        return float(self.knots[0]), float(self.knots[-1])

    def is_zero(self) -> bool:
        return not np.any(self.values)

    def __call__(self, t):
        return evaluate(self, t)

    def __repr__(self) -> str:
        return f"PiecewiseLinearProfile(knots={self.knots.tolist()}, values={self.values.tolist()})"

    # -- algebra --------------------------------------------------------------

    def _resample(self, knots: np.ndarray) -> np.ndarray:
        return evaluate(self, knots)

    def __add__(self, other: "PiecewiseLinearProfile") -> "PiecewiseLinearProfile":
        if not isinstance(other, PiecewiseLinearProfile):
            return NotImplemented
        knots = _merge_knots(np.concatenate([self.knots, other.knots]))
        values = self._resample(knots) + other._resample(knots)
        values[0] = values[0] if (self.half_line and knots[0] == 0) else 0.0
        values[-1] = 0.0
        return PiecewiseLinearProfile(knots, values, self.half_line and other.half_line)

    def __sub__(self, other):
        return self + (-1.0) * other

    def __mul__(self, c: float) -> "PiecewiseLinearProfile":
        return PiecewiseLinearProfile(self.knots, float(c) * self.values, self.half_line)

    __rmul__ = __mul__

    def __neg__(self):
        return (-1.0) * self

    def dilate(self, a: float) -> "PiecewiseLinearProfile":
        """Return ``t -> p(t / a)`` for ``a > 0``."""
        if a <= 0:
            raise ValueError("dilation factor must be positive")
        return PiecewiseLinearProfile(a * self.knots, self.values, self.half_line)

    def even_extension(self) -> "PiecewiseLinearProfile":
        """Extend a half-line profile ``F`` to the even function ``F(|t|)`` on R."""
        if not self.half_line:
            raise ValueError("even_extension needs a half-line profile")
        k, v = self.knots, self.values
        if k[0] == 0:
            knots = np.concatenate([-k[:0:-1], k])
            values = np.concatenate([v[:0:-1], v])
        else:
            knots = np.concatenate([-k[::-1], k])
            values = np.concatenate([v[::-1], v])
        return PiecewiseLinearProfile(knots, values)

    def restrict_half_line(self) -> "PiecewiseLinearProfile":
        """Restriction to ``[0, inf)`` as a radial profile."""
        if self.knots[-1] <= 0:
            raise ValueError("profile has no support on (0, inf)")
        inner = self.knots[self.knots > 0]
        knots = np.concatenate([[0.0], inner])
        return PiecewiseLinearProfile(knots, evaluate(self, knots), half_line=True)

    # -- integrals ------------------------------------------------------------

    def antiderivative(self, t) -> np.ndarray:
        """``int_{-inf}^t p``, exact (piecewise quadratic in t)."""
        t = np.asarray(t, dtype=float)
        k, v, m = self.knots, self.values, self._slopes
        cum = self._cum
        idx = np.clip(np.searchsorted(k, t, side="right") - 1, 0, k.size - 2)
        dt = np.clip(t, k[0], k[-1]) - k[idx]
        return cum[idx] + v[idx] * dt + 0.5 * m[idx] * dt * dt

    def integral(self) -> float:
        return float(self._cum[-1])

    @cached_property
    def _cum(self) -> np.ndarray:
        v = self.values
        return np.concatenate([[0.0], np.cumsum(0.5 * (v[:-1] + v[1:]) * np.diff(self.knots))])

    @cached_property
    def _slopes(self) -> np.ndarray:
        return np.diff(self.values) / np.diff(self.knots)


@dataclass(frozen=True, eq=False)
class StepProfile:
    """Piecewise-constant function (the a.e. derivative of a profile).

    ``slopes[i]`` is the value on ``(knots[i], knots[i+1])``; the function
    is zero outside the knot range.
    """

    knots: np.ndarray
    slopes: np.ndarray

    def __post_init__(self):
        knots = _as_readonly(self.knots)
        slopes = _as_readonly(self.slopes)
        if knots.ndim != 1 or knots.size < 2 or slopes.shape != (knots.size - 1,):
            raise ValueError("need len(slopes) == len(knots) - 1 >= 1")
        if np.any(np.diff(knots) <= 0):
            raise ValueError("knots must be strictly increasing")
        if not np.all(np.isfinite(slopes)):
            raise ValueError("slopes must be finite")
        object.__setattr__(self, "knots", knots)
        object.__setattr__(self, "slopes", slopes)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.knots, t, side="right") - 1
        inside = (idx >= 0) & (idx < self.slopes.size)
        return np.where(inside, self.slopes[np.clip(idx, 0, self.slopes.size - 1)], 0.0)

    def __add__(self, other: "StepProfile") -> "StepProfile":
        knots = _merge_knots(np.concatenate([self.knots, other.knots]))
        mid = 0.5 * (knots[:-1] + knots[1:])
        return StepProfile(knots, self(mid) + other(mid))

    def __mul__(self, c: float) -> "StepProfile":
        return StepProfile(self.knots, float(c) * self.slopes)

    __rmul__ = __mul__

    def l1_norm(self) -> float:
        return float(np.sum(np.abs(self.slopes) * np.diff(self.knots)))

    def integral_to(self, t) -> np.ndarray:
        """``int_{-inf}^t g``, exact."""
        t = np.asarray(t, dtype=float)
        k, s = self.knots, self.slopes
        cum = np.concatenate([[0.0], np.cumsum(s * np.diff(k))])
        idx = np.clip(np.searchsorted(k, t, side="right") - 1, 0, s.size - 1)
        dt = np.clip(t, k[0], k[-1]) - k[idx]
        return cum[idx] + s[idx] * dt

    def equals(self, other: "StepProfile", atol: float = 1e-12) -> bool:
        knots = _merge_knots(np.concatenate([self.knots, other.knots]))
        mid = 0.5 * (knots[:-1] + knots[1:])
        return bool(np.allclose(self(mid), other(mid), rtol=0, atol=atol))


@dataclass(frozen=True, eq=False)
class RadialFunction:
    """``f(x) = F(|x|)`` on R^d with a half-line piecewise-linear profile ``F``."""

    d: int
    F: PiecewiseLinearProfile

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 1:
            raise ValueError("dimension must be a positive integer")
        object.__setattr__(self, "d", int(self.d))
        if not self.F.half_line:
            object.__setattr__(self, "F", self.F.restrict_half_line())

    @property
    def abs_F(self) -> PiecewiseLinearProfile:
        return abs_profile(self.F)

    def line_profile(self) -> PiecewiseLinearProfile:
        """Even extension, the d=1 representative on R."""
        return self.F.even_extension()

    def dilate(self, a: float) -> "RadialFunction":
        return RadialFunction(self.d, self.F.dilate(a))

    def scale(self, c: float) -> "RadialFunction":
        return RadialFunction(self.d, c * self.F)

    def l1_norm(self) -> float:
        return self.d * unit_ball_volume(self.d) * _radial_moment_abs(self.F, self.d)

    def grad_l1_norm(self) -> float:
        return radial_lq_norm(weak_derivative(self.F), 1.0, self.d)

    def w11_norm(self) -> float:
        return w11_radial_norm(self)

    def is_zero(self) -> bool:
        return self.F.is_zero()


Field = Union["SampledField", StepProfile, PiecewiseLinearProfile]


@dataclass(frozen=True, eq=False)
class SampledField:
    """Values of a field on an explicit increasing grid with a quadrature rule."""

    grid: np.ndarray
    values: np.ndarray
    rule: str = "trapezoid"

    def __post_init__(self):
        grid = _as_readonly(self.grid)
        values = _as_readonly(self.values)
        if grid.ndim != 1 or values.shape != grid.shape:
            raise ValueError("grid and values must be 1-D of equal length")
        if grid.size >= 2 and np.any(np.diff(grid) <= 0):
            raise ValueError("grid must be strictly increasing")
        if self.rule not in ("trapezoid", "simpson"):
            raise ValueError(f"unknown quadrature rule {self.rule!r}")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)

    def integrate(self, integrand: np.ndarray) -> float:
        if self.grid.size < 2:
            return 0.0
        if self.rule == "simpson":
            from scipy.integrate import simpson

            return float(simpson(integrand, x=self.grid))
        return float(np.trapezoid(integrand, self.grid))


# ---------------------------------------------------------------------------
# operations


def evaluate(p: PiecewiseLinearProfile, t):
    """Evaluate ``p`` at ``t`` (scalar or array); zero outside the support."""
    out = np.interp(t, p.knots, p.values, left=0.0, right=0.0)
    return float(out) if np.ndim(out) == 0 else out


def abs_profile(p: PiecewiseLinearProfile) -> PiecewiseLinearProfile:
    """``|p|`` with a knot inserted at each sign-change crossing."""
    k, v = p.knots, p.values
    cross = np.nonzero(v[:-1] * v[1:] < 0)[0]
    if cross.size:
        tz = k[cross] - v[cross] * (k[cross + 1] - k[cross]) / (v[cross + 1] - v[cross])
        knots = np.insert(k, cross + 1, tz)
        values = np.insert(np.abs(v), cross + 1, 0.0)
        # crossings that land on top of a knot after rounding
        keep = np.concatenate([[True], np.diff(knots) > KNOT_MERGE_TOL * np.maximum(1.0, np.abs(knots[1:]))])
        knots, values = knots[keep], values[keep]
    else:
        knots, values = k, np.abs(v)
    return PiecewiseLinearProfile(knots, values, p.half_line)


def weak_derivative(p: PiecewiseLinearProfile) -> StepProfile:
    """Slope per knot interval.

    For half-line profiles with a nonzero value at the origin nothing is
    added at 0: that is the derivative of the radial profile, not of its
    zero extension.
    """
    return StepProfile(p.knots, p.slopes)


def total_variation(p: PiecewiseLinearProfile) -> float:
    """Knot walk: sum of absolute value jumps between consecutive knots."""
    return float(np.sum(np.abs(np.diff(p.values))))


def l1_norm(p: PiecewiseLinearProfile) -> float:
    """``int |p|`` over R, exact."""
    return abs_profile(p).integral()


def _check_q(q: float) -> float:
    q = float(q)
    if not q >= 1:
        raise ValueError("exponent q must be >= 1")
    return q


def _pl_power_integral(a, b, va, vb, q, d: int = 1):
    """``int_a^b v(t)^q t^{d-1} dt`` for nonnegative linear ``v``; closed form when d == 1."""
    if d == 1:
        dv = vb - va
        flat = np.abs(dv) <= 1e-14 * np.maximum(np.abs(va), np.abs(vb)) + 1e-300
        safe = np.where(flat, 1.0, dv)
        curved = (b - a) * (vb ** (q + 1) - va ** (q + 1)) / ((q + 1) * safe)
        return np.where(flat, (b - a) * 0.5 * (va**q + vb**q), curved)
    from scipy.integrate import quad

    out = 0.0
    for ai, bi, vai, vbi in zip(a, b, va, vb):
        out += quad(lambda t: (vai + (vbi - vai) * (t - ai) / (bi - ai)) ** q * t ** (d - 1), ai, bi)[0]
    return out


def lq_line_norm(g: Field, q: float) -> float:
    """L^q(R) norm of a step function, piecewise-linear function or sampled field."""
    q = _check_q(q)
    if isinstance(g, StepProfile):
        return float(np.sum(np.abs(g.slopes) ** q * np.diff(g.knots)) ** (1 / q))
    if isinstance(g, PiecewiseLinearProfile):
        a = abs_profile(g)
        k, v = a.knots, a.values
        total = np.sum(_pl_power_integral(k[:-1], k[1:], v[:-1], v[1:], q))
        return float(total ** (1 / q))
    if isinstance(g, SampledField):
        return g.integrate(np.abs(g.values) ** q) ** (1 / q)
    raise TypeError(f"unsupported field type {type(g).__name__}")


def radial_lq_norm(g: Field, q: float, d: int) -> float:
    """L^q(R^d) norm of the radial field ``x -> g(|x|)``.

    Uses ``||g||_q^q = sigma_d int_0^inf |g(t)|^q t^{d-1} dt``; only the part
    of ``g`` on ``[0, inf)`` contributes.
    """
    q = _check_q(q)
    sigma = unit_sphere_area(d)
    if isinstance(g, StepProfile):
        a = np.clip(g.knots[:-1], 0, None)
        b = np.clip(g.knots[1:], 0, None)
        total = np.sum(np.abs(g.slopes) ** q * (b**d - a**d) / d)
        return float((sigma * total) ** (1 / q))
    if isinstance(g, PiecewiseLinearProfile):
        a = abs_profile(g)
        k, v = a.knots, a.values
        sel = k[1:] > 0
        lo = np.clip(k[:-1][sel], 0, None)
        vlo = evaluate(a, lo)
        total = _pl_power_integral(lo, k[1:][sel], vlo, v[1:][sel], q, d)
        return float((sigma * np.sum(total)) ** (1 / q))
    if isinstance(g, SampledField):
        grid = g.grid
        if np.any(grid < 0):
            raise ValueError("radial grid must be nonnegative")
        return (sigma * g.integrate(np.abs(g.values) ** q * grid ** (d - 1))) ** (1 / q)
    raise TypeError(f"unsupported field type {type(g).__name__}")


def _radial_moment_abs(F: PiecewiseLinearProfile, d: int) -> float:
    """``int_0^inf |F(t)| t^{d-1} dt``, exact."""
    a = abs_profile(F)
    k, v, m = a.knots, a.values, a.slopes
    lo = np.clip(k[:-1], 0, None)
    hi = np.clip(k[1:], 0, None)
    vlo = v[:-1] + m * (lo - k[:-1])
    # int (vlo + m (t - lo)) t^{d-1} dt on [lo, hi]
    c0 = vlo - m * lo
    total = c0 * (hi**d - lo**d) / d + m * (hi ** (d + 1) - lo ** (d + 1)) / (d + 1)
    return float(np.sum(total))


def w11_radial_norm(rf: RadialFunction) -> float:
    """``||f||_1 + ||grad f||_1`` on R^d."""
    return rf.l1_norm() + rf.grad_l1_norm()


def w11_line_norm(p: PiecewiseLinearProfile) -> float:
    return l1_norm(p) + weak_derivative(p).l1_norm()
