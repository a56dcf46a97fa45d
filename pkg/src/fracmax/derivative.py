"""Derivatives of the maximal function: representation formula and finite differences.

At a differentiability point the derivative of ``M_beta f`` equals
``r^beta * avg_B grad|f|`` for any good ball ``B``.  For radial functions
the gradient points along ``+-x/|x|``, so a single signed radial component
is computed, the outward flux of ``|f|`` through the good ball divided by
its volume.  Central differences of the maximal function itself provide
an independent oracle, with a Richardson pair ``h, h/2`` to flag kinks.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .geometry import BallSpec, boundary_flux, line_flux
from .maximal import (
    DEFAULT_SOLVER,
    Beta,
    FunctionLike,
    GoodRadiusResult,
    NoncenteredResult,
    SolverConfig,
    _Target,
    centered_values,
    noncentered_value,
)
from .profile import PiecewiseLinearProfile, RadialFunction, SampledField, lq_line_norm, radial_lq_norm

REGIONS = ("Omega1", "Omega2plus", "Omega2minus")
FD_REL = 1e-4
RICHARDSON_RTOL = 1e-6


@dataclass(frozen=True)
class DerivativeSample:
    """Derivative data at one point.

    ``region`` is ``"Omega1"`` when the smallest good radius is at most
    ``|t|/4``, otherwise ``"Omega2plus"`` / ``"Omega2minus"`` by the sign
    of ``luiro * t``.  ``fd_consistent`` is False when the Richardson pair
    disagrees, a sign of a kink within ``h``.
    """

    t: float
    M: float
    good_radius: float
    luiro: float
    fd: float
    region: str
    unique_radius: bool
    fd_consistent: bool = True

    @property
    def clean(self) -> bool:
        return self.unique_radius and self.fd_consistent

    def to_dict(self) -> dict:
        return {
            "t": self.t,
            "M": self.M,
            "r_good": self.good_radius,
            "luiro": self.luiro,
            "fd": self.fd,
            "region": self.region,
            "unique_radius": self.unique_radius,
            "fd_consistent": self.fd_consistent,
        }


@dataclass(frozen=True)
class DerivativeField:
    """Samples of the derivative on an increasing grid and their ``L^q`` norm."""

    grid: np.ndarray
    samples: tuple
    lq_norm: float
    q: float
    d: int
    component: str = "luiro"
    meta: dict = field(default_factory=dict)

    @property
    def luiro(self) -> np.ndarray:
        return np.array([s.luiro for s in self.samples])

    @property
    def fd(self) -> np.ndarray:
        return np.array([s.fd for s in self.samples])

    @property
    def values(self) -> np.ndarray:
        return np.array([s.M for s in self.samples])

    def to_csv(self) -> str:
        return samples_to_csv(self.samples)


CSV_COLUMNS = ("t", "M", "r_good", "luiro", "fd", "region", "unique_radius")


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def samples_to_csv(samples: Sequence[DerivativeSample]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for s in samples:
        row = s.to_dict()
        w.writerow([_fmt(row[c]) for c in CSV_COLUMNS])
    return buf.getvalue()


def region_of(t: float, r_good: float, luiro: float) -> str:
    if r_good <= abs(t) / 4:
        return "Omega1"
    return "Omega2plus" if luiro * t > 0 else "Omega2minus"


def _flux_at(tg: _Target, c: float, r: float) -> float:
    if tg.d == 1:
        return float(line_flux(tg.p, c, r))
    if c == 0:
        return 0.0
    return boundary_flux(tg.F_abs, BallSpec(abs(c), r, tg.d), tg.cfg.quad)


def luiro_from_result(f: FunctionLike, res: GoodRadiusResult, cfg: SolverConfig = DEFAULT_SOLVER) -> float:
    """``r^beta * avg_B grad|f| . xhat`` at the smallest good radius of ``res``."""
    if res.degenerate:
        return 0.0
    tg = _Target(f, res.d, cfg)
    r = res.smallest
    return r**res.beta * _flux_at(tg, res.point, r)


def luiro_noncentered(f: FunctionLike, res: NoncenteredResult, b: Beta, cfg: SolverConfig = DEFAULT_SOLVER) -> float:
    """``r~^beta * avg_{B~} grad|f| . xhat`` at the non-centered good ball."""
    if res.degenerate:
        return 0.0
    tg = _Target(f, b.d, cfg)
    return res.r_opt**b.beta * _flux_at(tg, res.s_opt, res.r_opt)


def luiro_derivative(
    f: FunctionLike, t: float, b: Beta, which: str = "centered", cfg: SolverConfig = DEFAULT_SOLVER
) -> float:
    """Derivative of the maximal function by the representation formula.

    Parameters
    ----------
    which : {"centered", "noncentered"}

    Returns
    -------
    float
        Signed component along ``x/|x|`` (plain derivative on the line).
        Zero when ``f`` vanishes identically.
    """
    if which == "centered":
        res = centered_values(f, [t], b, cfg)[0]
        return luiro_from_result(f, res, cfg)
    if which == "noncentered":
        res = noncentered_value(f, t, b, cfg)
        return luiro_noncentered(f, res, b, cfg)
    raise ValueError("which must be 'centered' or 'noncentered'")


def default_step(t: float) -> float:
    return FD_REL * max(1.0, abs(t))


def _fd_points(t: np.ndarray, h: np.ndarray) -> np.ndarray:
    return np.concatenate([t + h, t - h, t + h / 2, t - h / 2])


def fd_derivatives(f: FunctionLike, ts, b: Beta, h=None, cfg: SolverConfig = DEFAULT_SOLVER):
    """Central differences with steps ``h`` and ``h/2`` at many points.

    Returns ``(fd_h, fd_h2, consistent)``.
    """
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    hs = np.array([default_step(t) for t in ts]) if h is None else np.broadcast_to(np.asarray(h, dtype=float), ts.shape)
    if np.any(hs <= 0):
        raise ValueError("h must be positive")
    if b.d > 1 and np.any(ts - hs < 0):
        raise ValueError("need t - h >= 0 for radial points")
    pts = _fd_points(ts, hs)
    vals = np.array([r.value for r in centered_values(f, pts, b, cfg)]).reshape(4, ts.size)
    d1 = (vals[0] - vals[1]) / (2 * hs)
    d2 = (vals[2] - vals[3]) / hs
    consistent = np.abs(d1 - d2) <= RICHARDSON_RTOL * np.maximum(1.0, np.abs(d2)) + 1e-9
    return d1, d2, consistent


def fd_derivative(f: FunctionLike, t: float, b: Beta, h: Optional[float] = None, cfg: SolverConfig = DEFAULT_SOLVER) -> float:
    """``(M f(t + h) - M f(t - h)) / (2h)``; ``h`` defaults to ``1e-4 * max(1, |t|)``."""
    d1, _, _ = fd_derivatives(f, [t], b, None if h is None else [h], cfg)
    return float(d1[0])


def derivative_samples(
    f: FunctionLike,
    b: Beta,
    grid,
    cfg: SolverConfig = DEFAULT_SOLVER,
    with_fd: bool = True,
) -> list:
    grid = np.atleast_1d(np.asarray(grid, dtype=float))
    res = centered_values(f, grid, b, cfg)
    tg = _Target(f, b.d, cfg)
    luiro = np.array([0.0 if r.degenerate else r.smallest**b.beta * _flux_at(tg, r.point, r.smallest) for r in res])
    if with_fd:
        hs = np.array([default_step(t) for t in grid])
        if b.d > 1:
            hs = np.minimum(hs, np.where(grid > 0, grid, hs))
        fd1, _, ok = fd_derivatives(f, grid, b, hs, cfg)
    else:
        fd1 = np.full(grid.size, math.nan)
        ok = np.ones(grid.size, dtype=bool)
    out = []
    for i, r in enumerate(res):
        t = float(grid[i])
        rg = r.smallest if not r.degenerate else math.nan
        region = region_of(t, rg, luiro[i]) if not r.degenerate else "Omega2minus"
        out.append(
            DerivativeSample(t, float(r.value), float(rg), float(luiro[i]), float(fd1[i]), region, bool(r.unique_radius or r.degenerate), bool(ok[i]))
        )
    return out


def field_norm(grid: np.ndarray, values: np.ndarray, q: float, d: int, radial: bool, rule: str = "trapezoid") -> float:
    sf = SampledField(grid, values, rule)
    if radial:
        return radial_lq_norm(sf, q, d)
    return lq_line_norm(sf, q)


def derivative_field(
    f: FunctionLike,
    b: Beta,
    grid,
    cfg: SolverConfig = DEFAULT_SOLVER,
    with_fd: bool = True,
    component: str = "luiro",
    rule: str = "trapezoid",
) -> DerivativeField:
    """Derivative samples on ``grid`` plus the ``L^q`` norm of one component.

    For a function on the line the grid is signed and the norm uses the line
    measure.  For a radial function the grid is in ``|x|`` and the norm
    carries the weight ``sigma_d t^{d-1}`` (which doubles the ``d = 1``
    half-line integral).  Grids for ``d > 1`` must avoid ``t = 0``.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2 or np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be strictly increasing with at least two points")
    if component not in ("luiro", "fd"):
        raise ValueError(f"component must be 'luiro' or 'fd', got {component!r}")
    radial = isinstance(f, RadialFunction) or (isinstance(f, PiecewiseLinearProfile) and f.half_line)
    if b.d > 1 and grid[0] <= 0:
        raise ValueError("radial grids in d > 1 must avoid t = 0")
    if radial and grid[0] < 0:
        raise ValueError("radial grids must be nonnegative")
    samples = derivative_samples(f, b, grid, cfg, with_fd=with_fd or component == "fd")
    vals = np.array([getattr(s, component) for s in samples])
    norm = field_norm(grid, vals, b.q, b.d, radial, rule)
    return DerivativeField(grid, tuple(samples), float(norm), b.q, b.d, component)


def tail_grid(center_lo: float, center_hi: float, scale: float, n_core: int, per_decade: int = 24, decades: float = 7.0) -> np.ndarray:
    """Dense uniform core on ``[center_lo, center_hi]`` with log-spaced tails beyond it (line)."""
    core = np.linspace(center_lo, center_hi, n_core)
    step = (center_hi - center_lo) / max(n_core - 1, 1)
    tail = step * np.geomspace(1.0, 10**decades * scale / step, int(per_decade * (decades + math.log10(scale / step))) + 2)[1:]
    right = center_hi + tail
    left = center_lo - tail[::-1]
    return np.concatenate([left, core, right])


def line_norm_grid(p: PiecewiseLinearProfile, n_core: int = 2000, per_decade: int = 24, decades: float = 7.0) -> np.ndarray:
    """Grid for ``L^q(R)`` norms of derivative fields of a line profile."""
    a, b = p.support
    w = b - a
    return tail_grid(a - w, b + w, max(w, 1.0), n_core, per_decade, decades)


def radial_norm_grid(F: PiecewiseLinearProfile, n_core: int = 400, per_decade: int = 24, decades: float = 5.0) -> np.ndarray:
    """Grid on ``(0, inf)`` for radial ``L^q`` norms: log near 0, uniform core, log tail."""
    rho = float(F.knots[-1])
    core_hi = 2 * rho
    step = core_hi / n_core
    inner = np.geomspace(1e-4 * rho, step, per_decade * 4 + 1)[:-1]
    core = np.linspace(step, core_hi, n_core)
    tail = core_hi * np.geomspace(1.0, 10**decades, int(per_decade * decades) + 1)[1:]
    return np.concatenate([inner, core, tail])
