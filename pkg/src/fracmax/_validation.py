"""Input validation shared by the estimator and the command line."""

from __future__ import annotations

import math
from typing import Optional

import numpy as np
from sklearn.utils.validation import check_array

from .corpus import named_function
from .maximal import Beta
from .profile import PiecewiseLinearProfile, RadialFunction

OPS = ("centered", "noncentered", "truncated", "mI")


def check_beta(beta, d, exploratory: bool = False) -> Beta:
    """Validated :class:`Beta`; ``beta >= 1`` needs ``exploratory``."""
    try:
        beta = float(beta)
        d_int = int(d)
    except (TypeError, ValueError):
        raise ValueError(f"beta and d must be numbers, got beta={beta!r}, d={d!r}") from None
    if d_int != d:
        raise ValueError(f"d must be an integer, got {d!r}")
    b = Beta(beta, d_int)
    if not b.in_theorem_range and not exploratory:
        raise ValueError(f"beta={beta} lies outside (0, 1); pass exploratory=True to allow 1 <= beta < d")
    return b


def check_function(fn, d: int):
    """A profile, radial function or registry name, returned as the solver's function type."""
    if isinstance(fn, str):
        return named_function(fn, d)
    if isinstance(fn, RadialFunction):
        if fn.d != d:
            raise ValueError(f"radial function lives in d={fn.d}, expected d={d}")
        return fn.line_profile() if d == 1 else fn
    if isinstance(fn, PiecewiseLinearProfile):
        if d == 1:
            return fn.even_extension() if fn.half_line else fn
        return RadialFunction(d, fn)
    if isinstance(fn, dict):
        return check_function(PiecewiseLinearProfile.from_dict(fn), d)
    raise TypeError(f"expected a profile, RadialFunction, dict or name, got {type(fn).__name__}")


def check_points(X, d: int) -> np.ndarray:
    """Evaluation coordinates from ``X``.

    ``X`` of shape ``(n,)`` or ``(n, 1)`` holds signed coordinates on the
    line or distances ``|x|`` for ``d > 1``; shape ``(n, d)`` with
    ``d > 1`` holds points of ``R^d`` and is reduced to their norms.
    """
    arr = np.asarray(X, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    arr = check_array(arr, dtype=float, ensure_2d=True, ensure_all_finite=True)
    if arr.shape[1] == 1:
        t = arr[:, 0]
        if d > 1 and np.any(t < 0):
            raise ValueError("radial coordinates must be nonnegative")
        return t
    if d > 1 and arr.shape[1] == d:
        return np.linalg.norm(arr, axis=1)
    raise ValueError(f"X must have 1 column (or {d} columns for points of R^{d}), got {arr.shape[1]}")


def check_op(op: str, eps: Optional[float]) -> str:
    if op not in OPS:
        raise ValueError(f"op must be one of {', '.join(OPS)}, got {op!r}")
    if op == "truncated" and (eps is None or not (math.isfinite(eps) and eps > 0)):
        raise ValueError("the truncated operator needs a positive eps")
    return op


def parse_grid(spec: str) -> np.ndarray:
    """``"start:stop:count"`` to ``numpy.linspace(start, stop, count)``."""
    parts = str(spec).split(":")
    if len(parts) != 3:
        raise ValueError(f"grid must be start:stop:count, got {spec!r}")
    try:
        a, b, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise ValueError(f"grid must be start:stop:count with numeric parts, got {spec!r}") from None
    if n < 1:
        raise ValueError("grid count must be at least 1")
    if not (math.isfinite(a) and math.isfinite(b)) or (n > 1 and not b > a):
        raise ValueError("grid needs finite start < stop")
    return np.linspace(a, b, n)
