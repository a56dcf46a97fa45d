"""Fractional maximal functions of piecewise-linear W^{1,1} functions.

Evaluate ``M_beta f`` and its non-centered, truncated and restricted
variants on the line and for radial functions in ``R^d``, compute the
derivative through the good-ball representation formula, and run the
numerical checks in :mod:`fracmax.verify`.
"""

__version__ = "0.1.0"

from .profile import PiecewiseLinearProfile, RadialFunction, SampledField  # noqa: E402
from .maximal import (  # noqa: E402
    Beta,
    GoodRadiusResult,
    NoncenteredResult,
    SolverConfig,
    centered_value,
    centered_values,
    mI_value,
    noncentered_value,
    truncated_value,
)
from .derivative import derivative_field, fd_derivative, luiro_derivative  # noqa: E402
from .estimator import FractionalMaximalTransformer  # noqa: E402

__all__ = [
    "__version__",
    "PiecewiseLinearProfile",
    "RadialFunction",
    "SampledField",
    "Beta",
    "GoodRadiusResult",
    "NoncenteredResult",
    "SolverConfig",
    "centered_value",
    "centered_values",
    "mI_value",
    "noncentered_value",
    "truncated_value",
    "derivative_field",
    "fd_derivative",
    "luiro_derivative",
    "FractionalMaximalTransformer",
]
