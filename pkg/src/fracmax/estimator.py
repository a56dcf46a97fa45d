"""Scikit-learn style transformer mapping points to maximal-function features."""

from __future__ import annotations

from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_beta, check_function, check_op, check_points
from .derivative import luiro_from_result, luiro_noncentered
from .maximal import DEFAULT_SOLVER, SolverConfig, centered_values, mI_values, noncentered_values, truncated_values

FEATURES = ("value", "smallest_radius", "derivative")


class FractionalMaximalTransformer(TransformerMixin, BaseEstimator):
    """Evaluate a fractional maximal function of a fixed profile at the rows of ``X``.

    Parameters
    ----------
    function : PiecewiseLinearProfile, RadialFunction, dict or str
        The function ``f``; strings name registry functions (``"tent"``, ...).
    beta : float, default=0.5
    d : int, default=1
    op : {"centered", "noncentered", "truncated", "mI"}, default="centered"
    eps : float, optional
        Truncation radius for ``op="truncated"``.
    solver : SolverConfig, optional
    exploratory : bool, default=False
        Allow ``1 <= beta < d``.

    Attributes
    ----------
    function_ : PiecewiseLinearProfile or RadialFunction
    beta_ : Beta
    n_features_in_ : int

    Notes
    -----
    ``transform`` returns columns ``value``, ``smallest_radius`` and
    ``derivative`` (the signed radial component from the representation
    formula; for the non-centered operator the radius column holds the
    optimal ball radius).  For the truncated and restricted operators the
    formula is evaluated at the smallest admissible maximizing ball, which
    is the derivative only when that ball is interior to the radius
    constraint.  Zero functions give zeros and a NaN radius.

    Examples
    --------
    >>> est = FractionalMaximalTransformer("tent", beta=0.5).fit([[0.0]])
    >>> round(float(est.transform([[0.0]])[0, 0]), 6)
    0.544331
    """

    def __init__(
        self,
        function=None,
        beta: float = 0.5,
        d: int = 1,
        op: str = "centered",
        eps: Optional[float] = None,
        solver: Optional[SolverConfig] = None,
        exploratory: bool = False,
    ):
        self.function = function
        self.beta = beta
        self.d = d
        self.op = op
        self.eps = eps
        self.solver = solver
        self.exploratory = exploratory

    def fit(self, X=None, y=None):
        if self.function is None:
            raise ValueError("function must be set before fitting")
        self.beta_ = check_beta(self.beta, self.d, self.exploratory)
        self.function_ = check_function(self.function, self.beta_.d)
        check_op(self.op, self.eps)
        self.solver_ = DEFAULT_SOLVER if self.solver is None else self.solver
        if X is not None:
            arr = np.asarray(X, dtype=float)
            self.n_features_in_ = 1 if arr.ndim == 1 else arr.shape[1]
            check_points(arr, self.beta_.d)
        else:
            self.n_features_in_ = 1
        return self

    def transform(self, X) -> np.ndarray:
        check_is_fitted(self, "function_")
        t = check_points(X, self.beta_.d)
        if self.op == "mI" and np.any(t == 0):
            raise ValueError("the restricted operator needs points away from the origin")
        f, b, cfg = self.function_, self.beta_, self.solver_
        out = np.empty((t.size, 3))
        if self.op == "noncentered":
            for i, r in enumerate(noncentered_values(f, t, b, cfg)):
                out[i] = (r.value, np.nan if r.degenerate else r.r_opt, luiro_noncentered(f, r, b, cfg))
            return out
        if self.op == "centered":
            res = centered_values(f, t, b, cfg)
        elif self.op == "truncated":
            res = truncated_values(f, t, b, self.eps, cfg)
        else:
            res = mI_values(f, t, b, cfg)
        for i, r in enumerate(res):
            out[i] = (r.value, np.nan if r.degenerate else r.smallest, luiro_from_result(f, r, cfg))
        return out

    def get_feature_names_out(self, input_features=None) -> np.ndarray:
        return np.array(FEATURES, dtype=object)
