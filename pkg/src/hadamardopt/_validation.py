"""Input checks shared by the estimator wrappers."""
from __future__ import annotations

import numbers

import numpy as np
from sklearn.utils.validation import check_array

from .errors import BadOrder
from .funcspace import ScalarField, corpus_get


def check_field(fn) -> ScalarField:
    """A corpus id (``"piecewise_pow_n:5"`` style parameters allowed) or a ready field."""
    if isinstance(fn, ScalarField):
        return fn
    if isinstance(fn, str):
        return corpus_get(fn)
    raise TypeError(f"expected a corpus id or ScalarField, got {type(fn).__name__}")


def check_order(n, name: str = "order") -> int:
    if isinstance(n, bool) or not isinstance(n, numbers.Integral) or n < 1:
        raise BadOrder(f"{name} must be a positive integer, got {n!r}")
    return int(n)


def check_points(X, dim: int, what: str = "points") -> np.ndarray:
    """Rows of finite coordinates in R^dim; a single point may be passed flat."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1 and X.shape[0] == dim:
        X = X.reshape(1, -1)
    X = check_array(X, dtype=float, ensure_all_finite=True, input_name=what)
    if X.shape[1] != dim:
        raise ValueError(f"{what} must have {dim} columns, got {X.shape[1]}")
    return X


def check_point(x, dim: int) -> np.ndarray:
    X = check_points(x, dim, "point")
    if X.shape[0] != 1:
        raise ValueError(f"expected a single point, got {X.shape[0]}")
    return X[0]
