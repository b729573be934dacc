"""scikit-learn style wrappers.

``HadamardDerivative`` is fitted to a base point and transforms directions
into derivative values; ``OptimalityClassifier`` labels candidate points.
Both expose their settings through ``get_params``/``set_params`` so they
clone and grid-search like any other estimator.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_field, check_order, check_point, check_points
from .classify import (Kind, Tolerances, fn_class_probe, isolated_min_check, necessary_conditions,
                       strict_min_certificate)
from .errors import MissingAnalytic
from .funcspace import zero_chain
from .hadamard import hadamard_derivatives
from .limits import ShellConfig
from .sphere import sphere_sample


class _ShellParams:
    def _shell_config(self) -> ShellConfig:
        return ShellConfig(delta0=self.delta0, ratio=self.ratio, shells=self.shells,
                           samples_per_shell=self.samples_per_shell, seed=self.seed)


class HadamardDerivative(_ShellParams, TransformerMixin, BaseEstimator):
    """Order-n lower Hadamard derivative at a fixed point, as a map on directions.

    ``fit(x)`` binds the base point; ``transform(U)`` returns one value per
    row of ``U`` (``+inf``/``-inf`` included).  With ``chain="frechet"`` the
    lower-order entries are the Frechet derivatives of a smooth field,
    otherwise they are all zero.
    """

    def __init__(self, fn="quad_2d", order=1, chain="zero", delta0=1.0, ratio=0.5, shells=14,
                 samples_per_shell=128, seed=42):
        self.fn = fn
        self.order = order
        self.chain = chain
        self.delta0 = delta0
        self.ratio = ratio
        self.shells = shells
        self.samples_per_shell = samples_per_shell
        self.seed = seed

    def fit(self, X, y=None):
        field_ = check_field(self.fn)
        n = check_order(self.order)
        x = check_point(X, field_.dim)
        if self.chain == "zero":
            chain = zero_chain(n)
        elif self.chain == "frechet":
            if n > 1 and (not field_.is_smooth_at(x) or field_.analytic_order < n - 1):
                raise MissingAnalytic(f"{field_.id} has no Frechet derivatives of order {n - 1} here")
            chain = field_.frechet_chain(x, n)
        else:
            raise ValueError(f"chain must be 'zero' or 'frechet', got {self.chain!r}")
        self.field_ = field_
        self.point_ = x
        self.chain_ = chain
        self.config_ = self._shell_config()
        self.n_features_in_ = field_.dim
        return self

    def transform(self, X):
        check_is_fitted(self, "point_")
        U = check_points(X, self.field_.dim, "directions")
        self.estimates_ = hadamard_derivatives(self.field_, self.point_, self.chain_, self.order, U,
                                               self.config_)
        return np.array([float(e.value) for e in self.estimates_])


class OptimalityClassifier(_ShellParams, BaseEstimator):
    """Labels points with the verdict of a zero-chain optimality test.

    ``test`` is one of ``"isolated"`` (isolated minimizer of order ``order``),
    ``"strict"`` (sufficient condition up to ``max_order``), ``"necessary"``
    (necessary conditions up to ``max_order``; the label is the first
    failing order's verdict, or NecessaryHold) and ``"fn-class"``.
    ``predict`` returns verdict names; ``decision_function`` the margins.
    """

    _TESTS = ("isolated", "strict", "necessary", "fn-class")

    def __init__(self, fn="quad_2d", test="isolated", order=2, max_order=4, n_directions=None,
                 membership=1e-6, vanish=1e-5, margin_min=1e-4, delta0=1.0, ratio=0.5, shells=14,
                 samples_per_shell=128, seed=42):
        self.fn = fn
        self.test = test
        self.order = order
        self.max_order = max_order
        self.n_directions = n_directions
        self.membership = membership
        self.vanish = vanish
        self.margin_min = margin_min
        self.delta0 = delta0
        self.ratio = ratio
        self.shells = shells
        self.samples_per_shell = samples_per_shell
        self.seed = seed

    def fit(self, X=None, y=None):
        """Resolve the field and settings.  Nothing is learned from ``X``."""
        if self.test not in self._TESTS:
            raise ValueError(f"test must be one of {self._TESTS}, got {self.test!r}")
        self.field_ = check_field(self.fn)
        check_order(self.order)
        check_order(self.max_order, "max_order")
        self.config_ = self._shell_config()
        self.tolerances_ = Tolerances(self.membership, self.vanish, self.margin_min,
                                      max(6, self.max_order))
        count = self.n_directions
        self.directions_ = None if count is None else sphere_sample(self.field_.dim, count,
                                                                    seed=self.seed)
        self.classes_ = np.array([k.value for k in Kind])
        self.n_features_in_ = self.field_.dim
        return self

    def _verdict(self, x):
        args = (self.config_, self.tolerances_, self.directions_)
        if self.test == "isolated":
            return isolated_min_check(self.field_, x, self.order, *args)
        if self.test == "strict":
            return strict_min_certificate(self.field_, x, self.max_order, *args)
        if self.test == "necessary":
            verdicts = necessary_conditions(self.field_, x, self.max_order, *args, stop_at_fail=True)
            return verdicts[-1]
        return fn_class_probe(self.field_, x, self.order, *args)

    def _run(self, X):
        check_is_fitted(self, "field_")
        P = check_points(X, self.field_.dim)
        self.verdicts_ = [self._verdict(x) for x in P]
        return self.verdicts_

    def predict(self, X):
        out = []
        for v in self._run(X):
            if self.test == "fn-class":
                out.append("Member" if v.member else "NotMember")
            else:
                out.append(v.kind.value)
        return np.array(out)

    def decision_function(self, X):
        """Signed margins: the certified lower bound, or the most negative value found."""
        out = []
        for v in self._run(X):
            out.append(v.alpha_hat if self.test == "fn-class" else v.margin)
        return np.array(out, dtype=float)
