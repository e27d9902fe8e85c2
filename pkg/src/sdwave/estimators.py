"""Estimator-style wrappers around the two solvers.

``fit`` takes piecewise constant initial data as rows ``(x, v, u)``: each
row's state starts at ``x`` and the first state also fills everything to its
left.  ``predict`` takes rows ``(x, t)`` and returns the velocity;
``transform`` returns ``(u, m)`` columns.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from . import fronts, gvp
from .errors import InvalidParameter
from .model import CoefficientSpec, builtin_flux


def _pieces(X):
    X = check_array(X, ensure_min_samples=1)
    if X.shape[1] != 3:
        raise InvalidParameter("initial data rows must be (x, v, u)")
    if np.any(np.diff(X[:, 0]) <= 0):
        raise InvalidParameter("break positions must be strictly increasing")
    if np.any(X[:, 1] < 0):
        raise InvalidParameter("v must be nonnegative")
    return X


def _queries(X):
    X = check_array(X)
    if X.shape[1] != 2:
        raise InvalidParameter("query rows must be (x, t)")
    return X


class FrontTracker(BaseEstimator):
    def __init__(self, flux="identity", flux_params=None, kappa=0.0, ua=0.0, upkappa=None,
                 horizon=1.0, margin=1.0):
        self.flux = flux
        self.flux_params = flux_params
        self.kappa = kappa
        self.ua = ua
        self.upkappa = upkappa
        self.horizon = horizon
        self.margin = margin

    def _coefficients(self):
        if self.upkappa is not None:
            return CoefficientSpec.algebraic(self.upkappa, self.ua)
        return CoefficientSpec.constant(self.kappa, self.ua)

    def fit(self, X, y=None):
        X = _pieces(X)
        flux = builtin_flux(self.flux, **(self.flux_params or {}))
        states = [(row[1], row[2]) for row in X]
        breaks = list(X[1:, 0])
        lo = (breaks[0] if breaks else X[0, 0]) - self.margin
        hi = (breaks[-1] if breaks else X[0, 0]) + self.margin
        cfg = fronts.from_pieces(states, breaks, flux, self._coefficients(), self.horizon, (lo, hi))
        self.trajectory_ = fronts.track(cfg, self.horizon)
        self.n_events_ = len(self.trajectory_.events)
        return self

    def transform(self, X):
        check_is_fitted(self, "trajectory_")
        Q = _queries(X)
        out = np.empty((Q.shape[0], 2))
        for t in np.unique(Q[:, 1]):
            sel = Q[:, 1] == t
            snap = self.trajectory_.sample(float(t), Q[sel, 0])
            out[sel, 0], out[sel, 1] = snap.u, snap.m
        return out

    def predict(self, X):
        return self.transform(X)[:, 0]


class VariationalSolver(BaseEstimator):
    def __init__(self, upkappa=1.0, cells=4096, domain=(-3.0, 3.0), horizon=1.0):
        self.upkappa = upkappa
        self.cells = cells
        self.domain = domain
        self.horizon = horizon

    def fit(self, X, y=None):
        X = _pieces(X)
        breaks = X[1:, 0]
        v0 = gvp.piecewise_constant(breaks, X[:, 1])
        u0 = gvp.piecewise_constant(breaks, X[:, 2])
        support = gvp.support_for(tuple(self.domain), float(np.max(np.abs(X[:, 2]))), self.horizon, self.upkappa)
        self.field_ = gvp.GvpField(v0, u0, self.upkappa, support, self.cells, breaks=list(breaks))
        return self

    def transform(self, X):
        check_is_fitted(self, "field_")
        Q = _queries(X)
        out = np.empty((Q.shape[0], 2))
        for t in np.unique(Q[:, 1]):
            sel = Q[:, 1] == t
            snap = gvp.snapshot(self.field_, float(t), Q[sel, 0])
            out[sel, 0], out[sel, 1] = snap.u, snap.m
        return out

    def predict(self, X):
        return self.transform(X)[:, 0]


__all__ = ["FrontTracker", "VariationalSolver"]
