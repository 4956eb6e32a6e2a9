"""scikit-learn style wrapper around the shooting solver.

``ChainEquilibrium`` keeps the chain hyper-parameters as constructor
arguments (so ``get_params``/``set_params``/``clone`` work and sweeps can be
written as ``est.set_params(n_particles=n).fit(field)``) and stores the
solved configuration in trailing-underscore attributes.
"""
from __future__ import annotations

import numbers

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .analysis import gap_profile
from .fixedpoint import residual, shoot_solve
from .model import ChainParams, ConstantField, ForceField, PiecewiseLinearField
from .potential import PowerLaw


def check_field(X, length):
    """Coerce ``X`` into a :class:`ForceField`.

    Accepts ``None`` (zero field), a number (constant field), a ForceField,
    or an array of shape ``(n_samples, 2)`` holding ``(x, F(x))`` rows.
    """
    if X is None:
        return ConstantField(0.0)
    if isinstance(X, ForceField):
        return X
    if isinstance(X, numbers.Real):
        return ConstantField(float(X))
    X = check_array(X, ensure_min_samples=1)
    if X.shape[1] != 2:
        raise ValueError(f"field table must have 2 columns (x, F), got {X.shape[1]}")
    order = np.argsort(X[:, 0], kind="stable")
    X = X[order]
    if np.any(X[:, 0] < 0) or np.any(X[:, 0] > length):
        raise ValueError(f"field nodes must lie in [0, {length}]")
    return PiecewiseLinearField(tuple(map(tuple, X.tolist())))


class ChainEquilibrium(TransformerMixin, BaseEstimator):
    """Equilibrium of ``n_particles`` on ``[0, length]`` under ``f(r) = alpha r^-a``.

    Parameters
    ----------
    n_particles : int
    length : float
    a : float
        Power-law exponent, must exceed 1.
    alpha : float
    tol_position : float or None
        Landing tolerance on ``|x_N - L|``; ``None`` means ``1e-12 * length``.

    Attributes
    ----------
    positions_ : ndarray of shape (n_particles,)
    gaps_ : ndarray of shape (n_particles - 1,)
    deltas_ : ndarray of shape (n_particles - 1,)
        Relative gap deviations from ``length / (n_particles - 1)``.
    x2_ : float
    residual_max_ : float
    n_iter_ : int
    boundary_ok_ : tuple of bool
    non_unique_ : bool
    field_ : ForceField
    """

    def __init__(self, n_particles=50, length=1.0, a=2.0, alpha=1.0, tol_position=None):
        self.n_particles = n_particles
        self.length = length
        self.a = a
        self.alpha = alpha
        self.tol_position = tol_position

    def _params(self, fld):
        return ChainParams(self.n_particles, self.length, law=PowerLaw(self.a, self.alpha), field=fld)

    def fit(self, X=None, y=None):
        fld = check_field(X, self.length)
        self.params_ = self._params(fld)
        res = shoot_solve(self.params_, self.tol_position)
        prof = gap_profile(res.configuration, self.length)
        self.field_ = fld
        self.positions_ = res.configuration
        self.gaps_ = prof.gaps
        self.deltas_ = prof.deltas
        self.x2_ = res.x2
        self.residual_max_ = res.residual_max
        self.n_iter_ = res.bisection_iterations
        self.boundary_ok_ = (res.boundary_ok_left, res.boundary_ok_right)
        self.non_unique_ = res.non_unique
        return self

    def transform(self, X):
        """Per-particle force imbalance of each configuration row under the fitted field."""
        check_is_fitted(self, "positions_")
        X = check_array(X)
        if X.shape[1] != self.n_particles:
            raise ValueError(f"expected {self.n_particles} positions per row, got {X.shape[1]}")
        return np.vstack([residual(self.params_, row)[0] for row in X])

    def score(self, X=None, y=None):
        """Negative max-norm residual; the solved configuration when ``X`` is None."""
        check_is_fitted(self, "positions_")
        if X is None:
            return -self.residual_max_
        return -float(np.max(np.abs(self.transform(X))))
