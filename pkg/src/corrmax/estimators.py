"""scikit-learn style wrappers: fit on a state, then score or transform other states."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from .bounds import spin_poms_for, two_qubit_max
from .measurement import coincidence, joint_distribution
from .optimizer import optimize_coincidence
from .state import DensityOperator, as_density


def check_state(X, dims=None) -> DensityOperator:
    """Accept a :class:`DensityOperator` or a square array (with ``dims`` or a square-dimension guess)."""
    if isinstance(X, DensityOperator):
        return X
    return as_density(np.asarray(X), dims)


def _check_fitted(est, attr):
    if not hasattr(est, attr):
        raise NotFittedError(f"{type(est).__name__} is not fitted yet; call fit first")


class _PomPairTransformer(TransformerMixin, BaseEstimator):
    def score(self, X, y=None) -> float:
        """Coincidence rate of the fitted POM pair on ``X``."""
        _check_fitted(self, "pom_a_")
        return coincidence(check_state(X, self.dims), self.pom_a_, self.pom_b_)

    def transform(self, X) -> np.ndarray:
        """Joint outcome table of the fitted POM pair on ``X``."""
        _check_fitted(self, "pom_a_")
        return np.array(joint_distribution(check_state(X, self.dims), self.pom_a_, self.pom_b_).table)


class CoincidenceMaximizer(_PomPairTransformer):
    """Find an ``n``-outcome maximal POM pair maximising the coincidence rate.

    Parameters
    ----------
    n : int, optional
        Number of outcomes; defaults to ``max(d1, d2)``.
    restarts, seed, max_iters, tol
        Passed to :func:`corrmax.optimizer.optimize_coincidence`.
    dims : tuple, optional
        Subsystem dimensions when ``X`` is a bare array.

    Attributes
    ----------
    result_ : OptimizationResult
    coincidence_ : float
    pom_a_, pom_b_ : MaximalPOM
    """

    def __init__(self, n=None, restarts=16, seed=None, max_iters=5000, tol=1e-10, dims=None):
        self.n = n
        self.restarts = restarts
        self.seed = seed
        self.max_iters = max_iters
        self.tol = tol
        self.dims = dims

    def fit(self, X, y=None):
        rho = check_state(X, self.dims)
        self.result_ = optimize_coincidence(
            rho, self.n, restarts=self.restarts, seed=self.seed, max_iters=self.max_iters, tol=self.tol
        )
        self.coincidence_ = self.result_.coincidence
        self.pom_a_ = self.result_.pom_a
        self.pom_b_ = self.result_.pom_b
        return self


class SpinCorrelationMaximizer(_PomPairTransformer):
    """Closed-form optimal spin measurements for a two-qubit state."""

    def __init__(self, dims=None):
        self.dims = dims

    def fit(self, X, y=None):
        self.report_ = two_qubit_max(check_state(X, self.dims))
        self.coincidence_ = self.report_.value
        self.direction_a_ = self.report_.certificate["a"]
        self.direction_b_ = self.report_.certificate["b"]
        self.pom_a_, self.pom_b_ = spin_poms_for(self.report_)
        return self
