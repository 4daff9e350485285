"""scikit-learn style estimators wrapping the interval constructions.

Both estimators take a one-dimensional sample (a 1-D array or a single
column), follow the ``fit`` / ``predict`` conventions, and support
``get_params`` / ``set_params`` and cloning.
"""
from __future__ import annotations

import math

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .densities import make_density
from .exceptions import DomainError, ModeAtBoundary
from .hpd import density_ratio_to_mode, hpd_levelset, hpd_one_sided, hpd_quantile_scan
from .likelihood import BinomialProportion, MODEL_TAGS, make_model, wilks_lrci
from .numeric import DEFAULT_TOLERANCES

__all__ = ["DensityHPD", "ProfileLRCI", "FITTABLE_FAMILIES"]


def _column(X, name="X"):
    arr = check_array(X, ensure_2d=False, dtype=np.float64, input_name=name)
    if arr.ndim == 2:
        if arr.shape[1] != 1:
            raise DomainError(f"{name} must be one-dimensional or a single column, got shape {arr.shape}")
        arr = arr[:, 0]
    return arr


def _fit_normal(x):
    return {"mu": float(np.mean(x)), "sigma": float(np.std(x))}


def _fit_lognormal(x):
    if np.any(x <= 0):
        raise DomainError("lognormal data must be positive")
    return _fit_normal(np.log(x))


def _fit_exponential(x):
    if np.any(x < 0):
        raise DomainError("exponential data must be nonnegative")
    return {"rate": 1.0 / float(np.mean(x))}


FITTABLE_FAMILIES = {
    "normal": _fit_normal,
    "lognormal": _fit_lognormal,
    "exponential": _fit_exponential,
}


class DensityHPD(BaseEstimator):
    """Fit a parametric density by maximum likelihood and report its HPD interval.

    Parameters
    ----------
    family : {"normal", "lognormal", "exponential"}
    alpha : float
        The interval holds ``1 - alpha`` of the fitted density's mass.
    method : {"levelset", "scan"}

    Attributes
    ----------
    params_ : dict
        Maximum likelihood parameters.
    density_ : UnimodalDensity
    interval_ : HpdInterval
    """

    def __init__(self, family="normal", alpha=0.05, method="levelset"):
        self.family = family
        self.alpha = alpha
        self.method = method

    def _validate_params(self):
        if self.family not in FITTABLE_FAMILIES:
            raise DomainError(f"family must be one of {sorted(FITTABLE_FAMILIES)}, got {self.family!r}")
        if not (0.0 < self.alpha < 1.0):
            raise DomainError(f"alpha must lie in (0, 1), got {self.alpha!r}")
        if self.method not in ("levelset", "scan"):
            raise DomainError(f"method must be 'levelset' or 'scan', got {self.method!r}")

    def fit(self, X, y=None):
        self._validate_params()
        x = _column(X)
        if x.size < 2:
            raise DomainError("need at least two observations")
        self.params_ = FITTABLE_FAMILIES[self.family](x)
        self.density_ = make_density(self.family, DEFAULT_TOLERANCES, **self.params_)
        if self.density_.mode_at_boundary:
            self.interval_ = hpd_one_sided(self.density_, self.alpha)
        elif self.method == "scan":
            self.interval_ = hpd_quantile_scan(self.density_, self.alpha)
        else:
            self.interval_ = hpd_levelset(self.density_, self.alpha)
        self.n_features_in_ = 1
        return self

    def predict(self, X):
        """1 for points inside the HPD interval, 0 outside."""
        check_is_fitted(self, "interval_")
        x = _column(X)
        inside = (x >= self.interval_.lower) & (x <= self.interval_.upper)
        return inside.astype(np.int64)

    def score_samples(self, X):
        """Density relative to the modal density, ``f(x) / f(mode)``."""
        check_is_fitted(self, "interval_")
        x = _column(X)
        try:
            return np.array([density_ratio_to_mode(self.density_, v) for v in x])
        except ModeAtBoundary:
            return np.array([self.density_.pdf(v) for v in x])


class ProfileLRCI(BaseEstimator):
    """Profile likelihood-ratio confidence interval for a one-parameter question.

    Parameters
    ----------
    model : str
        Any tag of :data:`intervalkit.likelihood.MODEL_TAGS`.  For
        ``"binomial"`` the sample is a vector of 0/1 outcomes.
    alpha : float
    sigma : float
        Known standard deviation, used by ``"normal-mean"`` only.

    Attributes
    ----------
    model_ : LikelihoodModel
    mle_ : MleResult
    interval_ : LrciInterval
    """

    def __init__(self, model="normal-mean", alpha=0.05, sigma=1.0):
        self.model = model
        self.alpha = alpha
        self.sigma = sigma

    def fit(self, X, y=None):
        if self.model not in MODEL_TAGS:
            raise DomainError(f"model must be one of {sorted(MODEL_TAGS)}, got {self.model!r}")
        x = _column(X)
        if self.model == "binomial":
            if not np.all((x == 0) | (x == 1)):
                raise DomainError("binomial outcomes must be 0 or 1")
            self.model_ = BinomialProportion(x.size, int(x.sum()))
        elif self.model == "normal-mean":
            self.model_ = make_model(self.model, data=x.tolist(), sigma=self.sigma)
        else:
            self.model_ = make_model(self.model, data=x.tolist())
        self.interval_ = wilks_lrci(self.model_, self.alpha)
        self.mle_ = self.model_.mle(DEFAULT_TOLERANCES)
        self.n_features_in_ = 1
        return self

    def predict(self, theta):
        """1 for parameter values inside the interval, 0 outside."""
        check_is_fitted(self, "interval_")
        t = _column(theta, "theta")
        inside = (t >= self.interval_.lower) & (t <= self.interval_.upper)
        return inside.astype(np.int64)

    def deviance(self, theta):
        """Profile deviance at each parameter value."""
        check_is_fitted(self, "interval_")
        top = self.mle_.log_lik_at_max
        return np.array([
            max(0.0, -2.0 * (self.model_.profile(float(t), DEFAULT_TOLERANCES)[0] - top))
            if self.model_.interest_space.contains(float(t)) else math.inf
            for t in _column(theta, "theta")
        ])
