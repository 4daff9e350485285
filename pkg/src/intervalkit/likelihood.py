"""Likelihoods, MLEs, likelihood-ratio statistics and profile likelihood
confidence intervals obtained by Wilks inversion.

All ratios are handled as differences of log-likelihoods so nothing
underflows.  Each model names one parameter of interest and (possibly)
nuisance parameters, which are profiled out by their conditional MLE.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, asdict, field
from typing import Optional, Sequence

from .densities import Support
from .exceptions import BoundaryMle, DomainError, NumericFailure
from .numeric import DEFAULT_TOLERANCES, Tolerances, find_root, maximize_1d
from .special import chi_square_quantile

__all__ = [
    "LikelihoodModel",
    "BinomialProportion",
    "NormalMeanKnownSigma",
    "NormalMeanProfileSigma",
    "NormalSigmaProfileMean",
    "PoissonRate",
    "LogNormalMuProfileSigma",
    "ReparameterizedModel",
    "MleResult",
    "LrciInterval",
    "SideFlag",
    "make_model",
    "MODEL_TAGS",
    "log_likelihood",
    "mle",
    "lrt_lambda",
    "profile_log_likelihood",
    "profile_deviance",
    "wilks_lrci",
]

_LOG_2PI = math.log(2.0 * math.pi)
# below this many observations the chi-square calibration is flagged as approximate
SMALL_SAMPLE = 30
_DEVIANCE_CAP = 1e10


class SideFlag(str, enum.Enum):
    SOLVED = "solved"
    AT_PARAMETER_BOUND = "at_parameter_bound"


@dataclass(frozen=True)
class MleResult:
    theta_hat: float
    eta_hat: tuple
    log_lik_at_max: float
    at_boundary: bool

    def as_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class LrciInterval:
    lower: float
    upper: float
    theta_hat: float
    deviance_at_lower: float
    deviance_at_upper: float
    alpha: float
    side_flags: tuple
    threshold: float
    notes: tuple = field(default_factory=tuple)

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def as_tuple(self):
        return (self.lower, self.upper)

    def as_dict(self):
        out = asdict(self)
        out["side_flags"] = [SideFlag(s).value for s in self.side_flags]
        out["notes"] = list(self.notes)
        out["width"] = self.width
        return out


def _sum(values):
    return math.fsum(values)


def _xlogy(a, y):
    if a == 0:
        return 0.0
    if y <= 0:
        return -math.inf
    return a * math.log(y)


def _as_data(data) -> tuple:
    values = tuple(float(v) for v in data)
    if not values:
        raise DomainError("data must be nonempty")
    if not all(math.isfinite(v) for v in values):
        raise DomainError("data must be finite")
    return values


class LikelihoodModel:
    """Base class for a likelihood with one parameter of interest.

    Subclasses define ``_loglik(theta, eta)`` and, where a closed form
    exists, ``_closed_form_mle`` and ``_profile_eta``.
    """

    tag = "model"
    interest = "theta"
    nuisance: tuple = ()
    param_space: dict = {}

    @property
    def n_obs(self) -> int:
        return len(self.data)

    @property
    def interest_space(self) -> Support:
        return self.param_space[self.interest]

    def describe(self) -> dict:
        return {"model": self.tag}

    # -- evaluation -------------------------------------------------------
    def _check_params(self, theta, eta):
        if len(eta) != len(self.nuisance):
            raise DomainError(
                f"{self.tag} expects {len(self.nuisance)} nuisance value(s), got {len(eta)}")
        for name, value in zip((self.interest,) + self.nuisance, (theta,) + tuple(eta)):
            if not self.param_space[name].contains(value):
                raise DomainError(f"{name}={value!r} is outside the parameter space")

    def log_likelihood(self, theta: float, eta: Sequence[float] = ()) -> float:
        eta = tuple(float(v) for v in eta)
        theta = float(theta)
        self._check_params(theta, eta)
        return self._loglik(theta, eta)

    def _loglik(self, theta, eta):
        raise NotImplementedError

    def _closed_form_mle(self):
        return None

    def _profile_eta(self, theta):
        return None

    # -- numeric fallbacks ------------------------------------------------
    def _nuisance_bracket(self, theta):
        raise NotImplementedError

    def _profile_eta_numeric(self, theta, tol):
        name = self.nuisance[0]
        space = self.param_space[name]
        lo, hi = self._nuisance_bracket(theta)
        if space.lower == 0.0 and math.isinf(space.upper):
            def f(u):
                return self._loglik(theta, (math.exp(u),))
            u, _ = maximize_1d(f, (math.log(lo), math.log(hi)), tol)
            return (math.exp(u),)
        v, _ = maximize_1d(lambda v: self._loglik(theta, (v,)), (lo, hi), tol)
        return (v,)

    def _interest_bracket(self):
        lo = min(self.data)
        hi = max(self.data)
        if lo == hi:
            lo, hi = lo - 1.0, hi + 1.0
        space = self.interest_space
        return max(lo, space.lower), min(hi, space.upper)

    def profile(self, theta: float, tol: Tolerances = DEFAULT_TOLERANCES):
        theta = float(theta)
        if not self.nuisance:
            return self._loglik(theta, ()), ()
        eta = self._profile_eta(theta)
        if eta is None:
            eta = self._profile_eta_numeric(theta, tol)
        return self._loglik(theta, eta), tuple(eta)

    def mle(self, tol: Tolerances = DEFAULT_TOLERANCES) -> MleResult:
        closed = self._closed_form_mle()
        if closed is not None:
            theta_hat, eta_hat = closed
        else:
            theta_hat, _ = maximize_1d(lambda t: self.profile(t, tol)[0],
                                       self._interest_bracket(), tol)
            eta_hat = self.profile(theta_hat, tol)[1]
        space = self.interest_space
        value = self._loglik(theta_hat, tuple(eta_hat))
        if not math.isfinite(value):
            raise NumericFailure(f"log-likelihood is not finite at the MLE {theta_hat!r}")
        return MleResult(
            theta_hat=theta_hat,
            eta_hat=tuple(eta_hat),
            log_lik_at_max=value,
            at_boundary=theta_hat in (space.lower, space.upper),
        )


class BinomialProportion(LikelihoodModel):
    """``x`` successes in ``n`` trials; the single observation is the count."""

    tag = "binomial"
    interest = "p"
    param_space = {"p": Support(0.0, 1.0, lower_closed=True, upper_closed=True)}

    def __init__(self, n: int, x: int):
        if int(n) != n or n < 1:
            raise DomainError(f"n must be a positive integer, got {n!r}")
        if int(x) != x or not (0 <= x <= n):
            raise DomainError(f"x must be an integer in [0, n], got {x!r}")
        self.n, self.x = int(n), int(x)
        self.data = (float(self.x),)
        self._log_comb = math.lgamma(n + 1) - math.lgamma(x + 1) - math.lgamma(n - x + 1)

    def describe(self):
        return {"model": self.tag, "n": self.n, "x": self.x}

    def _loglik(self, theta, eta):
        return self._log_comb + _xlogy(self.x, theta) + _xlogy(self.n - self.x, 1.0 - theta)

    def _closed_form_mle(self):
        return self.x / self.n, ()

    def _interest_bracket(self):
        return (0.0, 1.0)


class _NormalSample(LikelihoodModel):
    def __init__(self, data):
        self.data = _as_data(data)
        n = len(self.data)
        self.mean = _sum(self.data) / n
        self.ss = _sum((v - self.mean) ** 2 for v in self.data)

    def _normal_loglik(self, mu, sigma):
        n = len(self.data)
        if sigma <= 0:
            return -math.inf
        sq = self.ss + n * (self.mean - mu) ** 2
        return -0.5 * n * _LOG_2PI - n * math.log(sigma) - sq / (2.0 * sigma * sigma)

    def _require_spread(self):
        if not self.ss > 0:
            raise DomainError(f"{self.tag} needs at least two distinct observations")

    def describe(self):
        return {"model": self.tag, "n_obs": self.n_obs, "mean": self.mean}


class NormalMeanKnownSigma(_NormalSample):
    tag = "normal-mean"
    interest = "mu"
    param_space = {"mu": Support()}

    def __init__(self, data, sigma: float = 1.0):
        super().__init__(data)
        sigma = float(sigma)
        if not (sigma > 0 and math.isfinite(sigma)):
            raise DomainError(f"sigma must be positive, got {sigma!r}")
        self.sigma = sigma

    def describe(self):
        return {**super().describe(), "sigma": self.sigma}

    def _loglik(self, theta, eta):
        return self._normal_loglik(theta, self.sigma)

    def _closed_form_mle(self):
        return self.mean, ()


class NormalMeanProfileSigma(_NormalSample):
    """Normal mean with the standard deviation profiled out.

    ``closed_form=False`` forces the numeric MLE and nuisance maximization,
    which is only useful for checking them against the closed forms.
    """

    tag = "normal-mean-profile"
    interest = "mu"
    nuisance = ("sigma",)
    param_space = {"mu": Support(), "sigma": Support(0.0, math.inf)}

    def __init__(self, data, closed_form: bool = True):
        super().__init__(data)
        self._require_spread()
        self.closed_form = closed_form

    def _loglik(self, theta, eta):
        return self._normal_loglik(theta, eta[0])

    def _sigma_hat(self, mu):
        return math.sqrt(self.ss / self.n_obs + (self.mean - mu) ** 2)

    def _closed_form_mle(self):
        if not self.closed_form:
            return None
        return self.mean, (self._sigma_hat(self.mean),)

    def _profile_eta(self, theta):
        if not self.closed_form:
            return None
        return (self._sigma_hat(theta),)

    def _nuisance_bracket(self, theta):
        rough = math.sqrt(self.ss / self.n_obs + (self.mean - theta) ** 2)
        return rough * 1e-3, rough * 1e3


class NormalSigmaProfileMean(_NormalSample):
    tag = "normal-sigma"
    interest = "sigma"
    nuisance = ("mu",)
    param_space = {"sigma": Support(0.0, math.inf), "mu": Support()}

    def __init__(self, data):
        super().__init__(data)
        self._require_spread()

    def _loglik(self, theta, eta):
        return self._normal_loglik(eta[0], theta)

    def _closed_form_mle(self):
        return math.sqrt(self.ss / self.n_obs), (self.mean,)

    def _profile_eta(self, theta):
        return (self.mean,)


class PoissonRate(LikelihoodModel):
    tag = "poisson"
    interest = "rate"
    param_space = {"rate": Support(0.0, math.inf, lower_closed=True)}

    def __init__(self, data):
        self.data = _as_data(data)
        if any(v < 0 or v != int(v) for v in self.data):
            raise DomainError("Poisson data must be nonnegative integers")
        self.total = _sum(self.data)
        self._log_fact = _sum(math.lgamma(v + 1.0) for v in self.data)

    def describe(self):
        return {"model": self.tag, "n_obs": self.n_obs, "total": self.total}

    def _loglik(self, theta, eta):
        return _xlogy(self.total, theta) - self.n_obs * theta - self._log_fact

    def _closed_form_mle(self):
        return self.total / self.n_obs, ()


class LogNormalMuProfileSigma(_NormalSample):
    """Lognormal log-scale location ``mu`` with ``sigma`` profiled out."""

    tag = "lognormal-mu"
    interest = "mu"
    nuisance = ("sigma",)
    param_space = {"mu": Support(), "sigma": Support(0.0, math.inf)}

    def __init__(self, data):
        raw = _as_data(data)
        if any(v <= 0 for v in raw):
            raise DomainError("lognormal data must be positive")
        super().__init__([math.log(v) for v in raw])
        self._require_spread()
        self.raw_data = raw
        self._jacobian = _sum(self.data)

    def _loglik(self, theta, eta):
        return self._normal_loglik(theta, eta[0]) - self._jacobian

    def _closed_form_mle(self):
        return self.mean, (math.sqrt(self.ss / self.n_obs),)

    def _profile_eta(self, theta):
        return (math.sqrt(self.ss / self.n_obs + (self.mean - theta) ** 2),)


def _restrict_to_domain(space: Support, transform) -> Support:
    """Intersection of ``space`` with the domain of ``transform``."""
    domain = getattr(transform, "domain", None)
    if domain is None or (space.lower >= domain.lower and space.upper <= domain.upper):
        return space
    if space.lower >= domain.lower:
        lower, lower_closed = space.lower, space.lower_closed
    else:
        lower, lower_closed = domain.lower, domain.lower_closed
    if space.upper <= domain.upper:
        upper, upper_closed = space.upper, space.upper_closed
    else:
        upper, upper_closed = domain.upper, domain.upper_closed
    if not lower < upper:
        raise DomainError(f"transform {transform.name} is not defined anywhere on the parameter range")
    return Support(lower, upper, lower_closed=lower_closed, upper_closed=upper_closed)


def _map_support(space: Support, transform) -> Support:
    a = transform.forward(space.lower)
    b = transform.forward(space.upper)
    closed_a = space.lower_closed and math.isfinite(a)
    closed_b = space.upper_closed and math.isfinite(b)
    if a > b:
        a, b, closed_a, closed_b = b, a, closed_b, closed_a
    return Support(a, b, lower_closed=closed_a, upper_closed=closed_b)


class ReparameterizedModel(LikelihoodModel):
    """``base`` with its interest parameter relabelled as ``zeta = g(theta)``.

    The likelihood is evaluated at ``theta = g^{-1}(zeta)`` with no Jacobian
    factor, so likelihood-ratio quantities are exactly invariant.

    When ``g`` is defined on only part of the parameter range (``logit`` of
    a Poisson rate, say), the model is restricted to that part and a note
    says so; the MLE must lie inside it.
    """

    notes: tuple = ()

    def __init__(self, base: LikelihoodModel, transform):
        self.base = base
        self.transform = transform
        self.data = base.data
        self.tag = f"{base.tag}[{transform.name}]"
        self.interest = f"{transform.name}({base.interest})"
        self.nuisance = base.nuisance
        self.param_space = dict(base.param_space)
        del self.param_space[base.interest]
        space = _restrict_to_domain(base.interest_space, transform)
        if space != base.interest_space:
            theta_hat = base.mle().theta_hat
            if not space.contains(theta_hat):
                raise DomainError(
                    f"MLE {base.interest}={theta_hat!r} lies outside the domain of {transform.name}")
            self.notes = (f"{base.interest} restricted to [{space.lower}, {space.upper}], "
                          f"the domain of {transform.name}",)
        self.restricted_space = space
        self.param_space[self.interest] = _map_support(space, transform)

    @property
    def n_obs(self):
        return self.base.n_obs

    def describe(self):
        return {**self.base.describe(), "transform": self.transform.name}

    def _loglik(self, theta, eta):
        return self.base._loglik(self.transform.inverse(theta), eta)

    def profile(self, theta, tol=DEFAULT_TOLERANCES):
        return self.base.profile(self.transform.inverse(float(theta)), tol)

    def mle(self, tol=DEFAULT_TOLERANCES):
        res = self.base.mle(tol)
        return MleResult(
            theta_hat=self.transform.forward(res.theta_hat),
            eta_hat=res.eta_hat,
            log_lik_at_max=res.log_lik_at_max,
            at_boundary=res.at_boundary,
        )


MODEL_TAGS = {
    "binomial": BinomialProportion,
    "normal-mean": NormalMeanKnownSigma,
    "normal-mean-profile": NormalMeanProfileSigma,
    "normal-sigma": NormalSigmaProfileMean,
    "poisson": PoissonRate,
    "lognormal-mu": LogNormalMuProfileSigma,
}


def make_model(tag: str, **kwargs) -> LikelihoodModel:
    try:
        cls = MODEL_TAGS[tag]
    except KeyError:
        raise DomainError(f"unknown model {tag!r}; choose from {sorted(MODEL_TAGS)}") from None
    return cls(**kwargs)


# -- operations ---------------------------------------------------------------

def log_likelihood(m: LikelihoodModel, theta: float, eta: Sequence[float] = ()) -> float:
    """Sum of log densities of the data at ``(theta, eta)``."""
    return m.log_likelihood(theta, eta)


def mle(m: LikelihoodModel, tol: Tolerances = DEFAULT_TOLERANCES) -> MleResult:
    return m.mle(tol)


def profile_log_likelihood(m: LikelihoodModel, theta: float, tol: Tolerances = DEFAULT_TOLERANCES):
    """Log-likelihood maximized over the nuisance parameters at fixed ``theta``.

    Returns ``(value, eta_at_theta)``.
    """
    theta = float(theta)
    if not m.interest_space.contains(theta):
        raise DomainError(f"{m.interest}={theta!r} is outside the parameter space")
    return m.profile(theta, tol)


def _deviance(m, theta, log_lik_max, tol):
    value, _ = m.profile(theta, tol)
    return max(0.0, -2.0 * (value - log_lik_max))


def profile_deviance(m: LikelihoodModel, theta: float, tol: Tolerances = DEFAULT_TOLERANCES,
                     fit: Optional[MleResult] = None) -> float:
    """``-2 log`` of the profile likelihood ratio, clipped at zero.

    The denominator is the global maximum of the likelihood.
    """
    theta = float(theta)
    if not m.interest_space.contains(theta):
        raise DomainError(f"{m.interest}={theta!r} is outside the parameter space")
    fit = fit or m.mle(tol)
    return _deviance(m, theta, fit.log_lik_at_max, tol)


def lrt_lambda(m: LikelihoodModel, restricted_theta: float,
               tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    """Likelihood-ratio statistic: restricted maximum over global maximum, in [0, 1]."""
    return min(1.0, math.exp(-0.5 * profile_deviance(m, restricted_theta, tol)))


def _wilks_endpoint(dev, theta_hat, space, side, threshold, tol):
    bound = space.lower if side < 0 else space.upper
    bound_closed = space.lower_closed if side < 0 else space.upper_closed
    step = max(abs(theta_hat), 1.0) * 0.1
    inner = theta_hat
    for _ in range(61):
        x = theta_hat + side * step
        beyond = x <= bound if side < 0 else x >= bound
        if beyond:
            if bound_closed:
                x = bound
            else:
                # approach an open bound geometrically without touching it
                x = inner + 0.5 * (bound - inner)
                if x == inner or x == bound:
                    return bound, SideFlag.AT_PARAMETER_BOUND
            value = dev(x)
            if value < threshold:
                if bound_closed:
                    return bound, SideFlag.AT_PARAMETER_BOUND
                inner = x
                continue
            break
        if dev(x) >= threshold:
            break
        inner = x
        step *= 2.0
    else:
        raise NumericFailure("deviance never reached the chi-square threshold")

    def f(t):
        return min(dev(t), _DEVIANCE_CAP) - threshold

    a, b = sorted((inner, x))
    return find_root(f, (a, b), tol), SideFlag.SOLVED


def wilks_lrci(m: LikelihoodModel, alpha: float = 0.05,
               tol: Tolerances = DEFAULT_TOLERANCES) -> LrciInterval:
    """Profile likelihood-ratio confidence interval for the interest parameter.

    Collects every ``theta`` whose profile deviance stays below the
    ``1 - alpha`` quantile of chi-square with one degree of freedom.  Each
    endpoint is bracketed by doubling steps away from the MLE and then
    solved by root finding; if the deviance never reaches the threshold
    before a parameter bound, the bound itself is returned and flagged.

    Raises
    ------
    BoundaryMle
        If the MLE lies on the boundary of the parameter space, where the
        chi-square calibration does not hold.
    """
    if not (0.0 < alpha < 1.0):
        raise DomainError(f"alpha must lie in (0, 1), got {alpha!r}")
    fit = m.mle(tol)
    if fit.at_boundary:
        raise BoundaryMle(
            f"MLE {m.interest}={fit.theta_hat!r} lies on the boundary of the parameter space; "
            "the chi-square limit of the likelihood-ratio statistic does not apply there")
    threshold = chi_square_quantile(1, 1.0 - alpha, tol)
    space = m.interest_space
    theta_hat = fit.theta_hat

    def dev(theta):
        return _deviance(m, theta, fit.log_lik_at_max, tol)

    lower, flag_lo = _wilks_endpoint(dev, theta_hat, space, -1, threshold, tol)
    upper, flag_hi = _wilks_endpoint(dev, theta_hat, space, 1, threshold, tol)
    notes = tuple(getattr(m, "notes", ()))
    if m.n_obs < SMALL_SAMPLE:
        notes += (f"asymptotic approximation: n={m.n_obs}",)
    return LrciInterval(
        lower=lower,
        upper=upper,
        theta_hat=theta_hat,
        deviance_at_lower=dev(lower) if flag_lo is SideFlag.SOLVED else _bound_deviance(dev, lower),
        deviance_at_upper=dev(upper) if flag_hi is SideFlag.SOLVED else _bound_deviance(dev, upper),
        alpha=alpha,
        side_flags=(flag_lo, flag_hi),
        threshold=threshold,
        notes=notes,
    )


def _bound_deviance(dev, x):
    if not math.isfinite(x):
        return math.nan
    try:
        return dev(x)
    except (ValueError, ZeroDivisionError, DomainError):
        return math.nan
