import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import optimize, stats

from intervalkit.exceptions import BoundaryMle, DomainError
from intervalkit.likelihood import (
    BinomialProportion,
    LogNormalMuProfileSigma,
    NormalMeanKnownSigma,
    NormalMeanProfileSigma,
    NormalSigmaProfileMean,
    PoissonRate,
    ReparameterizedModel,
    SideFlag,
    log_likelihood,
    lrt_lambda,
    make_model,
    mle,
    profile_deviance,
    profile_log_likelihood,
    wilks_lrci,
)
from intervalkit.special import chi_square_quantile
from intervalkit.transforms import builtin_transform

from oracles import BINOMIAL_20_10, CHI2_1_095, NORMAL_MEAN_25

SAMPLE = [1.2, 0.3, 2.5, 1.1, 0.7, 1.9, 1.4, 0.8, 1.6, 0.5, 2.2, 1.0]


def scipy_lrci(loglik, theta_hat, lo, hi, alpha=0.05):
    """Independent grid-free inversion with scipy's brentq."""
    q = stats.chi2.ppf(1 - alpha, 1)
    top = loglik(theta_hat)

    def g(t):
        return -2 * (loglik(t) - top) - q

    return (optimize.brentq(g, lo, theta_hat, xtol=1e-14),
            optimize.brentq(g, theta_hat, hi, xtol=1e-14))


def test_binomial_log_likelihood_is_binomial_pmf():
    m = BinomialProportion(20, 7)
    for t in (0.1, 0.35, 0.9):
        assert log_likelihood(m, t) == pytest.approx(stats.binom.logpmf(7, 20, t), rel=1e-13)


def test_binomial_closed_form_interval():
    iv = wilks_lrci(BinomialProportion(20, 10), 0.05)
    assert iv.lower == pytest.approx(BINOMIAL_20_10[0], abs=1e-9)
    assert iv.upper == pytest.approx(BINOMIAL_20_10[1], abs=1e-9)
    assert iv.threshold == pytest.approx(CHI2_1_095, rel=1e-14)
    assert iv.side_flags == (SideFlag.SOLVED, SideFlag.SOLVED)
    assert iv.notes == ("asymptotic approximation: n=1",)


@pytest.mark.parametrize("x", [1, 4, 13, 19])
def test_binomial_against_scipy(x):
    m = BinomialProportion(20, x)
    iv = wilks_lrci(m)
    lo, hi = scipy_lrci(lambda t: stats.binom.logpmf(x, 20, t), x / 20, 1e-15, 1 - 1e-15)
    assert iv.lower == pytest.approx(lo, abs=1e-8)
    assert iv.upper == pytest.approx(hi, abs=1e-8)


def test_poisson_against_scipy():
    data = [2, 3, 0, 4, 1, 5, 2]
    iv = wilks_lrci(PoissonRate(data))
    mean = sum(data) / len(data)
    lo, hi = scipy_lrci(lambda r: stats.poisson.logpmf(data, r).sum(), mean, 1e-12, 50)
    assert iv.lower == pytest.approx(lo, abs=1e-8)
    assert iv.upper == pytest.approx(hi, abs=1e-8)


def test_normal_mean_known_sigma():
    iv = wilks_lrci(NormalMeanKnownSigma([0.0] * 25, 1.0))
    assert iv.lower == pytest.approx(-NORMAL_MEAN_25, abs=1e-9)
    assert iv.upper == pytest.approx(NORMAL_MEAN_25, abs=1e-9)


def test_normal_mean_profile_closed_form():
    # deviance is n log(1 + n (xbar - mu)^2 / S)
    x = np.array(SAMPLE)
    n, xbar, s = len(x), x.mean(), ((x - x.mean()) ** 2).sum()
    iv = wilks_lrci(NormalMeanProfileSigma(SAMPLE))
    half = math.sqrt(s / n * math.expm1(CHI2_1_095 / n))
    assert iv.lower == pytest.approx(xbar - half, abs=1e-9)
    assert iv.upper == pytest.approx(xbar + half, abs=1e-9)


def test_numeric_profile_matches_closed_form():
    a = wilks_lrci(NormalMeanProfileSigma(SAMPLE, closed_form=True))
    b = wilks_lrci(NormalMeanProfileSigma(SAMPLE, closed_form=False))
    assert a.lower == pytest.approx(b.lower, abs=1e-7)
    assert a.upper == pytest.approx(b.upper, abs=1e-7)


def test_normal_sigma_profile():
    x = np.array(SAMPLE)
    n = len(x)
    s2 = ((x - x.mean()) ** 2).mean()

    def loglik(sig):
        return stats.norm.logpdf(x, x.mean(), sig).sum()

    iv = wilks_lrci(NormalSigmaProfileMean(SAMPLE))
    lo, hi = scipy_lrci(loglik, math.sqrt(s2), 1e-6, 100)
    assert iv.lower == pytest.approx(lo, abs=1e-8)
    assert iv.upper == pytest.approx(hi, abs=1e-8)
    assert iv.notes == (f"asymptotic approximation: n={n}",)


def test_lognormal_mu_matches_normal_on_logs():
    data = [math.exp(v) for v in SAMPLE]
    a = wilks_lrci(LogNormalMuProfileSigma(data))
    b = wilks_lrci(NormalMeanProfileSigma(SAMPLE))
    assert a.lower == pytest.approx(b.lower, abs=1e-9)
    assert a.upper == pytest.approx(b.upper, abs=1e-9)


@pytest.mark.parametrize("model", [
    BinomialProportion(20, 6),
    PoissonRate([3, 1, 4, 1, 5, 9, 2, 6]),
    NormalMeanProfileSigma(SAMPLE),
    NormalSigmaProfileMean(SAMPLE),
])
def test_endpoint_deviance_equals_threshold(model):
    iv = wilks_lrci(model, 0.1)
    q = chi_square_quantile(1, 0.9)
    assert profile_deviance(model, iv.lower) == pytest.approx(q, abs=1e-6)
    assert profile_deviance(model, iv.upper) == pytest.approx(q, abs=1e-6)


def test_mle_and_deviance_zero_at_mle():
    m = PoissonRate([2, 2, 3])
    fit = mle(m)
    assert fit.theta_hat == pytest.approx(7 / 3)
    assert profile_deviance(m, fit.theta_hat) == 0.0
    assert lrt_lambda(m, fit.theta_hat) == 1.0
    assert 0.0 < lrt_lambda(m, 1.0) < 1.0


def test_profile_returns_nuisance():
    value, eta = profile_log_likelihood(NormalMeanProfileSigma(SAMPLE), 1.0)
    x = np.array(SAMPLE)
    assert eta[0] == pytest.approx(math.sqrt(((x - 1.0) ** 2).mean()), rel=1e-12)
    assert value == pytest.approx(stats.norm.logpdf(x, 1.0, eta[0]).sum(), rel=1e-12)


@pytest.mark.parametrize("model", [BinomialProportion(20, 0), BinomialProportion(20, 20),
                                   PoissonRate([0, 0, 0])])
def test_boundary_mle(model):
    with pytest.raises(BoundaryMle):
        wilks_lrci(model)


@pytest.mark.parametrize("tag, kwargs", [
    ("binomial", {"n": 0, "x": 0}),
    ("binomial", {"n": 5, "x": 6}),
    ("poisson", {"data": [1, -1]}),
    ("poisson", {"data": [1.5]}),
    ("normal-mean", {"data": [], "sigma": 1.0}),
    ("normal-mean", {"data": [1.0], "sigma": 0.0}),
    ("normal-mean-profile", {"data": [1.0, 1.0]}),
    ("lognormal-mu", {"data": [1.0, -2.0]}),
    ("cauchy", {}),
])
def test_model_validation(tag, kwargs):
    with pytest.raises(DomainError):
        make_model(tag, **kwargs)


def test_outside_parameter_space():
    with pytest.raises(DomainError):
        profile_deviance(BinomialProportion(10, 3), 1.5)


def test_small_sample_note_absent_for_large_n():
    iv = wilks_lrci(NormalMeanKnownSigma([0.1 * i for i in range(40)], 1.0))
    assert iv.notes == ()


@pytest.mark.parametrize("name, params", [("log", ()), ("logit", ()), ("affine", (2.0, 3.0)),
                                          ("affine", (-1.5, 0.0))])
def test_reparameterized_binomial(name, params):
    g = builtin_transform(name, *params)
    base = BinomialProportion(30, 9)
    iv = wilks_lrci(base)
    rep = wilks_lrci(ReparameterizedModel(base, g))
    lo, hi = sorted((g(iv.lower), g(iv.upper)))
    assert rep.lower == pytest.approx(lo, abs=1e-8)
    assert rep.upper == pytest.approx(hi, abs=1e-8)
    assert rep.theta_hat == pytest.approx(g(0.3), abs=1e-12)


def test_reparameterization_restricts_to_transform_domain():
    base = PoissonRate([0, 1, 0, 0, 1, 0, 0, 0, 1, 0] * 5)
    rep = ReparameterizedModel(base, builtin_transform("logit"))
    assert "restricted" in rep.notes[0]
    iv, riv = wilks_lrci(base), wilks_lrci(rep)
    g = builtin_transform("logit")
    assert riv.lower == pytest.approx(g(iv.lower), abs=1e-8)
    assert riv.upper == pytest.approx(g(iv.upper), abs=1e-8)
    assert riv.notes[0] == rep.notes[0]


def test_reparameterization_domain_check():
    with pytest.raises(DomainError):
        ReparameterizedModel(PoissonRate([1, 2]), builtin_transform("logit"))
    with pytest.raises(DomainError):
        ReparameterizedModel(NormalMeanKnownSigma([-1.0, -2.0]), builtin_transform("log"))


@settings(max_examples=30, deadline=None)
@given(st.integers(5, 200), st.data())
def test_binomial_interval_brackets_mle(n, data):
    x = data.draw(st.integers(1, n - 1))
    iv = wilks_lrci(BinomialProportion(n, x))
    assert 0.0 < iv.lower < x / n < iv.upper < 1.0
    assert iv.deviance_at_lower == pytest.approx(iv.threshold, abs=1e-6)
    assert iv.deviance_at_upper == pytest.approx(iv.threshold, abs=1e-6)
