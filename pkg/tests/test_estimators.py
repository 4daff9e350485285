import math

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from intervalkit.estimators import DensityHPD, ProfileLRCI
from intervalkit.exceptions import BoundaryMle, DomainError


@pytest.fixture
def sample():
    return np.random.default_rng(0).normal(2.0, 0.5, size=200)


def test_get_set_params_and_clone():
    est = DensityHPD(family="lognormal", alpha=0.1)
    assert est.get_params() == {"family": "lognormal", "alpha": 0.1, "method": "levelset"}
    other = clone(est).set_params(alpha=0.2)
    assert other.alpha == 0.2 and est.alpha == 0.1


def test_density_hpd_normal(sample):
    est = DensityHPD().fit(sample)
    mu, sigma = sample.mean(), sample.std()
    assert est.params_ == pytest.approx({"mu": mu, "sigma": sigma})
    assert est.interval_.lower == pytest.approx(mu - 1.959963984540054 * sigma, abs=1e-8)
    assert est.predict([mu, mu + 10 * sigma]).tolist() == [1, 0]
    assert est.score_samples([mu])[0] == pytest.approx(1.0, abs=1e-12)


def test_density_hpd_accepts_column(sample):
    a = DensityHPD().fit(sample).interval_
    b = DensityHPD().fit(sample.reshape(-1, 1)).interval_
    assert a == b


def test_density_hpd_scan_agrees(sample):
    x = np.exp(sample)
    a = DensityHPD("lognormal").fit(x).interval_
    b = DensityHPD("lognormal", method="scan").fit(x).interval_
    assert a.lower == pytest.approx(b.lower, abs=1e-5)
    assert a.upper == pytest.approx(b.upper, abs=1e-5)


def test_density_hpd_exponential_is_one_sided():
    x = np.random.default_rng(1).exponential(2.0, size=500)
    est = DensityHPD("exponential").fit(x)
    assert est.interval_.one_sided and est.interval_.lower == 0.0
    assert est.interval_.upper == pytest.approx(-math.log(0.05) * x.mean(), rel=1e-10)


@pytest.mark.parametrize("kwargs, X", [
    ({"family": "gamma"}, [1.0, 2.0]),
    ({"alpha": 1.5}, [1.0, 2.0]),
    ({"method": "mcmc"}, [1.0, 2.0]),
    ({}, [1.0]),
    ({"family": "lognormal"}, [1.0, -2.0]),
    ({}, np.ones((3, 2))),
])
def test_density_hpd_validation(kwargs, X):
    with pytest.raises((DomainError, ValueError)):
        DensityHPD(**kwargs).fit(X)


def test_not_fitted():
    with pytest.raises(NotFittedError):
        DensityHPD().predict([1.0])
    with pytest.raises(NotFittedError):
        ProfileLRCI().predict([1.0])


def test_profile_lrci_normal_mean():
    est = ProfileLRCI(sigma=1.0).fit(np.zeros(25))
    assert est.interval_.upper == pytest.approx(0.3919927969080108, abs=1e-9)
    assert est.predict([0.0, 0.5]).tolist() == [1, 0]
    dev = est.deviance([est.interval_.lower, 0.0])
    assert dev[0] == pytest.approx(est.interval_.threshold, abs=1e-6) and dev[1] == 0.0


def test_profile_lrci_binomial_outcomes():
    est = ProfileLRCI("binomial").fit([1] * 10 + [0] * 10)
    assert est.interval_.lower == pytest.approx(0.29098246003634654, abs=1e-9)
    assert est.mle_.theta_hat == 0.5
    assert math.isinf(est.deviance([2.0])[0])
    with pytest.raises(DomainError):
        ProfileLRCI("binomial").fit([0, 1, 2])
    with pytest.raises(BoundaryMle):
        ProfileLRCI("binomial").fit([0, 0, 0])


def test_profile_lrci_poisson():
    est = ProfileLRCI("poisson").fit([2, 3, 1, 4])
    assert est.interval_.lower < 2.5 < est.interval_.upper
