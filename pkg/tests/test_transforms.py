import math

import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from intervalkit.densities import Gamma, LogNormal, Normal
from intervalkit.exceptions import DomainError
from intervalkit.hpd import hpd_levelset
from intervalkit.transforms import (
    PushforwardDensity,
    PushforwardSemantics,
    RelabeledDensity,
    builtin_transform,
    invariance_report,
    map_interval_general,
    map_interval_monotone,
    parse_transform,
    pushforward,
)


@pytest.mark.parametrize("name, params, x", [
    ("identity", (), 0.7), ("log", (), 2.5), ("exp", (), -1.2), ("logit", (), 0.3),
    ("affine", (2.0, 3.0), -0.4), ("affine", (-0.5, 1.0), 4.0), ("power", (3.0,), -2.0),
    ("power", (0.5,), 4.0), ("power", (-1.0,), 2.0),
])
def test_inverse_and_derivative(name, params, x):
    g = builtin_transform(name, *params)
    y = g(x)
    assert g.inverse(y) == pytest.approx(x, rel=1e-13)
    h = 1e-6 * max(1.0, abs(x))
    numeric = (g(x + h) - g(x - h)) / (2 * h)
    assert g.derivative(x) == pytest.approx(numeric, rel=1e-6)
    assert g.increasing == (g.derivative(x) > 0)


def test_edges_map_to_infinity():
    assert builtin_transform("log")(0.0) == -math.inf
    assert builtin_transform("logit")(1.0) == math.inf


@pytest.mark.parametrize("text", ["nope", "affine:1", "affine:0,1", "log:2", "power:0", "affine:a,b"])
def test_bad_transforms(text):
    with pytest.raises(DomainError):
        parse_transform(text)


def test_parse_transform():
    g = parse_transform("affine:2,3")
    assert g(1.0) == 5.0
    assert g.name == "affine(2,3)"


def test_pushforward_of_normal_under_exp_is_lognormal():
    push = PushforwardDensity(Normal(0.0, 1.0), builtin_transform("exp"))
    ref = LogNormal(0.0, 1.0)
    for y in (0.05, 0.5, 1.0, 3.0, 12.0):
        assert push.pdf(y) == pytest.approx(ref.pdf(y), rel=1e-13)
        assert push.cdf(y) == pytest.approx(ref.cdf(y), rel=1e-13)
    assert push.mode == pytest.approx(math.exp(-1.0), abs=1e-8)


def test_pushforward_decreasing_transform():
    d = Gamma(3.0, 1.0)
    push = PushforwardDensity(d, builtin_transform("power", -1.0))
    ref = stats.invgamma(3.0)
    for y in (0.1, 0.3, 1.0, 2.0):
        assert push.pdf(y) == pytest.approx(ref.pdf(y), rel=1e-11)
        assert push.cdf(y) == pytest.approx(ref.cdf(y), rel=1e-11)
    assert push.mode == pytest.approx(0.25, abs=1e-7)


def test_relabeled_density_has_no_jacobian():
    d = Normal(0.0, 1.0)
    g = builtin_transform("exp")
    r = pushforward(d, g, PushforwardSemantics.REPARAMETERIZATION)
    assert isinstance(r, RelabeledDensity) and not r.normalized
    for x in (-1.0, 0.3, 2.0):
        assert r.pdf(g(x)) == pytest.approx(d.pdf(x), rel=1e-14)
    assert r.mode == pytest.approx(1.0, rel=1e-15)
    assert r.total_mass() == pytest.approx(math.sqrt(math.e), rel=1e-7)


def test_domain_mismatch():
    with pytest.raises(DomainError):
        pushforward(Normal(), builtin_transform("log"))


def test_map_interval_monotone():
    assert map_interval_monotone((1.0, 2.0), builtin_transform("affine", -1.0, 0.0)) == (-2.0, -1.0)
    with pytest.raises(DomainError):
        map_interval_monotone((-1.0, 2.0), builtin_transform("log"))


def test_map_interval_general():
    lo, hi = map_interval_general((-1.0, 2.0), lambda x: x * x)
    assert lo == pytest.approx(0.0, abs=1e-12) and hi == 4.0
    lo, hi = map_interval_general((0.0, 2 * math.pi), math.sin)
    assert lo == pytest.approx(-1.0, abs=1e-12) and hi == pytest.approx(1.0, abs=1e-12)


class TestInvarianceReport:
    def test_affine(self):
        r = invariance_report(Normal(0.0, 1.0), builtin_transform("affine", 2.0, 3.0), 0.05)
        assert r.pushforward_hpd.lower == pytest.approx(r.mapped_interval[0], abs=1e-6)
        assert r.pushforward_hpd.upper == pytest.approx(r.mapped_interval[1], abs=1e-6)
        assert r.ratio_change_of_variable[0] == pytest.approx(r.ratio_original[0], abs=1e-8)
        assert abs(r.width_gap) < 1e-6 and abs(r.mode_gap) < 1e-6

    def test_exp_discrepancy(self):
        r = invariance_report(Normal(0.0, 1.0), builtin_transform("exp"), 0.05)
        assert r.ratio_reparam == r.ratio_original
        assert r.widths["recomputed"] < r.widths["mapped"]
        assert r.mapped_coverage == pytest.approx(0.95, abs=1e-10)
        assert r.mode_of_reparam == 1.0
        assert r.mode_of_pushforward == pytest.approx(math.exp(-1), abs=1e-8)
        out = r.as_dict()
        assert out["width_gap"] > 0.01 and out["pushforward_hpd"]["coverage"] == pytest.approx(0.95)

    def test_log_of_lognormal_recovers_normal(self):
        r = invariance_report(LogNormal(0.0, 1.0), builtin_transform("log"), 0.05)
        assert r.pushforward_hpd.lower == pytest.approx(-1.959963984540054, abs=1e-7)
        assert r.pushforward_hpd.upper == pytest.approx(1.959963984540054, abs=1e-7)


@settings(max_examples=20, deadline=None)
@given(st.floats(-5, 5).filter(lambda a: abs(a) > 0.05), st.floats(-5, 5), st.floats(0.02, 0.4))
def test_affine_invariance_property(a, b, alpha):
    d = Gamma(4.0, 1.5)
    r = invariance_report(d, builtin_transform("affine", a, b), alpha)
    scale = abs(a)
    assert r.pushforward_hpd.lower == pytest.approx(r.mapped_interval[0], abs=1e-6 * scale)
    assert r.pushforward_hpd.upper == pytest.approx(r.mapped_interval[1], abs=1e-6 * scale)


@settings(max_examples=20, deadline=None)
@given(st.floats(-2, 2), st.floats(0.2, 1.5))
def test_reparam_ratios_exact(mu, sigma):
    d = Normal(mu, sigma)
    r = invariance_report(d, builtin_transform("exp"), 0.05)
    h = hpd_levelset(d, 0.05)
    assert r.ratio_reparam[0] == pytest.approx(r.ratio_original[0], abs=1e-12)
    assert r.ratio_reparam[1] == pytest.approx(r.ratio_original[1], abs=1e-12)
    assert r.original_hpd == h
