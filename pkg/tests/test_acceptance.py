"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run on its own with ``python3 -m pytest tests/test_acceptance.py -v`` (the
lines are repeated in the terminal summary) or ``python3 tests/test_acceptance.py``.
"""
import io
import json
import math
import sys
import time

import numpy as np
import pytest
from scipy import stats

from intervalkit.cli import main as cli_main
from intervalkit.densities import Beta, Exponential, Gamma, LogNormal, Normal
from intervalkit.exceptions import BoundaryMle, ModeAtBoundary
from intervalkit.hpd import hpd_levelset, hpd_one_sided, hpd_quantile_scan
from intervalkit.likelihood import (
    BinomialProportion,
    NormalMeanKnownSigma,
    NormalMeanProfileSigma,
    PoissonRate,
    ReparameterizedModel,
    SideFlag,
    profile_deviance,
    wilks_lrci,
)
from intervalkit.special import chi_square_quantile, normal_quantile
from intervalkit.transforms import builtin_transform, invariance_report

from oracles import BINOMIAL_20_10, BINOMIAL_EXACT_COVERAGE, EXPONENTIAL_UPPER, HPD_ORACLE, NORMAL_Q975

RESULTS = []

ALPHAS = (0.01, 0.05, 0.10, 0.32)
DENSITIES = {
    "Normal(0,1)": (Normal(0.0, 1.0), stats.norm()),
    "LogNormal(0,1)": (LogNormal(0.0, 1.0), stats.lognorm(1.0)),
    "Gamma(3,1)": (Gamma(3.0, 1.0), stats.gamma(3.0)),
    "Beta(2,5)": (Beta(2.0, 5.0), stats.beta(2.0, 5.0)),
}
ORACLE_KEY = {"Normal(0,1)": "normal", "LogNormal(0,1)": "lognormal",
              "Gamma(3,1)": "gamma", "Beta(2,5)": "beta"}


def report(number, title, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {title} -- {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


@pytest.fixture(scope="module")
def hpd_grid():
    """Level-set and quantile-scan HPD for every density/alpha pair, timed."""
    start = time.perf_counter()
    grid = {}
    for name, (d, _) in DENSITIES.items():
        for alpha in ALPHAS:
            grid[name, alpha] = (hpd_levelset(d, alpha), hpd_quantile_scan(d, alpha))
    return grid, time.perf_counter() - start


def test_criterion_01_normal_hpd():
    start = time.perf_counter()
    h = hpd_levelset(Normal(0.0, 1.0), 0.05)
    elapsed = time.perf_counter() - start
    err = max(abs(h.lower + 1.959964), abs(h.upper - 1.959964))
    oracle_err = max(abs(h.lower + NORMAL_Q975), abs(h.upper - NORMAL_Q975))
    ok = err <= 1e-6 and oracle_err <= 1e-9 and elapsed < 1.0
    report(1, "Normal(0,1) HPD at alpha=0.05", ok,
           f"[{h.lower:.9f}, {h.upper:.9f}], max |err| {err:.1e}, {elapsed * 1e3:.1f} ms")


def test_criterion_02_levelset_vs_scan(hpd_grid):
    grid, elapsed = hpd_grid
    worst = max(max(abs(a.lower - b.lower), abs(a.upper - b.upper)) for a, b in grid.values())
    oracle = max(
        max(abs(a.lower - HPD_ORACLE[ORACLE_KEY[n], al][0]), abs(a.upper - HPD_ORACLE[ORACLE_KEY[n], al][1]))
        for (n, al), (a, _) in grid.items()
    )
    ok = worst <= 1e-5 and oracle <= 1e-6 and elapsed < 10.0
    report(2, "level-set vs quantile-scan on 16 cases", ok,
           f"max endpoint gap {worst:.1e}, max gap to scipy oracle {oracle:.1e}, {elapsed:.2f} s")


def test_criterion_03_interval_conditions(hpd_grid):
    grid, _ = hpd_grid
    failures = []
    worst_cov = worst_dens = 0.0
    for (name, alpha), (h, _) in grid.items():
        d = DENSITIES[name][0]
        cov_err = abs(d.mass(h.lower, h.upper) - (1 - alpha))
        dens_err = abs(d.pdf(h.lower) - d.pdf(h.upper)) / d.modal_density
        worst_cov, worst_dens = max(worst_cov, cov_err), max(worst_dens, dens_err)
        if not (cov_err <= 1e-8 and dens_err <= 1e-8 and h.lower < d.mode < h.upper
                and h.conditions.theorem_applies):
            failures.append((name, alpha))
    report(3, "coverage, equal endpoint density, interior mode", not failures,
           f"max coverage err {worst_cov:.1e}, max density gap/mode {worst_dens:.1e}, failures {failures}")


def test_criterion_04_shortest_interval(hpd_grid):
    grid, _ = hpd_grid
    worst = -math.inf
    for (name, alpha), (h, _) in grid.items():
        ref = DENSITIES[name][1]
        ps = np.arange(0.0, alpha + 5e-5, 1e-4)
        ps = ps[ps <= alpha]
        widths = ref.ppf(ps + 1 - alpha) - ref.ppf(ps)
        widths = widths[np.isfinite(widths)]
        worst = max(worst, h.width - widths.min())
    report(4, "no grid interval shorter than the HPD", worst <= 1e-6,
           f"max (HPD width - shortest grid width) {worst:.1e}")


def test_criterion_05_binomial_lrci():
    iv = wilks_lrci(BinomialProportion(20, 10), 0.05)
    err = max(abs(iv.lower - 0.29105), abs(iv.upper - 0.70895))
    closed_err = max(abs(iv.lower - BINOMIAL_20_10[0]), abs(iv.upper - BINOMIAL_20_10[1]))
    q = chi_square_quantile(1, 0.95)
    reduction = max(abs(20 * math.log(0.25 / (t * (1 - t))) - q) for t in iv.as_tuple())
    ok = err <= 1e-4 and closed_err <= 1e-9 and reduction <= 1e-6
    report(5, "binomial n=20 x=10 LRCI", ok,
           f"[{iv.lower:.7f}, {iv.upper:.7f}], |err| vs stated {err:.1e}, "
           f"vs closed-form root {closed_err:.1e}")


def _lrci_grid():
    rng = np.random.default_rng(2024)
    models = [BinomialProportion(n, x) for n in (10, 20, 50, 200) for x in (1, n // 4, n // 2, n - 1)]
    models += [PoissonRate(rng.poisson(lam, size).tolist()) for lam in (0.5, 3.0, 20.0) for size in (5, 40)]
    models += [NormalMeanProfileSigma(rng.normal(mu, s, size).tolist())
               for mu, s in ((0.0, 1.0), (10.0, 0.1)) for size in (3, 30)]
    models += [NormalMeanKnownSigma(rng.normal(1.0, 2.0, 25).tolist(), 2.0)]
    return models


def test_criterion_06_endpoint_deviance():
    worst, count = 0.0, 0
    for m in _lrci_grid():
        for alpha in (0.01, 0.05, 0.10, 0.32):
            iv = wilks_lrci(m, alpha)
            q = chi_square_quantile(1, 1 - alpha)
            for end, flag in zip(iv.as_tuple(), iv.side_flags):
                if flag is SideFlag.SOLVED:
                    worst = max(worst, abs(profile_deviance(m, end) - q))
                    count += 1
    report(6, "profile deviance at LRCI endpoints equals chi-square quantile", worst <= 1e-6,
           f"{count} solved endpoints, max |deviance - threshold| {worst:.1e}")


def test_criterion_07_lrci_reparameterization():
    bases = {"binomial(30,9)": BinomialProportion(30, 9),
             "poisson(mean 0.2)": PoissonRate([0, 1, 0, 0, 1, 0, 0, 0, 1, 0] * 5),
             "poisson(mean 3.4)": PoissonRate([3, 5, 2, 4, 3, 6, 1, 4, 3, 3])}
    worst, checked, skipped = 0.0, 0, []
    for label, base in bases.items():
        iv = wilks_lrci(base)
        for name, params in (("log", ()), ("logit", ()), ("affine", (2.0, 3.0))):
            g = builtin_transform(name, *params)
            if base.interest_space.lower < g.domain.lower or iv.upper >= g.domain.upper:
                skipped.append(f"{name} on {label}")
                continue
            rep = wilks_lrci(ReparameterizedModel(base, g))
            lo, hi = sorted((g(iv.lower), g(iv.upper)))
            worst = max(worst, abs(rep.lower - lo), abs(rep.upper - hi))
            checked += 1
    report(7, "reparameterized LRCI equals mapped LRCI", worst <= 1e-6 and checked >= 7,
           f"{checked} model/transform pairs, max gap {worst:.1e}, skipped {skipped}")


def test_criterion_08_affine_hpd_invariance():
    r = invariance_report(Normal(0.0, 1.0), builtin_transform("affine", 2.0, 3.0), 0.05)
    gap = max(abs(r.pushforward_hpd.lower - r.mapped_interval[0]),
              abs(r.pushforward_hpd.upper - r.mapped_interval[1]))
    ratio_gap = max(abs(a - b) for a, b in zip(r.ratio_change_of_variable, r.ratio_original))
    report(8, "affine(2,3) HPD invariance for Normal(0,1)", gap <= 1e-6 and ratio_gap <= 1e-8,
           f"recomputed vs mapped endpoints {gap:.1e}, ratio gap {ratio_gap:.1e}")


def test_criterion_09_reparam_ratio_invariance():
    details, ok = [], True
    for label, d, g in (("Normal under exp", Normal(0.0, 1.0), builtin_transform("exp")),
                        ("LogNormal under log", LogNormal(0.0, 1.0), builtin_transform("log"))):
        r = invariance_report(d, g, 0.05)
        ratio_gap = max(abs(a - b) for a, b in zip(r.ratio_reparam, r.ratio_original))
        mode_gap = abs(r.mode_of_reparam - r.mode_mapped)
        ok &= ratio_gap <= 1e-12 and mode_gap <= 1e-8
        details.append(f"{label}: ratio gap {ratio_gap:.1e}, mode gap {mode_gap:.1e}")
    report(9, "Jacobian-free ratios and mode are invariant", ok, "; ".join(details))


def test_criterion_10_non_invariance():
    r = invariance_report(Normal(0.0, 1.0), builtin_transform("exp"), 0.05)
    lognormal = LogNormal(0.0, 1.0)
    cov_mapped = lognormal.mass(*r.mapped_interval)
    cov_recomputed = lognormal.mass(r.pushforward_hpd.lower, r.pushforward_hpd.upper)
    gap = r.widths["mapped"] - r.widths["recomputed"]
    ok = (r.widths["recomputed"] < r.widths["mapped"] and gap > 0.01
          and abs(cov_mapped - 0.95) <= 1e-8 and abs(cov_recomputed - 0.95) <= 1e-8)
    report(10, "exp-mapped Normal HPD is not the lognormal HPD", ok,
           f"widths mapped {r.widths['mapped']:.6f} vs recomputed {r.widths['recomputed']:.6f} "
           f"(gap {gap:.4f}); coverages {cov_mapped:.10f}, {cov_recomputed:.10f}")


def _cli(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = cli_main(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def test_criterion_11_wilks_coverage():
    argv = ["coverage", "--model", "binomial", "--theta", "0.3", "--n", "50", "--reps", "20000",
            "--alpha", "0.05", "--seed", "42"]
    start = time.perf_counter()
    code1, out1, _ = _cli(*argv)
    elapsed = time.perf_counter() - start
    code2, out2, _ = _cli(*argv)
    code3, out3, _ = _cli(*argv, "--jobs", "4")
    result = json.loads(out1)["result"] if code1 == 0 else {}
    cov = result.get("empirical_coverage", math.nan)
    exact_gap = abs(cov - BINOMIAL_EXACT_COVERAGE)
    ok = (code1 == code2 == code3 == 0 and 0.935 <= cov <= 0.965 and elapsed < 30.0
          and out1 == out2 == out3 and exact_gap <= 4 * result["mc_stderr"])
    report(11, "binomial theta=0.3 n=50 coverage, 20000 reps", ok,
           f"coverage {cov:.4f} (exact {BINOMIAL_EXACT_COVERAGE:.4f}), {elapsed:.1f} s, "
           f"identical across reruns/jobs: {out1 == out2 == out3}")


def test_criterion_12_special_functions():
    q1 = chi_square_quantile(1, 0.95)
    q2 = chi_square_quantile(2, 0.95)
    z = normal_quantile(0.975)
    ok = abs(q1 - 3.841459) <= 1e-6 and abs(q1 - z * z) <= 1e-8 and abs(q2 + 2 * math.log(0.05)) <= 1e-8
    report(12, "chi-square quantiles", ok,
           f"chi2_1(0.95)={q1!r}, z^2={z * z!r}, chi2_2(0.95)={q2!r} vs {-2 * math.log(0.05)!r}")


def test_criterion_13_boundary_handling():
    d = Exponential(1.0)
    try:
        hpd_levelset(d, 0.05)
        levelset_flagged = False
    except ModeAtBoundary:
        levelset_flagged = True
    h = hpd_one_sided(d, 0.05)
    code, out, err = _cli("hpd", "--family", "exponential", "--rate", "1", "--alpha", "0.05")
    rec = json.loads(out)
    try:
        wilks_lrci(BinomialProportion(20, 0), 0.05)
        boundary_raised = False
    except BoundaryMle:
        boundary_raised = True
    ok = (levelset_flagged and h.one_sided and h.lower == 0.0
          and abs(h.upper - 2.9957323) <= 1e-7 and abs(h.upper - EXPONENTIAL_UPPER) <= 1e-12
          and code == 0 and rec["warnings"] and rec["result"]["method"] == "one-sided"
          and boundary_raised)
    report(13, "boundary mode and boundary MLE are surfaced", ok,
           f"Exponential(1) -> one-sided [{h.lower}, {h.upper:.7f}] with warning {rec['warnings']!r}; "
           f"binomial x=0 raises BoundaryMle: {boundary_raised}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
