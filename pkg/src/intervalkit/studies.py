"""Monte Carlo coverage of Wilks intervals and HPD-vs-LRCI comparisons."""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, asdict, field
from typing import Optional

import numpy as np

from .densities import CustomDensity, Normalization
from .exceptions import (
    BoundaryMle,
    DomainError,
    ModeAtBoundary,
    NonIntegrableLikelihood,
    NumericFailure,
)
from .hpd import HpdInterval, hpd_levelset, hpd_one_sided
from .likelihood import (
    BinomialProportion,
    LikelihoodModel,
    LogNormalMuProfileSigma,
    LrciInterval,
    NormalMeanKnownSigma,
    NormalMeanProfileSigma,
    NormalSigmaProfileMean,
    PoissonRate,
    wilks_lrci,
)
from .numeric import DEFAULT_TOLERANCES, Tolerances

__all__ = [
    "CoverageSpec",
    "CoverageResult",
    "ComparisonRecord",
    "SIMULATION_FAMILIES",
    "replication_seed",
    "simulate_lrci_coverage",
    "compare_hpd_lrci",
    "comparison_table",
]

MIN_REPLICATIONS = 100
_MASK64 = (1 << 64) - 1


def replication_seed(master_seed: int, index: int) -> int:
    """SplitMix64 finalizer applied to ``master_seed + (index + 1) * golden``.

    Each replication gets its own stream, independent of execution order.
    """
    z = (master_seed + (index + 1) * 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


@dataclass(frozen=True)
class _SimFamily:
    param_names: tuple
    interest: str
    domains: dict

    def interior(self, name, value):
        lo, hi = self.domains[name]
        return lo < value < hi


SIMULATION_FAMILIES = {
    "binomial": _SimFamily(("p",), "p", {"p": (0.0, 1.0)}),
    "normal-mean": _SimFamily(("mu", "sigma"), "mu",
                              {"mu": (-math.inf, math.inf), "sigma": (0.0, math.inf)}),
    "normal-mean-profile": _SimFamily(("mu", "sigma"), "mu",
                                      {"mu": (-math.inf, math.inf), "sigma": (0.0, math.inf)}),
    "normal-sigma": _SimFamily(("mu", "sigma"), "sigma",
                               {"mu": (-math.inf, math.inf), "sigma": (0.0, math.inf)}),
    "poisson": _SimFamily(("rate",), "rate", {"rate": (0.0, math.inf)}),
    "lognormal-mu": _SimFamily(("mu", "sigma"), "mu",
                               {"mu": (-math.inf, math.inf), "sigma": (0.0, math.inf)}),
}


def _draw_model(family, params, n_obs, rng) -> LikelihoodModel:
    if family == "binomial":
        return BinomialProportion(n_obs, int(rng.binomial(n_obs, params["p"])))
    if family == "poisson":
        return PoissonRate(rng.poisson(params["rate"], n_obs).tolist())
    if family == "lognormal-mu":
        return LogNormalMuProfileSigma(rng.lognormal(params["mu"], params["sigma"], n_obs).tolist())
    data = rng.normal(params["mu"], params["sigma"], n_obs).tolist()
    if family == "normal-mean":
        return NormalMeanKnownSigma(data, params["sigma"])
    if family == "normal-mean-profile":
        return NormalMeanProfileSigma(data)
    return NormalSigmaProfileMean(data)


@dataclass(frozen=True)
class CoverageSpec:
    """One coverage experiment.

    ``true_params`` follows ``SIMULATION_FAMILIES[family].param_names``;
    e.g. ``(p,)`` for ``binomial`` and ``(mu, sigma)`` for ``normal-mean``.
    """

    family: str
    true_params: tuple
    n_obs: int
    replications: int
    alpha: float = 0.05
    seed: int = 0

    def __post_init__(self):
        if self.family not in SIMULATION_FAMILIES:
            raise DomainError(
                f"unknown family {self.family!r}; choose from {sorted(SIMULATION_FAMILIES)}")
        fam = SIMULATION_FAMILIES[self.family]
        params = tuple(float(v) for v in self.true_params)
        object.__setattr__(self, "true_params", params)
        if len(params) != len(fam.param_names):
            raise DomainError(f"{self.family} needs parameters {fam.param_names}")
        for name, value in zip(fam.param_names, params):
            if not fam.interior(name, value):
                raise DomainError(f"{name}={value} is not in the interior of the parameter space")
        if int(self.n_obs) != self.n_obs or self.n_obs < 1:
            raise DomainError(f"n_obs must be a positive integer, got {self.n_obs!r}")
        if int(self.replications) != self.replications or self.replications < MIN_REPLICATIONS:
            raise DomainError(f"replications must be an integer >= {MIN_REPLICATIONS}, "
                              f"got {self.replications!r}")
        if not (0.0 < self.alpha < 1.0):
            raise DomainError(f"alpha must lie in (0, 1), got {self.alpha!r}")
        if int(self.seed) != self.seed or not (0 <= self.seed <= _MASK64):
            raise DomainError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")

    @property
    def params(self) -> dict:
        return dict(zip(SIMULATION_FAMILIES[self.family].param_names, self.true_params))

    @property
    def truth(self) -> float:
        return self.params[SIMULATION_FAMILIES[self.family].interest]


@dataclass(frozen=True)
class CoverageResult:
    empirical_coverage: float
    mc_stderr: float
    n_boundary_skips: int
    replications_used: int
    n_covered: int
    spec: Optional[CoverageSpec] = field(default=None, compare=False)

    def as_record(self) -> dict:
        """Flat record with every spec field echoed."""
        out = {}
        if self.spec is not None:
            out.update({
                "family": self.spec.family,
                "true_params": list(self.spec.true_params),
                "n_obs": self.spec.n_obs,
                "replications": self.spec.replications,
                "alpha": self.spec.alpha,
                "seed": self.spec.seed,
            })
        out.update({
            "empirical_coverage": self.empirical_coverage,
            "mc_stderr": self.mc_stderr,
            "n_boundary_skips": self.n_boundary_skips,
            "replications_used": self.replications_used,
            "n_covered": self.n_covered,
        })
        return out


def _run_chunk(spec: CoverageSpec, start: int, stop: int, tol: Tolerances):
    covered = skipped = 0
    params = spec.params
    truth = spec.truth
    for index in range(start, stop):
        rng = np.random.Generator(np.random.PCG64(replication_seed(spec.seed, index)))
        try:
            model = _draw_model(spec.family, params, spec.n_obs, rng)
            interval = wilks_lrci(model, spec.alpha, tol)
        except BoundaryMle:
            skipped += 1
            continue
        except NumericFailure as exc:
            raise NumericFailure(f"replication {index}: {exc}") from exc
        if interval.lower <= truth <= interval.upper:
            covered += 1
    return covered, skipped


def simulate_lrci_coverage(spec: CoverageSpec, jobs: int = 1,
                           tol: Tolerances = DEFAULT_TOLERANCES) -> CoverageResult:
    """Fraction of simulated Wilks intervals that contain the true parameter.

    Replications whose MLE falls on the parameter boundary are excluded and
    counted in ``n_boundary_skips``.  Results depend only on ``spec``:
    ``jobs`` changes the scheduling, never the numbers.
    """
    if int(jobs) != jobs or jobs < 1:
        raise DomainError(f"jobs must be a positive integer, got {jobs!r}")
    n = spec.replications
    if jobs == 1:
        covered, skipped = _run_chunk(spec, 0, n, tol)
    else:
        n_chunks = jobs * 4
        bounds = [n * i // n_chunks for i in range(n_chunks + 1)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_run_chunk, spec, a, b, tol)
                       for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
            parts = [f.result() for f in futures]
        covered = sum(p[0] for p in parts)
        skipped = sum(p[1] for p in parts)
    used = n - skipped
    if used == 0:
        raise NumericFailure("every replication hit the parameter boundary")
    p = covered / used
    return CoverageResult(
        empirical_coverage=p,
        mc_stderr=math.sqrt(p * (1.0 - p) / used),
        n_boundary_skips=skipped,
        replications_used=used,
        n_covered=covered,
        spec=spec,
    )


@dataclass(frozen=True)
class ComparisonRecord:
    """HPD interval of the normalized profile likelihood next to the Wilks LRCI.

    The density is the profile likelihood in the interest parameter,
    normalized by quadrature, i.e. a flat-prior posterior surrogate.
    """

    model: dict
    alpha: float
    hpd: HpdInterval
    lrci: LrciInterval
    theta_hat: float
    density_mode: float
    deviance_at_hpd: tuple
    density_at_lrci: tuple
    density: CustomDensity = field(repr=False, compare=False)
    source: LikelihoodModel = field(repr=False, compare=False)

    @property
    def hpd_width(self) -> float:
        return self.hpd.width

    @property
    def lrci_width(self) -> float:
        return self.lrci.width

    def as_dict(self):
        return {
            "model": self.model,
            "alpha": self.alpha,
            "hpd": self.hpd.as_dict(),
            "lrci": self.lrci.as_dict(),
            "hpd_width": self.hpd_width,
            "lrci_width": self.lrci_width,
            "theta_hat": self.theta_hat,
            "density_mode": self.density_mode,
            "deviance_at_hpd": list(self.deviance_at_hpd),
            "density_at_lrci": list(self.density_at_lrci),
            "hpd_level": self.hpd.level,
        }


def compare_hpd_lrci(model: LikelihoodModel, alpha: float = 0.05,
                     tol: Tolerances = DEFAULT_TOLERANCES) -> ComparisonRecord:
    lrci = wilks_lrci(model, alpha, tol)
    fit_max = model.profile(lrci.theta_hat, tol)[0]

    def log_profile(theta):
        return model.profile(theta, tol)[0] - fit_max

    try:
        density = CustomDensity(
            log_profile,
            support=model.interest_space,
            normalization=Normalization.UNNORMALIZED,
            bracket=(lrci.lower, lrci.upper),
            tol=tol,
            name=f"profile[{model.tag}]",
        )
    except NumericFailure as exc:
        raise NonIntegrableLikelihood(
            f"profile likelihood of {model.tag} cannot be normalized: {exc}") from exc
    try:
        hpd = hpd_levelset(density, alpha, tol)
    except ModeAtBoundary:
        hpd = hpd_one_sided(density, alpha, tol)

    def deviance(theta):
        return max(0.0, -2.0 * log_profile(theta))

    return ComparisonRecord(
        model=model.describe(),
        alpha=alpha,
        hpd=hpd,
        lrci=lrci,
        theta_hat=lrci.theta_hat,
        density_mode=density.mode,
        deviance_at_hpd=(deviance(hpd.lower), deviance(hpd.upper)),
        density_at_lrci=(density.pdf(lrci.lower), density.pdf(lrci.upper)),
        density=density,
        source=model,
    )


def comparison_table(record: ComparisonRecord, grid: int = 201):
    """Rows of ``(theta, profile deviance, normalized density)`` for plotting.

    The grid spans both intervals padded by half their joint width, clipped
    to the parameter space.
    """
    if int(grid) != grid or grid < 2:
        raise DomainError(f"grid must be an integer >= 2, got {grid!r}")
    lo = min(record.hpd.lower, record.lrci.lower)
    hi = max(record.hpd.upper, record.lrci.upper)
    pad = 0.5 * (hi - lo)
    space = record.source.interest_space
    lo = max(lo - pad, space.lower)
    hi = min(hi + pad, space.upper)
    rows = []
    for i in range(grid):
        theta = lo + (hi - lo) * i / (grid - 1)
        if not space.contains(theta):
            value = record.density.log_pdf(theta)
            rows.append((theta, math.inf if value == -math.inf else math.nan, math.exp(value)))
            continue
        dev = max(0.0, -2.0 * (record.source.profile(theta)[0]
                               - record.source.profile(record.theta_hat)[0]))
        rows.append((theta, dev, record.density.pdf(theta)))
    return rows
