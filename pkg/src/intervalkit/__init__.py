"""Highest posterior density intervals, profile likelihood-ratio intervals,
and their behaviour under monotone transforms."""

__version__ = "1.0.0"

from .exceptions import (  # noqa: E402
    BoundaryMle,
    DomainError,
    IntervalKitError,
    MaxIterationsExceeded,
    MaxSubdivisionsExceeded,
    ModeAtBoundary,
    NoSignChange,
    NonIntegrableLikelihood,
    NonUnimodal,
    NonUniqueHpd,
    NumericFailure,
)
from .numeric import DEFAULT_TOLERANCES, Bracket, Tolerances, find_root, integrate, maximize_1d  # noqa: E402
from .special import chi_square_cdf, chi_square_quantile, normal_cdf, normal_quantile  # noqa: E402
from .densities import (  # noqa: E402
    Beta,
    CustomDensity,
    Exponential,
    Gamma,
    LogNormal,
    Normal,
    Support,
    UnimodalDensity,
    make_density,
)
from .hpd import HpdInterval, check_conditions, density_ratio_to_mode, hpd_levelset, hpd_one_sided, hpd_quantile_scan  # noqa: E402
from .likelihood import (  # noqa: E402
    BinomialProportion,
    LogNormalMuProfileSigma,
    NormalMeanKnownSigma,
    NormalMeanProfileSigma,
    NormalSigmaProfileMean,
    PoissonRate,
    ReparameterizedModel,
    make_model,
    profile_deviance,
    wilks_lrci,
)
from .transforms import (  # noqa: E402
    PushforwardSemantics,
    builtin_transform,
    invariance_report,
    parse_transform,
    pushforward,
)
from .studies import CoverageSpec, compare_hpd_lrci, simulate_lrci_coverage  # noqa: E402
from .estimators import DensityHPD, ProfileLRCI  # noqa: E402
