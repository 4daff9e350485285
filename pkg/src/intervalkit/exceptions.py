"""Exception hierarchy for intervalkit.

Argument-shaped problems derive from :class:`DomainError` (a ``ValueError``);
everything that goes wrong while computing derives from
:class:`NumericFailure`.  The CLI maps the two families to different exit
codes.
"""


class IntervalKitError(Exception):
    """Base class for all intervalkit errors."""


class DomainError(IntervalKitError, ValueError):
    """An argument lies outside the domain of the operation."""


class NumericFailure(IntervalKitError, ArithmeticError):
    """A numerical procedure could not produce a trustworthy answer."""


class NoSignChange(NumericFailure):
    """The root-finding bracket does not straddle a sign change."""


class MaxIterationsExceeded(NumericFailure):
    pass


class MaxSubdivisionsExceeded(NumericFailure):
    pass


class NonUnimodal(NumericFailure):
    """A density failed the unimodality grid check."""


class ModeAtBoundary(NumericFailure):
    """The density mode sits on a support endpoint.

    A two-sided equal-density interval around the mode does not exist;
    use :func:`intervalkit.hpd.hpd_one_sided` instead.
    """


class NonUniqueHpd(NumericFailure):
    """The density is flat at the solution level, so the HPD interval is not unique."""


class BoundaryMle(NumericFailure):
    """The MLE lies on the boundary of the parameter space.

    The chi-square limit of the likelihood-ratio statistic does not hold
    there, so no Wilks interval is produced.
    """


class NonIntegrableLikelihood(NumericFailure):
    pass
