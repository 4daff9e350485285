"""Monotone transforms, pushforward densities and the invariance report.

A monotone map ``g`` can act on a density in two ways:

``CHANGE_OF_VARIABLE``
    the density of ``Y = g(X)``, ``f_Y(y) = f_X(g^{-1}(y)) |dx/dy|``;
``REPARAMETERIZATION``
    the likelihood-style relabelling ``h(y) = f_X(g^{-1}(y))`` with no
    Jacobian factor.

Ratios of ``h`` and the location of its maximum are exactly invariant under
``g``; for ``f_Y`` that is only true when the Jacobian is constant (affine
maps).  :func:`invariance_report` computes both so the gap can be measured.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, asdict
from typing import Callable, Optional

from .densities import Family, Support, UnimodalDensity, check_unimodal
from .exceptions import DomainError, ModeAtBoundary, NumericFailure
from .hpd import HpdInterval, density_ratio_to_mode, hpd_levelset, hpd_one_sided
from .numeric import DEFAULT_TOLERANCES, Tolerances, integrate, maximize_1d

__all__ = [
    "Direction",
    "PushforwardSemantics",
    "MonotoneTransform",
    "PushforwardDensity",
    "RelabeledDensity",
    "InvarianceReport",
    "builtin_transform",
    "parse_transform",
    "pushforward",
    "map_interval_monotone",
    "map_interval_general",
    "invariance_report",
]


class Direction(str, enum.Enum):
    INCREASING = "increasing"
    DECREASING = "decreasing"


class PushforwardSemantics(str, enum.Enum):
    CHANGE_OF_VARIABLE = "change-of-variable"
    REPARAMETERIZATION = "reparameterization"


@dataclass(frozen=True)
class MonotoneTransform:
    forward: Callable[[float], float]
    inverse: Callable[[float], float]
    derivative: Callable[[float], float]
    direction: Direction
    name: str
    domain: Support = Support()

    def __call__(self, x: float) -> float:
        return self.forward(x)

    def log_abs_derivative(self, x: float) -> float:
        d = abs(self.derivative(x))
        return math.log(d) if d > 0 else -math.inf

    def jacobian(self, y: float) -> float:
        """``|dx/dy|`` at ``x = g^{-1}(y)``."""
        return 1.0 / abs(self.derivative(self.inverse(y)))

    @property
    def increasing(self) -> bool:
        return self.direction is Direction.INCREASING

    def in_domain(self, x: float) -> bool:
        return self.domain.lower <= x <= self.domain.upper


def _log(x):
    if x == 0:
        return -math.inf
    return math.log(x)


def _exp(x):
    try:
        return math.exp(x)
    except OverflowError:
        return math.inf


def _logit(x):
    if x == 0:
        return -math.inf
    if x == 1:
        return math.inf
    return math.log(x) - math.log1p(-x)


def _expit(y):
    if y >= 0:
        return 1.0 / (1.0 + math.exp(-y))
    z = math.exp(y)
    return z / (1.0 + z)


def _fmt(v):
    return format(v, "g")


def builtin_transform(name: str, *params: float) -> MonotoneTransform:
    """One of ``identity``, ``log``, ``exp``, ``affine(a, b)``, ``power(k)``, ``logit``."""
    name = name.lower()
    if name == "identity":
        if params:
            raise DomainError("identity takes no parameters")
        return MonotoneTransform(lambda x: x, lambda y: y, lambda x: 1.0,
                                 Direction.INCREASING, "identity")
    if name == "log":
        if params:
            raise DomainError("log takes no parameters")
        return MonotoneTransform(_log, _exp, lambda x: 1.0 / x, Direction.INCREASING, "log",
                                 Support(0.0, math.inf))
    if name == "exp":
        if params:
            raise DomainError("exp takes no parameters")
        return MonotoneTransform(_exp, _log, _exp, Direction.INCREASING, "exp")
    if name == "logit":
        if params:
            raise DomainError("logit takes no parameters")
        return MonotoneTransform(_logit, _expit, lambda x: 1.0 / (x * (1.0 - x)),
                                 Direction.INCREASING, "logit", Support(0.0, 1.0))
    if name == "affine":
        if len(params) != 2:
            raise DomainError("affine takes two parameters a, b (y = a*x + b)")
        a, b = (float(p) for p in params)
        if a == 0 or not (math.isfinite(a) and math.isfinite(b)):
            raise DomainError(f"affine requires finite a != 0 and finite b, got a={a}, b={b}")
        return MonotoneTransform(
            lambda x: a * x + b, lambda y: (y - b) / a, lambda x: a,
            Direction.INCREASING if a > 0 else Direction.DECREASING,
            f"affine({_fmt(a)},{_fmt(b)})")
    if name == "power":
        if len(params) != 1:
            raise DomainError("power takes one parameter k (y = x**k)")
        k = float(params[0])
        if k == 0 or not math.isfinite(k):
            raise DomainError(f"power requires a finite k != 0, got {k}")
        label = f"power({_fmt(k)})"
        if k > 0 and k == int(k) and int(k) % 2 == 1:
            def inverse(y):
                return math.copysign(abs(y) ** (1.0 / k), y)
            return MonotoneTransform(lambda x: x ** int(k), inverse,
                                     lambda x: k * x ** (int(k) - 1),
                                     Direction.INCREASING, label)

        def forward(x):
            if x == 0:
                return 0.0 if k > 0 else math.inf
            if math.isinf(x):
                return math.inf if k > 0 else 0.0
            return x ** k

        def inverse(y):
            if y == 0:
                return 0.0 if k > 0 else math.inf
            if math.isinf(y):
                return math.inf if k > 0 else 0.0
            return y ** (1.0 / k)

        return MonotoneTransform(forward, inverse, lambda x: k * x ** (k - 1.0),
                                 Direction.INCREASING if k > 0 else Direction.DECREASING,
                                 label, Support(0.0, math.inf))
    raise DomainError(f"unknown transform {name!r}")


def parse_transform(text: str) -> MonotoneTransform:
    """Parse the command-line syntax ``name`` or ``name:p1,p2``, e.g. ``affine:2,3``."""
    name, _, rest = text.strip().partition(":")
    params = []
    if rest.strip():
        try:
            params = [float(p) for p in rest.split(",")]
        except ValueError:
            raise DomainError(f"bad transform parameters in {text!r}") from None
    return builtin_transform(name.strip(), *params)


def _mapped_support(support: Support, g: MonotoneTransform) -> Support:
    a, b = g.forward(support.lower), g.forward(support.upper)
    ca = support.lower_closed and math.isfinite(a)
    cb = support.upper_closed and math.isfinite(b)
    if not g.increasing:
        a, b, ca, cb = b, a, cb, ca
    return Support(a, b, lower_closed=ca, upper_closed=cb)


def _check_domain(d: UnimodalDensity, g: MonotoneTransform):
    lo, hi = d.support.as_tuple()
    if lo < g.domain.lower or hi > g.domain.upper:
        raise DomainError(
            f"transform {g.name} is defined on [{g.domain.lower}, {g.domain.upper}], "
            f"which does not cover the support [{lo}, {hi}] of {d!r}")


def _grid_ps(n):
    tails = [1e-12, 1e-9, 1e-6, 1e-4]
    body = [(i + 0.5) / n for i in range(n)]
    return sorted(set(tails + body + [1.0 - p for p in tails]))


class PushforwardDensity(UnimodalDensity):
    """Density of ``Y = g(X)`` (with the Jacobian factor)."""

    family = Family.CUSTOM

    def __init__(self, base: UnimodalDensity, g: MonotoneTransform,
                 tol: Tolerances = DEFAULT_TOLERANCES, grid_size: int = 1000):
        _check_domain(base, g)
        self.base = base
        self.transform = g
        support = _mapped_support(base.support, g)
        self.support = support
        self.tol = tol
        ys = sorted(self._map_quantile(p) for p in _grid_ps(grid_size))
        q1, q3 = self._map_quantile(0.25), self._map_quantile(0.75)
        self.scale = abs(q3 - q1) or 1.0
        mode = self._locate_mode(ys)
        UnimodalDensity.__init__(
            self,
            {"base": repr(base), "transform": g.name,
             "semantics": PushforwardSemantics.CHANGE_OF_VARIABLE.value},
            support, mode, tol)
        check_unimodal(self, grid=ys)

    def _map_quantile(self, p):
        q = self.base.quantile(p if self.transform.increasing else 1.0 - p)
        return self.transform.forward(q)

    def _log_pdf(self, y):
        x = self.transform.inverse(y)
        lp = self.base.log_pdf(x)
        if lp == -math.inf:
            return lp
        return lp - self.transform.log_abs_derivative(x)

    def _locate_mode(self, ys):
        values = [self.log_pdf(y) for y in ys]
        best = max(range(len(ys)), key=lambda i: values[i])
        n = len(ys) - 1
        if 0 < best < n:
            a, b = ys[best - 1], ys[best + 1]
        else:
            edge = self.support.lower if best == 0 else self.support.upper
            if not math.isfinite(edge):
                raise NumericFailure(f"pushforward of {self.base!r} under {self.transform.name} "
                                     "peaks at an infinite support edge")
            inner = ys[1] if best == 0 else ys[n - 1]
            a, b = sorted((edge, inner))
            if self.log_pdf(edge) >= values[best]:
                return edge
        x, _ = maximize_1d(self.log_pdf, (a, b), self.tol)
        return x

    def cdf(self, y):
        x = self.transform.inverse(y)
        return self.base.cdf(x) if self.transform.increasing else self.base.sf(x)

    def sf(self, y):
        x = self.transform.inverse(y)
        return self.base.sf(x) if self.transform.increasing else self.base.cdf(x)

    def quantile(self, p):
        if not (0.0 < p < 1.0):
            raise DomainError(f"quantile requires p in (0, 1), got {p!r}")
        return self._map_quantile(p)

    def __repr__(self):
        return f"Pushforward({self.base!r}, {self.transform.name})"


class RelabeledDensity(UnimodalDensity):
    """``h(y) = f_X(g^{-1}(y))``: the base density read in new coordinates,
    without the Jacobian.  It does not integrate to one in general."""

    family = Family.CUSTOM
    normalized = False

    def __init__(self, base: UnimodalDensity, g: MonotoneTransform,
                 tol: Tolerances = DEFAULT_TOLERANCES, grid_size: int = 1000):
        _check_domain(base, g)
        self.base = base
        self.transform = g
        support = _mapped_support(base.support, g)
        ys = sorted(g.forward(base.quantile(p)) for p in _grid_ps(grid_size))
        self.scale = abs(ys[len(ys) * 3 // 4] - ys[len(ys) // 4]) or 1.0
        UnimodalDensity.__init__(
            self,
            {"base": repr(base), "transform": g.name,
             "semantics": PushforwardSemantics.REPARAMETERIZATION.value},
            support, g.forward(base.mode), tol)
        check_unimodal(self, grid=ys)

    def _log_pdf(self, y):
        return self.base.log_pdf(self.transform.inverse(y))

    def cdf(self, y):
        """Accumulated (unnormalized) mass below ``y``."""
        lo, hi = self.effective_bounds()
        if y <= lo:
            return 0.0
        return integrate(self.pdf, lo, min(y, hi), self.tol)

    def sf(self, y):
        return self.total_mass() - self.cdf(y)

    def total_mass(self) -> float:
        lo, hi = self.effective_bounds()
        return integrate(self.pdf, lo, hi, self.tol)

    def __repr__(self):
        return f"Relabeled({self.base!r}, {self.transform.name})"


def pushforward(d: UnimodalDensity, g: MonotoneTransform,
                semantics=PushforwardSemantics.CHANGE_OF_VARIABLE,
                tol: Tolerances = DEFAULT_TOLERANCES) -> UnimodalDensity:
    """Push ``d`` through ``g`` under the requested semantics.

    The result is checked for unimodality on a 1000-point grid and rejected
    with :class:`~intervalkit.exceptions.NonUnimodal` if it fails.
    """
    semantics = PushforwardSemantics(semantics)
    if semantics is PushforwardSemantics.CHANGE_OF_VARIABLE:
        return PushforwardDensity(d, g, tol)
    return RelabeledDensity(d, g, tol)


def map_interval_monotone(interval, g: MonotoneTransform):
    """Image of ``[l, u]`` under a monotone ``g``, returned as ``(lower, upper)``."""
    lower, upper = (float(v) for v in interval)
    if lower > upper:
        raise DomainError(f"interval must be ordered, got ({lower}, {upper})")
    if not (g.in_domain(lower) and g.in_domain(upper)):
        raise DomainError(f"interval ({lower}, {upper}) leaves the domain of {g.name}")
    a, b = g.forward(lower), g.forward(upper)
    return (a, b) if a <= b else (b, a)


def map_interval_general(interval, f: Callable[[float], float],
                         tol: Tolerances = DEFAULT_TOLERANCES, grid_size: int = 200):
    """Range ``(min f, max f)`` over ``[l, u]`` for a continuous, possibly
    non-monotone ``f``.

    Endpoints are always candidates; interior extrema are seeded from a grid
    and refined with :func:`maximize_1d` on ``f`` and ``-f``.
    """
    lower, upper = (float(v) for v in interval)
    if lower > upper:
        raise DomainError(f"interval must be ordered, got ({lower}, {upper})")
    if lower == upper:
        v = f(lower)
        return (v, v)
    xs = [lower + (upper - lower) * i / grid_size for i in range(grid_size + 1)]
    xs[-1] = upper
    values = [float(f(x)) for x in xs]
    if any(math.isnan(v) for v in values):
        raise NumericFailure("function returned NaN on the interval")

    def refine(sign):
        i = max(range(len(xs)), key=lambda j: sign * values[j])
        a, b = xs[max(i - 1, 0)], xs[min(i + 1, grid_size)]
        _, best = maximize_1d(lambda x: sign * f(x), (a, b), tol)
        return sign * best

    hi = max(values[0], values[-1], refine(1.0))
    lo = min(values[0], values[-1], refine(-1.0))
    return lo, hi


@dataclass(frozen=True)
class InvarianceReport:
    """Original HPD interval against its image under ``g``.

    ``ratio_*`` pairs are endpoint-to-mode density ratios at the images of
    ``(l, u)``: ``ratio_reparam`` on the Jacobian-free relabelling and
    ``ratio_change_of_variable`` on the true pushforward density.
    """

    transform: str
    alpha: float
    original_hpd: HpdInterval
    mapped_interval: tuple
    pushforward_hpd: HpdInterval
    mode_original: float
    mode_mapped: float
    mode_of_pushforward: float
    mode_of_reparam: float
    ratio_original: tuple
    ratio_reparam: tuple
    ratio_change_of_variable: tuple
    mapped_coverage: float
    widths: dict

    @property
    def mode_gap(self) -> float:
        return self.mode_of_pushforward - self.mode_mapped

    @property
    def width_gap(self) -> float:
        return self.widths["mapped"] - self.widths["recomputed"]

    def as_dict(self):
        out = asdict(self)
        out["original_hpd"] = self.original_hpd.as_dict()
        out["pushforward_hpd"] = self.pushforward_hpd.as_dict()
        out["mapped_interval"] = list(self.mapped_interval)
        for key in ("ratio_original", "ratio_reparam", "ratio_change_of_variable"):
            out[key] = list(out[key])
        out["mode_gap"] = self.mode_gap
        out["width_gap"] = self.width_gap
        return out


def _hpd_any(d, alpha, tol):
    try:
        return hpd_levelset(d, alpha, tol)
    except ModeAtBoundary:
        return hpd_one_sided(d, alpha, tol)


def invariance_report(d: UnimodalDensity, g: MonotoneTransform, alpha: float = 0.05,
                      tol: Tolerances = DEFAULT_TOLERANCES) -> InvarianceReport:
    """Compare the HPD of ``d`` mapped through ``g`` with the HPD recomputed
    on the pushforward density, and evaluate mode ratios in both semantics."""
    original = hpd_levelset(d, alpha, tol)
    lower, upper = original.lower, original.upper
    mapped = map_interval_monotone((lower, upper), g)
    push = PushforwardDensity(d, g, tol)
    relabeled = RelabeledDensity(d, g, tol)
    recomputed = _hpd_any(push, alpha, tol)

    y_mode = g.forward(d.mode)
    y_lower, y_upper = g.forward(lower), g.forward(upper)

    def reparam_ratio(y):
        return math.exp(relabeled.log_pdf(y) - relabeled.log_pdf(y_mode))

    def cov_ratio(y):
        return math.exp(push.log_pdf(y) - push.log_pdf(y_mode))

    return InvarianceReport(
        transform=g.name,
        alpha=alpha,
        original_hpd=original,
        mapped_interval=mapped,
        pushforward_hpd=recomputed,
        mode_original=d.mode,
        mode_mapped=y_mode,
        mode_of_pushforward=push.mode,
        mode_of_reparam=relabeled.mode,
        ratio_original=(density_ratio_to_mode(d, lower), density_ratio_to_mode(d, upper)),
        ratio_reparam=(reparam_ratio(y_lower), reparam_ratio(y_upper)),
        ratio_change_of_variable=(cov_ratio(y_lower), cov_ratio(y_upper)),
        mapped_coverage=push.mass(*mapped),
        widths={"mapped": mapped[1] - mapped[0], "recomputed": recomputed.width},
    )
