"""Closed-form unimodal density families.

Every density evaluates through ``log_pdf``; ``pdf`` is its exponential, so
tails never underflow before they have to.  Objects are immutable after
construction and safe to share between threads.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable

from .exceptions import DomainError, NumericFailure, NonUnimodal
from .numeric import DEFAULT_TOLERANCES, Tolerances, find_root, integrate, maximize_1d
from .special import (
    beta_inc,
    gamma_p,
    gamma_q,
    normal_cdf,
    normal_logpdf,
    normal_quantile,
    normal_sf,
)

__all__ = [
    "Family",
    "Normalization",
    "Support",
    "UnimodalDensity",
    "Normal",
    "LogNormal",
    "Gamma",
    "Beta",
    "Exponential",
    "CustomDensity",
    "make_density",
    "check_unimodal",
    "pdf",
    "cdf",
    "quantile",
    "mode_of",
]

# log of the relative density below which a tail is treated as empty
TAIL_LOG_RATIO = math.log(1e-16)


class Family(str, enum.Enum):
    NORMAL = "normal"
    LOGNORMAL = "lognormal"
    GAMMA = "gamma"
    BETA = "beta"
    EXPONENTIAL = "exponential"
    CUSTOM = "custom"


class Normalization(str, enum.Enum):
    NORMALIZED = "normalized"
    UNNORMALIZED = "unnormalized"


@dataclass(frozen=True)
class Support:
    lower: float = -math.inf
    upper: float = math.inf
    lower_closed: bool = False
    upper_closed: bool = False

    def __post_init__(self):
        if not (self.lower < self.upper):
            raise DomainError(f"support requires lower < upper, got ({self.lower}, {self.upper})")

    def contains(self, x: float) -> bool:
        if x < self.lower or x > self.upper:
            return False
        if x == self.lower:
            return self.lower_closed
        if x == self.upper:
            return self.upper_closed
        return True

    def is_subset_of(self, other: "Support") -> bool:
        lower_ok = self.lower > other.lower or (
            self.lower == other.lower and (other.lower_closed or not self.lower_closed))
        upper_ok = self.upper < other.upper or (
            self.upper == other.upper and (other.upper_closed or not self.upper_closed))
        return lower_ok and upper_ok

    def as_tuple(self):
        return (self.lower, self.upper)


def _safe_log(x):
    return math.log(x) if x > 0 else -math.inf


def _xlogy(a, y):
    """a * log(y) with the convention 0 * log(0) = 0."""
    if a == 0:
        return 0.0
    if y == 0:
        return -math.inf if a > 0 else math.inf
    return a * math.log(y)


def _positive(name, value):
    value = float(value)
    if not (value > 0 and math.isfinite(value)):
        raise DomainError(f"{name} must be positive and finite, got {value!r}")
    return value


def _finite(name, value):
    value = float(value)
    if not math.isfinite(value):
        raise DomainError(f"{name} must be finite, got {value!r}")
    return value


class UnimodalDensity:
    """A continuous density with a single mode.

    Subclasses implement ``_log_pdf`` (called only inside the support) and
    usually ``cdf``, ``sf`` and ``quantile`` in closed form.  The base class
    provides root-finding quantiles and quadrature cdfs as fallbacks.

    Attributes
    ----------
    family : Family
    params : dict
    support : Support
    mode : float
    mode_at_boundary : bool
    log_modal_density : float
        ``+inf`` for densities that are unbounded at the mode.
    normalized : bool
        False only for likelihood-style relabelings that do not integrate to 1.
    """

    family: Family = Family.CUSTOM
    normalized: bool = True
    scale: float = 1.0

    def __init__(self, params, support: Support, mode: float, tol: Tolerances = DEFAULT_TOLERANCES):
        self.params = dict(params)
        self.support = support
        self.tol = tol
        self.mode = float(mode)
        self.mode_at_boundary = self.mode in (support.lower, support.upper)
        self.log_modal_density = self._log_pdf_at_mode()

    def __repr__(self):
        args = ", ".join(f"{k}={v!r}" for k, v in self.params.items())
        return f"{type(self).__name__}({args})"

    # -- evaluation -------------------------------------------------------
    def _log_pdf(self, x: float) -> float:
        raise NotImplementedError

    def _log_pdf_at_mode(self) -> float:
        return self._log_pdf(self.mode)

    def log_pdf(self, x: float) -> float:
        x = float(x)
        if math.isnan(x):
            return math.nan
        if math.isinf(x):
            return -math.inf
        if not self.support.contains(x):
            # a density may be evaluated at an open endpoint as a limit
            if x == self.support.lower or x == self.support.upper:
                try:
                    return self._log_pdf(x)
                except (ValueError, ZeroDivisionError, OverflowError):
                    return -math.inf
            return -math.inf
        return self._log_pdf(x)

    def pdf(self, x: float) -> float:
        return math.exp(self.log_pdf(x))

    @property
    def modal_density(self) -> float:
        return math.exp(self.log_modal_density)

    def cdf(self, x: float) -> float:
        lo, hi = self.support.as_tuple()
        if x <= lo:
            return 0.0
        if x >= hi:
            return 1.0
        return self._quadrature_cdf(x)

    def sf(self, x: float) -> float:
        return 1.0 - self.cdf(x)

    def mass(self, a: float, b: float) -> float:
        """Probability of ``[a, b]``; uses the survival function in the right tail."""
        if b <= a:
            return 0.0
        if a >= self.mode:
            return self.sf(a) - self.sf(b)
        return self.cdf(b) - self.cdf(a)

    def quantile(self, p: float) -> float:
        if not (0.0 < p < 1.0):
            raise DomainError(f"quantile requires p in (0, 1), got {p!r}")
        return self._root_quantile(p)

    def mode_of(self):
        return self.mode, self.mode_at_boundary

    # -- shared machinery -------------------------------------------------
    def _quadrature_cdf(self, x):
        lo, hi = self.effective_bounds()
        if x <= lo:
            return 0.0
        if x >= hi:
            return 1.0
        if x <= self.mode:
            value = integrate(self.pdf, lo, x, self.tol)
        else:
            value = 1.0 - integrate(self.pdf, x, hi, self.tol)
        return min(1.0, max(0.0, value))

    def _root_quantile(self, p):
        lo, hi = self.support.as_tuple()
        step = self.scale
        a = max(lo, self.mode - step)
        b = min(hi, self.mode + step)
        for _ in range(200):
            if self.cdf(a) <= p or a == lo:
                break
            step *= 2.0
            a = max(lo, self.mode - step)
        step = self.scale
        for _ in range(200):
            if self.cdf(b) >= p or b == hi:
                break
            step *= 2.0
            b = min(hi, self.mode + step)
        if not (math.isfinite(a) and math.isfinite(b)):
            raise NumericFailure(f"could not bracket the {p} quantile of {self!r}")
        x = find_root(lambda x: self.cdf(x) - p, (a, b), self.tol)
        x = self._refine_near_edge(x, p)
        # Newton polish so the quantile is smooth in p to near machine precision
        resid = self.cdf(x) - p
        for _ in range(2):
            if resid == 0.0:
                break
            density = self.pdf(x)
            if not (density > 0 and math.isfinite(density)):
                break
            x_new = x - resid / density
            if not (a <= x_new <= b):
                break
            resid_new = self.cdf(x_new) - p
            if abs(resid_new) >= abs(resid):
                break
            x, resid = x_new, resid_new
        return x

    def _refine_near_edge(self, x, p):
        """Re-solve in ``log`` distance to a finite support edge when ``x`` sits
        so close to it that the absolute tolerance would swamp the answer."""
        lo, hi = self.support.as_tuple()
        near = 1e3 * self.tol.abs_x
        if math.isfinite(lo) and x - lo < near:
            edge, side = lo, 1.0

            def excess(u):
                return self.cdf(lo + math.exp(u)) - p
        elif math.isfinite(hi) and hi - x < near:
            edge, side = hi, -1.0

            def excess(u):
                return self.sf(hi - math.exp(u)) - (1.0 - p)
        else:
            return x
        u_hi = math.log(abs(x - edge) + 2.0 * near)
        u_lo = u_hi - 10.0
        for _ in range(80):
            if excess(u_lo) <= 0.0:
                break
            u_lo -= 10.0
        else:
            return x
        if excess(u_hi) < 0.0:
            return x
        u = find_root(excess, (u_lo, u_hi), self.tol.replace(abs_x=1e-13))
        return edge + side * math.exp(u)

    def effective_bounds(self):
        """Finite bounds outside of which the density is below 1e-16 of its modal value."""
        cached = getattr(self, "_effective_bounds", None)
        if cached is not None:
            return cached
        lo, hi = self.support.as_tuple()
        if not math.isfinite(lo):
            lo = self._tail_point(-1.0)
        if not math.isfinite(hi):
            hi = self._tail_point(1.0)
        self._effective_bounds = (lo, hi)
        return lo, hi

    def _tail_point(self, direction):
        cutoff = self.log_modal_density + TAIL_LOG_RATIO
        step = self.scale
        for _ in range(1100):
            x = self.mode + direction * step
            if self.log_pdf(x) < cutoff:
                return x
            step *= 2.0
        raise NumericFailure(f"density {self!r} has no detectable tail")


class Normal(UnimodalDensity):
    family = Family.NORMAL

    def __init__(self, mu: float = 0.0, sigma: float = 1.0, tol=DEFAULT_TOLERANCES):
        self.mu = _finite("mu", mu)
        self.sigma = _positive("sigma", sigma)
        self.scale = self.sigma
        self._log_sigma = math.log(self.sigma)
        super().__init__({"mu": self.mu, "sigma": self.sigma}, Support(), self.mu, tol)

    def _log_pdf(self, x):
        return normal_logpdf((x - self.mu) / self.sigma) - self._log_sigma

    def cdf(self, x):
        return normal_cdf((x - self.mu) / self.sigma)

    def sf(self, x):
        return normal_sf((x - self.mu) / self.sigma)

    def quantile(self, p):
        if not (0.0 < p < 1.0):
            raise DomainError(f"quantile requires p in (0, 1), got {p!r}")
        return self.mu + self.sigma * normal_quantile(p)


class LogNormal(UnimodalDensity):
    family = Family.LOGNORMAL

    def __init__(self, mu: float = 0.0, sigma: float = 1.0, tol=DEFAULT_TOLERANCES):
        self.mu = _finite("mu", mu)
        self.sigma = _positive("sigma", sigma)
        self.scale = math.exp(self.mu) * self.sigma
        self._log_sigma = math.log(self.sigma)
        mode = math.exp(self.mu - self.sigma ** 2)
        super().__init__({"mu": self.mu, "sigma": self.sigma}, Support(0.0, math.inf), mode, tol)

    def _log_pdf(self, x):
        if x <= 0:
            return -math.inf
        lx = math.log(x)
        return normal_logpdf((lx - self.mu) / self.sigma) - self._log_sigma - lx

    def cdf(self, x):
        if x <= 0:
            return 0.0
        return normal_cdf((math.log(x) - self.mu) / self.sigma)

    def sf(self, x):
        if x <= 0:
            return 1.0
        return normal_sf((math.log(x) - self.mu) / self.sigma)

    def quantile(self, p):
        if not (0.0 < p < 1.0):
            raise DomainError(f"quantile requires p in (0, 1), got {p!r}")
        return math.exp(self.mu + self.sigma * normal_quantile(p))


class Gamma(UnimodalDensity):
    """Gamma density in the shape/rate parameterization.

    ``shape < 1`` gives a density that is unbounded at 0; the mode is then
    flagged as on the boundary with an infinite modal density.
    """

    family = Family.GAMMA

    def __init__(self, shape: float, rate: float = 1.0, tol=DEFAULT_TOLERANCES):
        self.shape = _positive("shape", shape)
        self.rate = _positive("rate", rate)
        self.scale = math.sqrt(self.shape) / self.rate
        self._log_norm = self.shape * math.log(self.rate) - math.lgamma(self.shape)
        mode = (self.shape - 1.0) / self.rate if self.shape > 1 else 0.0
        super().__init__({"shape": self.shape, "rate": self.rate},
                         Support(0.0, math.inf, lower_closed=True), mode, tol)

    def _log_pdf(self, x):
        if x < 0:
            return -math.inf
        return self._log_norm + _xlogy(self.shape - 1.0, x) - self.rate * x

    def cdf(self, x):
        return gamma_p(self.shape, self.rate * x) if x > 0 else 0.0

    def sf(self, x):
        return gamma_q(self.shape, self.rate * x) if x > 0 else 1.0


class Beta(UnimodalDensity):
    """Beta density on [0, 1].

    ``Beta(1, 1)`` is flat; it is accepted as a density but has no unique
    HPD interval.  Both shape parameters below 1 give a U-shaped density,
    which is rejected.
    """

    family = Family.BETA

    def __init__(self, a: float, b: float, tol=DEFAULT_TOLERANCES):
        self.a = _positive("a", a)
        self.b = _positive("b", b)
        if self.a < 1 and self.b < 1:
            raise NonUnimodal(f"Beta(a={a}, b={b}) is U-shaped, not unimodal")
        self._log_beta = math.lgamma(self.a) + math.lgamma(self.b) - math.lgamma(self.a + self.b)
        self.scale = math.sqrt(self.a * self.b / ((self.a + self.b) ** 2 * (self.a + self.b + 1)))
        if self.a > 1 and self.b > 1:
            mode = (self.a - 1.0) / (self.a + self.b - 2.0)
        elif self.a == 1 and self.b == 1:
            mode = 0.5
        elif self.a <= 1 and self.b >= 1:
            mode = 0.0
        else:
            mode = 1.0
        super().__init__({"a": self.a, "b": self.b},
                         Support(0.0, 1.0, lower_closed=True, upper_closed=True), mode, tol)

    def _log_pdf(self, x):
        if x < 0 or x > 1:
            return -math.inf
        return _xlogy(self.a - 1.0, x) + _xlogy(self.b - 1.0, 1.0 - x) - self._log_beta

    def cdf(self, x):
        return beta_inc(self.a, self.b, x)

    def sf(self, x):
        return beta_inc(self.b, self.a, 1.0 - x)


class Exponential(UnimodalDensity):
    family = Family.EXPONENTIAL

    def __init__(self, rate: float = 1.0, tol=DEFAULT_TOLERANCES):
        self.rate = _positive("rate", rate)
        self.scale = 1.0 / self.rate
        self._log_rate = math.log(self.rate)
        super().__init__({"rate": self.rate},
                         Support(0.0, math.inf, lower_closed=True), 0.0, tol)

    def _log_pdf(self, x):
        if x < 0:
            return -math.inf
        return self._log_rate - self.rate * x

    def cdf(self, x):
        return -math.expm1(-self.rate * x) if x > 0 else 0.0

    def sf(self, x):
        return math.exp(-self.rate * x) if x > 0 else 1.0

    def quantile(self, p):
        if not (0.0 < p < 1.0):
            raise DomainError(f"quantile requires p in (0, 1), got {p!r}")
        return -math.log1p(-p) / self.rate


def _guarded(fn):
    def wrapped(x):
        try:
            value = float(fn(x))
        except (ValueError, ZeroDivisionError, OverflowError):
            return -math.inf
        return -math.inf if math.isnan(value) else value
    return wrapped


class CustomDensity(UnimodalDensity):
    """A user-supplied density given by its log-pdf.

    Parameters
    ----------
    log_pdf : callable
        Log-density (up to a constant if ``normalization="unnormalized"``).
    support : Support or (lower, upper)
    normalization : {"normalized", "unnormalized"}
        Unnormalized densities are normalized once by quadrature here, so
        every downstream probability is a true probability.
    bracket : (float, float), optional
        Region in which to look for the mode; also sets the search scale.
    mode : float, optional
        Known mode, skipping the numeric search.
    """

    family = Family.CUSTOM

    def __init__(
        self,
        log_pdf: Callable[[float], float],
        support=None,
        normalization=Normalization.NORMALIZED,
        bracket=None,
        mode=None,
        tol: Tolerances = DEFAULT_TOLERANCES,
        name: str = "custom",
    ):
        if support is None:
            support = Support()
        elif not isinstance(support, Support):
            lo, hi = support
            support = Support(float(lo), float(hi),
                              lower_closed=math.isfinite(lo), upper_closed=math.isfinite(hi))
        self.support = support
        self.tol = tol
        self.name = name
        self.normalization = Normalization(normalization)
        self._raw = _guarded(log_pdf)
        self._log_norm = 0.0
        if bracket is not None:
            self.scale = max(abs(bracket[1] - bracket[0]), 1e-300)
        elif math.isfinite(support.lower) and math.isfinite(support.upper):
            self.scale = support.upper - support.lower
        if mode is None:
            mode = self._search_mode(bracket)
        UnimodalDensity.__init__(self, {"name": name, "normalization": self.normalization.value},
                                 support, mode, tol)
        if self.normalization is Normalization.UNNORMALIZED:
            if not math.isfinite(self.log_modal_density):
                raise NumericFailure("cannot normalize a density that is unbounded at its mode")
            shift = self.log_modal_density
            lo, hi = self.effective_bounds()
            z = integrate(lambda x: math.exp(self._raw(x) - shift), lo, hi, tol)
            if not (z > 0 and math.isfinite(z)):
                raise NumericFailure(f"normalizing constant is not positive and finite: {z!r}")
            self._log_norm = shift + math.log(z)
            self.log_modal_density -= self._log_norm

    def _log_pdf(self, x):
        return self._raw(x) - self._log_norm

    def _search_mode(self, bracket):
        support = self.support
        lo, hi = support.as_tuple()
        if bracket is not None:
            left, right = max(lo, bracket[0]), min(hi, bracket[1])
        else:
            center = 0.0
            if math.isfinite(lo) and math.isfinite(hi):
                center = 0.5 * (lo + hi)
            elif math.isfinite(lo):
                center = lo + self.scale
            elif math.isfinite(hi):
                center = hi - self.scale
            left, right = max(lo, center - self.scale), min(hi, center + self.scale)

        def at(x):
            return self.log_pdf(x) if not support.contains(x) else self._raw(x)

        n = 200
        for _ in range(400):
            grid = [left + (right - left) * i / n for i in range(n + 1)]
            values = [at(x) for x in grid]
            best = max(range(n + 1), key=lambda i: values[i])
            top = values[best]
            if top == math.inf:
                return grid[best]
            grow_left = math.isfinite(left) and left > lo and (
                best == 0 or values[0] > top + TAIL_LOG_RATIO)
            grow_right = math.isfinite(right) and right < hi and (
                best == n or values[n] > top + TAIL_LOG_RATIO)
            if not (grow_left or grow_right):
                break
            width = right - left
            if grow_left:
                left = max(lo, left - width)
            if grow_right:
                right = min(hi, right + width)
        else:
            raise NumericFailure("could not locate the mode of the custom density")
        if top == -math.inf:
            raise NumericFailure("custom density is zero everywhere on the search grid")
        a = grid[max(best - 1, 0)]
        b = grid[min(best + 1, n)]
        x, _ = maximize_1d(at, (a, b), self.tol)
        for edge in (lo, hi):
            if math.isfinite(edge) and abs(x - edge) <= 1e3 * self.tol.abs_x * max(1.0, abs(edge)):
                return edge
        return x

    def _log_pdf_at_mode(self):
        value = self._raw(self.mode) - self._log_norm
        if self.mode_at_boundary and value == -math.inf:
            # the maximizer ran into an edge where the log-pdf cannot be
            # evaluated: the density grows without bound towards it
            return math.inf
        return value


_FAMILIES = {
    Family.NORMAL: (Normal, ("mu", "sigma")),
    Family.LOGNORMAL: (LogNormal, ("mu", "sigma")),
    Family.GAMMA: (Gamma, ("shape", "rate")),
    Family.BETA: (Beta, ("a", "b")),
    Family.EXPONENTIAL: (Exponential, ("rate",)),
}


def make_density(family, tol: Tolerances = DEFAULT_TOLERANCES, **params) -> UnimodalDensity:
    """Build a built-in density from its family name and named parameters."""
    try:
        fam = Family(str(family).lower())
    except ValueError:
        raise DomainError(f"unknown density family {family!r}") from None
    if fam is Family.CUSTOM:
        raise DomainError("custom densities are built with CustomDensity, not make_density")
    cls, names = _FAMILIES[fam]
    unknown = set(params) - set(names)
    if unknown:
        raise DomainError(f"unexpected parameters for {fam.value}: {sorted(unknown)}")
    return cls(**{k: float(v) for k, v in params.items()}, tol=tol)


def family_parameters(family) -> tuple:
    return _FAMILIES[Family(family)][1]


def check_unimodal(d: UnimodalDensity, grid=None, n: int = 1000) -> None:
    """Raise :class:`NonUnimodal` unless ``log_pdf`` rises to the mode and falls after it.

    ``grid`` defaults to ``n`` evenly spaced points across the effective
    support.
    """
    if grid is None:
        lo, hi = d.effective_bounds()
        grid = [lo + (hi - lo) * (i + 0.5) / n for i in range(n)]
    values = [d.log_pdf(x) for x in grid]
    for i in range(1, len(grid)):
        prev, cur = values[i - 1], values[i]
        if math.isinf(prev) and math.isinf(cur) and prev == cur:
            continue
        slack = 1e-9 * (1.0 + abs(prev)) if math.isfinite(prev) else 0.0
        if grid[i] <= d.mode and cur < prev - slack:
            raise NonUnimodal(f"density decreases at x={grid[i]!r} left of the mode {d.mode!r}")
        if grid[i - 1] >= d.mode and cur > prev + slack:
            raise NonUnimodal(f"density increases at x={grid[i]!r} right of the mode {d.mode!r}")


def pdf(d: UnimodalDensity, x: float) -> float:
    return d.pdf(x)


def cdf(d: UnimodalDensity, x: float) -> float:
    return d.cdf(x)


def quantile(d: UnimodalDensity, p: float) -> float:
    return d.quantile(p)


def mode_of(d: UnimodalDensity):
    return d.mode_of()
