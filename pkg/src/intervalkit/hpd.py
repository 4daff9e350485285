"""Highest posterior density intervals for unimodal densities.

Two independent constructions are provided:

* :func:`hpd_levelset` solves for the density level ``c`` whose level set
  ``{x : f(x) >= c}`` carries mass ``1 - alpha``;
* :func:`hpd_quantile_scan` minimizes the width of ``[Q(p), Q(p + 1 - alpha)]``
  over the lower tail mass ``p``.

For a unimodal density with an interior mode the two coincide, which is
what the cross-checks in the test suite rely on.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, asdict
from typing import Optional

from .densities import UnimodalDensity
from .exceptions import DomainError, ModeAtBoundary, NonUniqueHpd, NumericFailure, NoSignChange
from .numeric import DEFAULT_TOLERANCES, Tolerances, find_root, integrate

__all__ = [
    "ConditionReport",
    "HpdInterval",
    "hpd_levelset",
    "hpd_quantile_scan",
    "hpd_one_sided",
    "density_ratio_to_mode",
    "check_conditions",
    "COVERAGE_TOL",
    "DENSITY_MATCH_TOL",
]

COVERAGE_TOL = 1e-8
DENSITY_MATCH_TOL = 1e-8  # relative to the modal density

_LEVEL_FLOOR = 1e-12
_GOLDEN = 0.5 * (math.sqrt(5.0) - 1.0)


@dataclass(frozen=True)
class ConditionReport:
    """Which of the three equal-density-interval conditions hold.

    ``coverage_ok``: the interval holds ``1 - alpha`` of the mass.
    ``endpoint_density_equal``: the density is equal and positive at both ends.
    ``mode_interior``: the mode lies strictly inside the interval.
    """

    coverage_ok: bool
    endpoint_density_equal: bool
    mode_interior: bool

    @property
    def theorem_applies(self) -> bool:
        return self.coverage_ok and self.endpoint_density_equal and self.mode_interior

    def as_dict(self):
        out = asdict(self)
        out["theorem_applies"] = self.theorem_applies
        return out


@dataclass(frozen=True)
class HpdInterval:
    lower: float
    upper: float
    level: float
    coverage: float
    alpha: float
    conditions: ConditionReport
    method: str = "levelset"
    tail_mass_below: Optional[float] = None

    @property
    def width(self) -> float:
        return self.upper - self.lower

    @property
    def one_sided(self) -> bool:
        return self.method == "one-sided"

    def as_tuple(self):
        return (self.lower, self.upper)

    def as_dict(self):
        out = asdict(self)
        out["conditions"] = self.conditions.as_dict()
        out["width"] = self.width
        return out


def _check_alpha(alpha):
    if not (0.0 < alpha < 1.0):
        raise DomainError(f"alpha must lie in (0, 1), got {alpha!r}")


def _require_normalized(d):
    if not d.normalized:
        raise DomainError("HPD intervals need a normalized density")


def _level_crossing(d: UnimodalDensity, log_level: float, side: int, tol: Tolerances) -> float:
    """Point on one side of the mode where ``log_pdf`` falls to ``log_level``.

    Returns the support edge itself when the density never drops that low
    before the edge.
    """
    mode = d.mode
    edge = d.support.lower if side < 0 else d.support.upper
    if math.isfinite(edge):
        if d.log_pdf(edge) >= log_level:
            return edge
        far = edge
    else:
        step = d.scale
        far = mode + side * step
        for _ in range(1100):
            if d.log_pdf(far) < log_level:
                break
            step *= 2.0
            far = mode + side * step
        else:
            raise NumericFailure("density tail never falls below the requested level")

    def excess(x):
        return max(d.log_pdf(x) - log_level, -1e4)

    a, b = (far, mode) if side < 0 else (mode, far)
    return find_root(excess, (a, b), tol)


def _flat_at(d, x, log_level, tol):
    w = 10.0 * tol.abs_x
    lo, hi = d.support.as_tuple()
    if not (lo < x - w and x + w < hi):
        return False
    return all(abs(d.log_pdf(y) - log_level) <= tol.rel_f for y in (x - w, x + w))


def hpd_levelset(d: UnimodalDensity, alpha: float, tol: Tolerances = DEFAULT_TOLERANCES) -> HpdInterval:
    """HPD interval by inverting the coverage of density level sets.

    For each candidate level ``c`` the two crossings ``f(l) = f(u) = c``
    either side of the mode are found by root finding; an outer root find
    in ``log c`` then matches ``F(u) - F(l)`` to ``1 - alpha``.

    Raises
    ------
    ModeAtBoundary
        The mode is a support endpoint (use :func:`hpd_one_sided`).
    NonUniqueHpd
        The density is flat at the solution level.
    """
    _check_alpha(alpha)
    _require_normalized(d)
    if d.mode_at_boundary:
        raise ModeAtBoundary(
            f"mode of {d!r} is at the support boundary ({d.mode!r}); use hpd_one_sided")
    log_top = d.log_modal_density
    if not math.isfinite(log_top):
        raise NumericFailure(f"modal density of {d!r} is not finite")
    target = 1.0 - alpha

    def endpoints(t):
        return (_level_crossing(d, t, -1, tol), _level_crossing(d, t, 1, tol))

    def excess(t):
        lo, hi = endpoints(t)
        return d.mass(lo, hi) - target

    t_hi = log_top + math.log1p(-_LEVEL_FLOOR)
    if excess(t_hi) >= 0:
        raise NonUniqueHpd(f"{d!r} is flat around its mode; the HPD interval is not unique")
    t_lo = log_top + math.log(_LEVEL_FLOOR)
    for _ in range(60):
        if excess(t_lo) > 0:
            break
        t_lo -= 10.0
    else:
        raise NumericFailure(f"no density level of {d!r} reaches coverage {target}")

    try:
        t = find_root(excess, (t_lo, t_hi), tol)
    except NoSignChange as exc:  # pragma: no cover - bracket was verified above
        raise NumericFailure(str(exc)) from exc
    lower, upper = endpoints(t)
    if _flat_at(d, lower, t, tol) or _flat_at(d, upper, t, tol):
        raise NonUniqueHpd(f"{d!r} is flat at the solution level; the HPD interval is not unique")
    return HpdInterval(
        lower=lower,
        upper=upper,
        level=math.exp(t),
        coverage=d.mass(lower, upper),
        alpha=alpha,
        conditions=check_conditions(d, (lower, upper), alpha, tol),
        method="levelset",
    )


def _edge_quantile(d, p):
    if p <= 0.0:
        return d.support.lower
    if p >= 1.0:
        return d.support.upper
    return d.quantile(p)


def hpd_quantile_scan(
    d: UnimodalDensity,
    alpha: float,
    grid_size: int = 200,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> HpdInterval:
    """Shortest ``1 - alpha`` interval by scanning the lower tail mass.

    The width ``Q(p + 1 - alpha) - Q(p)`` is evaluated on ``grid_size + 1``
    points of ``p`` in ``[0, alpha]``; the best grid cell is then refined by
    golden-section search.  Ties resolve to the smaller ``p``.
    """
    _check_alpha(alpha)
    _require_normalized(d)
    if int(grid_size) != grid_size or grid_size < 100:
        raise DomainError(f"grid_size must be an integer >= 100, got {grid_size!r}")
    keep = 1.0 - alpha

    def width(p):
        return _edge_quantile(d, p + keep) - _edge_quantile(d, p)

    ps = [alpha * i / grid_size for i in range(grid_size + 1)]
    ws = [width(p) for p in ps]
    best = min(range(len(ps)), key=lambda i: ws[i])
    if not math.isfinite(ws[best]):
        raise NumericFailure(f"no finite-width interval found for {d!r}")

    a = ps[max(best - 1, 0)]
    b = ps[min(best + 1, grid_size)]
    c = b - _GOLDEN * (b - a)
    e = a + _GOLDEN * (b - a)
    wc, we = width(c), width(e)
    for _ in range(tol.max_iter):
        if b - a <= 1e-15 * alpha:
            break
        if wc <= we:
            b, e, we = e, c, wc
            c = b - _GOLDEN * (b - a)
            wc = width(c)
        else:
            a, c, wc = c, e, we
            e = a + _GOLDEN * (b - a)
            we = width(e)

    candidates = sorted({ps[best], c, e, 0.0, alpha})
    p_star = min(candidates, key=lambda p: (width(p), p))
    lower = _edge_quantile(d, p_star)
    upper = _edge_quantile(d, p_star + keep)
    return HpdInterval(
        lower=lower,
        upper=upper,
        level=min(d.pdf(lower), d.pdf(upper)),
        coverage=d.mass(lower, upper),
        alpha=alpha,
        conditions=check_conditions(d, (lower, upper), alpha, tol),
        method="quantile-scan",
        tail_mass_below=p_star,
    )


def hpd_one_sided(d: UnimodalDensity, alpha: float, tol: Tolerances = DEFAULT_TOLERANCES) -> HpdInterval:
    """HPD interval for a density whose mode is a support endpoint.

    The interval runs from the modal edge to the ``1 - alpha`` (or ``alpha``)
    quantile.  Endpoint densities differ, so the report never claims the
    equal-density conditions.
    """
    _check_alpha(alpha)
    _require_normalized(d)
    if not d.mode_at_boundary:
        raise DomainError(f"mode of {d!r} is interior; use hpd_levelset")
    if d.mode == d.support.lower:
        lower, upper = d.support.lower, d.quantile(1.0 - alpha)
    else:
        lower, upper = d.quantile(alpha), d.support.upper
    full = check_conditions(d, (lower, upper), alpha, tol)
    conditions = ConditionReport(
        coverage_ok=full.coverage_ok,
        endpoint_density_equal=False,
        mode_interior=False,
    )
    return HpdInterval(
        lower=lower,
        upper=upper,
        level=min(d.pdf(lower), d.pdf(upper)),
        coverage=d.mass(lower, upper),
        alpha=alpha,
        conditions=conditions,
        method="one-sided",
    )


def density_ratio_to_mode(d: UnimodalDensity, x: float) -> float:
    """``f(x) / f(mode)``, evaluated as a log-difference."""
    if not math.isfinite(d.log_modal_density):
        raise ModeAtBoundary(f"modal density of {d!r} is infinite")
    return math.exp(d.log_pdf(x) - d.log_modal_density)


def check_conditions(d: UnimodalDensity, interval, alpha: float,
                     tol: Tolerances = DEFAULT_TOLERANCES) -> ConditionReport:
    """Evaluate the coverage, equal-density and interior-mode conditions.

    Coverage is measured by quadrature of the pdf, independently of the cdf
    used to construct the interval.
    """
    if isinstance(interval, HpdInterval):
        interval = interval.as_tuple()
    lower, upper = (float(v) for v in interval)
    try:
        coverage = integrate(d.pdf, lower, upper, tol)
    except NumericFailure:
        coverage = d.mass(lower, upper)
    coverage_ok = abs(coverage - (1.0 - alpha)) <= COVERAGE_TOL

    f_lower, f_upper = d.pdf(lower), d.pdf(upper)
    f_mode = d.modal_density
    endpoint_density_equal = (
        f_lower > 0
        and f_upper > 0
        and math.isfinite(f_mode)
        and abs(f_lower - f_upper) <= DENSITY_MATCH_TOL * f_mode
    )
    return ConditionReport(
        coverage_ok=coverage_ok,
        endpoint_density_equal=endpoint_density_equal,
        mode_interior=lower < d.mode < upper,
    )
