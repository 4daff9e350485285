"""Scalar numerical primitives: bracketing root finder, bounded maximizer and
adaptive Gauss-Kronrod quadrature.

Every routine takes a :class:`Tolerances` object.  The defaults are tight
enough that the 1e-6 level agreement required downstream is dominated by
modelling error rather than arithmetic.
"""
from __future__ import annotations

import heapq
import math
import os
import sys
from dataclasses import dataclass, replace
from typing import Callable

from .exceptions import (
    DomainError,
    MaxIterationsExceeded,
    MaxSubdivisionsExceeded,
    NoSignChange,
    NumericFailure,
)

__all__ = [
    "Bracket",
    "Tolerances",
    "DEFAULT_TOLERANCES",
    "find_root",
    "maximize_1d",
    "integrate",
]

EPS = sys.float_info.epsilon
_GOLDEN = 0.5 * (3.0 - math.sqrt(5.0))

ScalarFunction = Callable[[float], float]


@dataclass(frozen=True)
class Bracket:
    lo: float
    hi: float

    def __post_init__(self):
        if not (self.lo < self.hi):
            raise DomainError(f"bracket requires lo < hi, got [{self.lo}, {self.hi}]")

    @property
    def width(self) -> float:
        return self.hi - self.lo


@dataclass(frozen=True)
class Tolerances:
    """Numerical tolerances shared by all solvers.

    Attributes
    ----------
    abs_x : float
        Absolute tolerance on abscissae (roots, maximizers).
    rel_f : float
        Relative tolerance on function values, used for flatness detection.
    quad_tol : float
        Absolute error target for quadrature.
    max_iter : int
        Iteration cap for root finding and maximization.
    """

    abs_x: float = 1e-10
    rel_f: float = 1e-12
    quad_tol: float = 1e-9
    max_iter: int = 200

    def __post_init__(self):
        for name in ("abs_x", "rel_f", "quad_tol"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise DomainError(f"{name} must be a positive finite number, got {value!r}")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise DomainError(f"max_iter must be a positive integer, got {self.max_iter!r}")

    @classmethod
    def from_env(cls, environ=None) -> "Tolerances":
        """Defaults, overridden by ``INTERVALKIT_TOL_X`` / ``INTERVALKIT_TOL_QUAD``."""
        environ = os.environ if environ is None else environ
        overrides = {}
        for var, field in (("INTERVALKIT_TOL_X", "abs_x"), ("INTERVALKIT_TOL_QUAD", "quad_tol")):
            raw = environ.get(var)
            if raw is None or raw.strip() == "":
                continue
            try:
                overrides[field] = float(raw)
            except ValueError:
                raise DomainError(f"{var} is not a number: {raw!r}") from None
        return cls(**overrides)

    def replace(self, **changes) -> "Tolerances":
        return replace(self, **changes)


DEFAULT_TOLERANCES = Tolerances()


def _as_bracket(bracket) -> Bracket:
    if isinstance(bracket, Bracket):
        return bracket
    lo, hi = bracket
    return Bracket(float(lo), float(hi))


def _checked(value: float, x: float) -> float:
    if math.isnan(value):
        raise NumericFailure(f"function returned NaN at x={x!r}")
    return value


def find_root(f: ScalarFunction, bracket, tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    """Find a root of ``f`` inside ``bracket`` with Brent's method.

    Bisection is interleaved with secant and inverse quadratic
    interpolation steps, so convergence is guaranteed for any continuous
    ``f`` that changes sign on the bracket.  Iteration stops once the
    enclosing interval is narrower than ``tol.abs_x`` (plus a few ulps of
    the iterate) or an exact zero is hit.

    Raises
    ------
    NoSignChange
        If ``f(lo)`` and ``f(hi)`` have the same sign.
    MaxIterationsExceeded
        If ``tol.max_iter`` iterations pass without convergence.
    """
    br = _as_bracket(bracket)
    xpre, xcur = br.lo, br.hi
    fpre = _checked(f(xpre), xpre)
    fcur = _checked(f(xcur), xcur)
    if fpre == 0.0:
        return xpre
    if fcur == 0.0:
        return xcur
    if (fpre > 0) == (fcur > 0):
        raise NoSignChange(
            f"f has the same sign at both ends of [{br.lo}, {br.hi}]: {fpre!r}, {fcur!r}"
        )

    xblk = fblk = spre = scur = 0.0
    for _ in range(tol.max_iter):
        if fpre != 0.0 and fcur != 0.0 and (fpre > 0) != (fcur > 0):
            xblk, fblk = xpre, fpre
            spre = scur = xcur - xpre
        if abs(fblk) < abs(fcur):
            xpre, xcur, xblk = xcur, xblk, xcur
            fpre, fcur, fblk = fcur, fblk, fcur

        delta = 0.5 * (tol.abs_x + 4.0 * EPS * abs(xcur))
        sbis = 0.5 * (xblk - xcur)
        if fcur == 0.0 or abs(sbis) < delta:
            return xcur

        if abs(spre) > delta and abs(fcur) < abs(fpre):
            if xpre == xblk:
                stry = -fcur * (xcur - xpre) / (fcur - fpre)
            else:
                dpre = (fpre - fcur) / (xpre - xcur)
                dblk = (fblk - fcur) / (xblk - xcur)
                stry = -fcur * (fblk * dblk - fpre * dpre) / (dblk * dpre * (fblk - fpre))
            if 2.0 * abs(stry) < min(abs(spre), 3.0 * abs(sbis) - delta):
                spre, scur = scur, stry
            else:
                spre = scur = sbis
        else:
            spre = scur = sbis

        xpre, fpre = xcur, fcur
        if abs(scur) > delta:
            xcur += scur
        else:
            xcur += delta if sbis > 0 else -delta
        fcur = _checked(f(xcur), xcur)

    raise MaxIterationsExceeded(f"find_root did not converge in {tol.max_iter} iterations")


def maximize_1d(f: ScalarFunction, bracket, tol: Tolerances = DEFAULT_TOLERANCES):
    """Maximize a unimodal ``f`` on ``bracket``.

    Brent's golden-section search with parabolic acceleration, applied to
    ``-f``.  The endpoints are compared against the interior optimum so a
    maximum sitting on the bracket edge is returned exactly.

    For a smooth interior maximum the attainable accuracy of the argmax is
    limited to roughly ``sqrt(eps) * |x|`` by the flatness of ``f``; the
    search stops at ``max(tol.abs_x, that floor)``.

    Returns
    -------
    (argmax, max) : tuple of float
    """
    br = _as_bracket(bracket)
    a, b = br.lo, br.hi

    def g(x):
        return -_checked(f(x), x)

    x = w = v = a + _GOLDEN * (b - a)
    fx = fw = fv = g(x)
    d = e = 0.0
    sqrt_eps = math.sqrt(EPS)
    for _ in range(tol.max_iter):
        xm = 0.5 * (a + b)
        tol1 = sqrt_eps * abs(x) + tol.abs_x / 3.0
        tol2 = 2.0 * tol1
        if abs(x - xm) <= tol2 - 0.5 * (b - a):
            break
        golden = True
        if abs(e) > tol1:
            r = (x - w) * (fx - fv)
            q = (x - v) * (fx - fw)
            p = (x - v) * q - (x - w) * r
            q = 2.0 * (q - r)
            if q > 0.0:
                p = -p
            q = abs(q)
            etemp = e
            e = d
            if not (abs(p) >= abs(0.5 * q * etemp) or p <= q * (a - x) or p >= q * (b - x)):
                d = p / q
                u = x + d
                if u - a < tol2 or b - u < tol2:
                    d = tol1 if xm >= x else -tol1
                golden = False
        if golden:
            e = (a - x) if x >= xm else (b - x)
            d = _GOLDEN * e
        u = x + d if abs(d) >= tol1 else x + (tol1 if d > 0 else -tol1)
        fu = g(u)
        if fu <= fx:
            if u >= x:
                a = x
            else:
                b = x
            v, w, x = w, x, u
            fv, fw, fx = fw, fx, fu
        else:
            if u < x:
                a = u
            else:
                b = u
            if fu <= fw or w == x:
                v, w = w, u
                fv, fw = fw, fu
            elif fu <= fv or v == x or v == w:
                v, fv = u, fu
    else:
        raise MaxIterationsExceeded(f"maximize_1d did not converge in {tol.max_iter} iterations")

    best_x, best_f = x, -fx
    for edge in (br.lo, br.hi):
        fe = -g(edge)
        if fe > best_f:
            best_x, best_f = edge, fe
    return best_x, best_f


# Gauss-Kronrod 7/15 nodes and weights (QUADPACK qk15).
_XGK = (
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
)
_WGK = (
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
)
_WG = (
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
)


def _gk15(f, a, b):
    centr = 0.5 * (a + b)
    hlgth = 0.5 * (b - a)
    fc = f(centr)
    resg = fc * _WG[3]
    resk = fc * _WGK[7]
    resabs = abs(resk)
    fv1 = [0.0] * 7
    fv2 = [0.0] * 7
    for j in range(7):
        absc = hlgth * _XGK[j]
        f1 = f(centr - absc)
        f2 = f(centr + absc)
        fv1[j], fv2[j] = f1, f2
        resk += _WGK[j] * (f1 + f2)
        resabs += _WGK[j] * (abs(f1) + abs(f2))
        if j % 2 == 1:
            resg += _WG[j // 2] * (f1 + f2)
    reskh = 0.5 * resk
    resasc = _WGK[7] * abs(fc - reskh)
    for j in range(7):
        resasc += _WGK[j] * (abs(fv1[j] - reskh) + abs(fv2[j] - reskh))
    result = resk * hlgth
    resabs *= abs(hlgth)
    resasc *= abs(hlgth)
    err = abs((resk - resg) * hlgth)
    if resasc != 0.0 and err != 0.0:
        err = resasc * min(1.0, (200.0 * err / resasc) ** 1.5)
    if resabs > sys.float_info.min / (50.0 * EPS):
        err = max(50.0 * EPS * resabs, err)
    if math.isnan(result) or math.isnan(err):
        raise NumericFailure(f"integrand produced NaN on [{a}, {b}]")
    return result, err


def _finite_range_integrand(f, a, b):
    """Map an integral with infinite limits onto a finite parameter range."""
    if math.isfinite(a) and math.isfinite(b):
        return f, a, b
    if math.isfinite(a):
        def g(t):
            s = 1.0 - t
            return f(a + t / s) / (s * s)
        return g, 0.0, 1.0
    if math.isfinite(b):
        def g(t):
            return f(b - (1.0 - t) / t) / (t * t)
        return g, 0.0, 1.0

    def g(t):
        s = 1.0 - t * t
        return f(t / s) * (1.0 + t * t) / (s * s)
    return g, -1.0, 1.0


def integrate(
    f: ScalarFunction,
    a: float,
    b: float,
    tol: Tolerances = DEFAULT_TOLERANCES,
    max_subdivisions: int = 2000,
) -> float:
    """Adaptive Gauss-Kronrod (7/15 point) quadrature of ``f`` over ``[a, b]``.

    The subinterval with the largest error estimate is bisected until the
    summed estimate falls below ``tol.quad_tol``.  Infinite limits are
    handled by a rational change of variable onto a finite range.
    """
    a = float(a)
    b = float(b)
    if math.isnan(a) or math.isnan(b):
        raise DomainError("integration limits must not be NaN")
    if a > b:
        raise DomainError(f"integrate requires a <= b, got a={a}, b={b}")
    if a == b:
        return 0.0
    g, lo, hi = _finite_range_integrand(f, a, b)

    result, err = _gk15(g, lo, hi)
    heap = [(-err, lo, hi, result)]
    total, total_err = result, err
    n_intervals = 1
    while total_err > tol.quad_tol:
        neg_err, x0, x1, r = heapq.heappop(heap)
        mid = 0.5 * (x0 + x1)
        if not (x0 < mid < x1):
            # interval cannot be split further in floating point
            raise MaxSubdivisionsExceeded(
                f"quadrature stalled at error {total_err:.3g} > {tol.quad_tol:.3g}"
            )
        r1, e1 = _gk15(g, x0, mid)
        r2, e2 = _gk15(g, mid, x1)
        total += r1 + r2 - r
        total_err += e1 + e2 + neg_err
        heapq.heappush(heap, (-e1, x0, mid, r1))
        heapq.heappush(heap, (-e2, mid, x1, r2))
        n_intervals += 1
        if n_intervals > max_subdivisions:
            raise MaxSubdivisionsExceeded(
                f"quadrature exceeded {max_subdivisions} subdivisions "
                f"(error estimate {total_err:.3g})"
            )
    # re-sum to shed the drift of the running total
    return math.fsum(item[3] for item in heap)
