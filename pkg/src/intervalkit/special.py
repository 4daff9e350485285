"""Special functions: normal cdf/quantile, regularized incomplete gamma and
beta functions, and chi-square quantiles."""
from __future__ import annotations

import math
import sys

from .exceptions import DomainError, MaxIterationsExceeded
from .numeric import DEFAULT_TOLERANCES, Tolerances, find_root

__all__ = [
    "normal_pdf",
    "normal_logpdf",
    "normal_cdf",
    "normal_sf",
    "normal_quantile",
    "gamma_p",
    "gamma_q",
    "beta_inc",
    "chi_square_cdf",
    "chi_square_quantile",
]

_EPS = sys.float_info.epsilon
_FPMIN = sys.float_info.min / _EPS
_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
_SQRT2 = math.sqrt(2.0)
_MAX_TERMS = 10000


def _check_probability(p, name="p"):
    if not (0.0 < p < 1.0):
        raise DomainError(f"{name} must lie in (0, 1), got {p!r}")


def normal_logpdf(x: float) -> float:
    return -0.5 * x * x - _LOG_SQRT_2PI


def normal_pdf(x: float) -> float:
    return math.exp(normal_logpdf(x))


def normal_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / _SQRT2)


def normal_sf(x: float) -> float:
    return 0.5 * math.erfc(x / _SQRT2)


# Wichura's AS241 (PPND16) rational approximations.
_A = (3.3871328727963666080e0, 1.3314166789178437745e2, 1.9715909503065514427e3,
      1.3731693765509461125e4, 4.5921953931549871457e4, 6.7265770927008700853e4,
      3.3430575583588128105e4, 2.5090809287301226727e3)
_B = (1.0, 4.2313330701600911252e1, 6.8718700749205790830e2, 5.3941960214247511077e3,
      2.1213794301586595867e4, 3.9307895800092710610e4, 2.8729085735721942674e4,
      5.2264952788528545610e3)
_C = (1.42343711074968357734e0, 4.63033784615654529590e0, 5.76949722146069140550e0,
      3.64784832476320460504e0, 1.27045825245236838258e0, 2.41780725177450611770e-1,
      2.27238449892691845833e-2, 7.74545014278341407640e-4)
_D = (1.0, 2.05319162663775882187e0, 1.67638483018380384940e0, 6.89767334985100004550e-1,
      1.48103976427480074590e-1, 1.51986665636164571966e-2, 5.47593808499534494600e-4,
      1.05075007164441684324e-9)
_E = (6.65790464350110377720e0, 5.46378491116411436990e0, 1.78482653991729133580e0,
      2.96560571828504891230e-1, 2.65321895265761230930e-2, 1.24266094738807843860e-3,
      2.71155556874348757815e-5, 2.01033439929228813265e-7)
_F = (1.0, 5.99832206555887937690e-1, 1.36929880922735805310e-1, 1.48753612908506148525e-2,
      7.86869131145613259100e-4, 1.84631831751005468180e-5, 1.42151175831644588870e-7,
      2.04426310338993978564e-15)


def _poly(coeffs, r):
    acc = 0.0
    for c in reversed(coeffs):
        acc = acc * r + c
    return acc


def normal_quantile(p: float) -> float:
    """Inverse of the standard normal cdf (Wichura, AS241)."""
    _check_probability(p)
    q = p - 0.5
    if abs(q) <= 0.425:
        r = 0.180625 - q * q
        return q * _poly(_A, r) / _poly(_B, r)
    r = p if q < 0 else 1.0 - p
    r = math.sqrt(-math.log(r))
    if r <= 5.0:
        r -= 1.6
        val = _poly(_C, r) / _poly(_D, r)
    else:
        r -= 5.0
        val = _poly(_E, r) / _poly(_F, r)
    return -val if q < 0 else val


def _gamma_series(a, x):
    term = total = 1.0 / a
    ap = a
    for _ in range(_MAX_TERMS):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            return total * math.exp(-x + a * math.log(x) - math.lgamma(a))
    raise MaxIterationsExceeded(f"incomplete gamma series failed for a={a}, x={x}")


def _gamma_cf(a, x):
    b = x + 1.0 - a
    c = 1.0 / _FPMIN
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_TERMS):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = b + an / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return math.exp(-x + a * math.log(x) - math.lgamma(a)) * h
    raise MaxIterationsExceeded(f"incomplete gamma continued fraction failed for a={a}, x={x}")


def gamma_p(a: float, x: float) -> float:
    """Regularized lower incomplete gamma function P(a, x)."""
    if a <= 0:
        raise DomainError(f"gamma_p requires a > 0, got {a!r}")
    if x <= 0:
        return 0.0
    if math.isinf(x):
        return 1.0
    if x < a + 1.0:
        return _gamma_series(a, x)
    return 1.0 - _gamma_cf(a, x)


def gamma_q(a: float, x: float) -> float:
    """Regularized upper incomplete gamma function Q(a, x) = 1 - P(a, x)."""
    if a <= 0:
        raise DomainError(f"gamma_q requires a > 0, got {a!r}")
    if x <= 0:
        return 1.0
    if math.isinf(x):
        return 0.0
    if x < a + 1.0:
        return 1.0 - _gamma_series(a, x)
    return _gamma_cf(a, x)


def _beta_cf(a, b, x):
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _FPMIN:
        d = _FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, _MAX_TERMS):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h
    raise MaxIterationsExceeded(f"incomplete beta continued fraction failed for a={a}, b={b}")


def beta_inc(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta function I_x(a, b)."""
    if a <= 0 or b <= 0:
        raise DomainError(f"beta_inc requires a, b > 0, got a={a!r}, b={b!r}")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    log_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                 + a * math.log(x) + b * math.log1p(-x))
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_cf(a, b, x) / a
    return 1.0 - front * _beta_cf(b, a, 1.0 - x) / b


def chi_square_cdf(r: float, x: float) -> float:
    return gamma_p(0.5 * r, 0.5 * x)


def _chi_square_logpdf(r, x):
    k = 0.5 * r
    return (k - 1.0) * math.log(x) - 0.5 * x - k * math.log(2.0) - math.lgamma(k)


def chi_square_quantile(r: int, p: float, tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    """Quantile of the chi-square distribution with ``r`` degrees of freedom.

    Solved in log-abscissa so small ``p`` keeps full relative accuracy, then
    polished with Newton steps on the exact cdf.
    """
    if int(r) != r or r < 1:
        raise DomainError(f"degrees of freedom must be a positive integer, got {r!r}")
    _check_probability(p)

    def excess(u):
        return chi_square_cdf(r, math.exp(u)) - p

    lo = hi = math.log(float(r))
    while excess(lo) > 0:
        lo -= 2.0
        if lo < -700:
            return 0.0
    while excess(hi) < 0:
        hi += 1.0
    if lo == hi:
        lo -= 2.0
    x = math.exp(find_root(excess, (lo, hi), tol))
    for _ in range(3):
        resid = chi_square_cdf(r, x) - p
        if resid == 0.0:
            break
        step = resid / math.exp(_chi_square_logpdf(r, x))
        x_new = x - step
        if not (x_new > 0) or abs(chi_square_cdf(r, x_new) - p) >= abs(resid):
            break
        x = x_new
    return x
