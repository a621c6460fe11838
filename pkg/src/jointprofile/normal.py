"""Standard normal CDF, log-CDF and quantile on top of ``math.erfc``.

The quantile starts from Acklam's rational approximation (relative error
about 1e-9) and is polished with Halley steps against the erfc-based CDF,
which keeps full relative precision deep into the lower tail.  Array
versions defer to ``scipy.special``.
"""
from __future__ import annotations

import math

import numpy as np
from scipy import special

_SQRT2 = math.sqrt(2.0)
_SQRT2PI = math.sqrt(2.0 * math.pi)
_LOG_SQRT2PI = 0.5 * math.log(2.0 * math.pi)

_A = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
      1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
_B = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
      6.680131188771972e01, -1.328068155288572e01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
      -2.549671010229583e00, 4.374664141464968e00, 2.938163982698783e00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
      3.754408661907416e00)
_P_LOW = 0.02425


def norm_pdf(x: float) -> float:
    return math.exp(-0.5 * x * x) / _SQRT2PI


def norm_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / _SQRT2)


def norm_sf(x: float) -> float:
    return 0.5 * math.erfc(x / _SQRT2)


def log_norm_cdf(x: float) -> float:
    """``log(norm_cdf(x))`` without underflow for very negative ``x``."""
    if x > 0.0:
        return math.log1p(-norm_sf(x))
    if x > -30.0:
        return math.log(norm_cdf(x))
    # asymptotic expansion of the Mills ratio
    total, term, x2 = 1.0, 1.0, x * x
    for n in range(1, 12):
        term *= -(2 * n - 1) / x2
        total += term
    return -0.5 * x2 - math.log(-x) - _LOG_SQRT2PI + math.log(total)


def _acklam(p: float) -> float:
    if p < _P_LOW:
        q = math.sqrt(-2.0 * math.log(p))
        num = ((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]
        den = (((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0
        return num / den
    if p <= 1.0 - _P_LOW:
        q = p - 0.5
        r = q * q
        num = (((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q
        den = ((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0
        return num / den
    return -_acklam(1.0 - p)


def norm_ppf(p: float) -> float:
    """Standard normal quantile; accurate to a few ulps of ``x`` for p in (0, 1)."""
    if not 0.0 < p < 1.0:
        if p == 0.0:
            return -math.inf
        if p == 1.0:
            return math.inf
        raise ValueError(f"probability {p!r} outside [0, 1]")
    if p > 0.5:
        return -norm_ppf(1.0 - p)
    x = _acklam(p)
    for _ in range(6):
        err = norm_cdf(x) - p
        u = err * _SQRT2PI * math.exp(0.5 * x * x)
        step = u / (1.0 + 0.5 * x * u)
        x -= step
        if abs(step) <= 1e-15 * max(1.0, abs(x)):
            break
    return x


def norm_ppf_upper(q: float) -> float:
    """Inverse survival function: the ``x`` with ``norm_sf(x) == q``."""
    if q > 0.5:
        return norm_ppf(1.0 - q)
    return -norm_ppf(q)


def norm_cdf_array(x) -> np.ndarray:
    return special.ndtr(np.asarray(x, dtype=float))


def log_norm_cdf_array(x) -> np.ndarray:
    return special.log_ndtr(np.asarray(x, dtype=float))
