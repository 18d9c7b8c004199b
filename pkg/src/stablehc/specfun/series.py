"""Convergent and asymptotic series for stable densities with certified remainders."""

from __future__ import annotations

import math
from typing import Optional

import numpy as np
from scipy.special import gammaln

from ..errors import DomainError
from .elementary import SeriesValue, StableParams

N_MAX = 30


def _log_symmetric_bound(n: int, x: float, alpha: float) -> float:
    # Taylor remainder of the dual series, kept with the damping factor
    # cos(pi*gamma/2) of the rotated kernel:
    # alpha Gamma(alpha(n+1)) x^{-(n+1)alpha-1} / (pi n! c^{(n+1)alpha}),
    # c = cos(pi (alpha-1) / (2 alpha))
    c = math.cos(math.pi * (alpha - 1.0) / (2.0 * alpha))
    return (math.log(alpha) + gammaln(alpha * (n + 1)) - math.log(math.pi) - gammaln(n + 1)
            - ((n + 1) * alpha + 1) * math.log(x) - (n + 1) * alpha * math.log(c))


def uniform_remainder_bound(n: int, x: float) -> float:
    """Remainder bound valid for every alpha in (1, 2) at x >= 1.

    ``2^{n+2} Gamma(2n+2) x^{-n-2} / (pi n!)``.
    """
    return math.exp((n + 2) * math.log(2.0) + gammaln(2 * n + 2) - math.log(math.pi)
                    - gammaln(n + 1) - (n + 2) * math.log(x))


def _check_heavy(x, params):
    if x < 1.0:
        raise DomainError(f"the certified bound needs x >= 1, got {x}")
    if not (1.0 < params.alpha < 2.0):
        raise DomainError(f"series needs alpha in (1, 2), got {params.alpha}")


def best_order_symmetric(x: float, alpha: float, n_max: int = N_MAX) -> int:
    """Order n in [1, n_max] minimizing the remainder bound at x."""
    logs = [_log_symmetric_bound(n, x, alpha) for n in range(1, n_max + 1)]
    return int(np.argmin(logs)) + 1


def stable_density_series(x: float, params: StableParams,
                          n: Optional[int] = None) -> SeriesValue:
    """Large-x expansion of the symmetric stable density, alpha in (1, 2).

    ``p(x) = (1/pi) sum_{k<=n} (-1)^{k+1} Gamma(1+k alpha) sin(k alpha pi/2)/k! x^{-1-alpha k}``.
    The reported remainder bound is
    ``alpha Gamma(alpha(n+1)) x^{-(n+1)alpha-1} / (pi n! c^{(n+1)alpha})`` with
    ``c = cos(pi(alpha-1)/(2 alpha))``; it never exceeds
    :func:`uniform_remainder_bound`.  ``n=None`` picks the order with the
    smallest bound.
    """
    x = float(x)
    _check_heavy(x, params)
    if n is None:
        n = best_order_symmetric(x, params.alpha)
    if n < 1:
        raise DomainError("need at least one term")
    a = params.alpha
    k = np.arange(1, n + 1)
    sign = np.where(k % 2 == 1, 1.0, -1.0)
    logmag = gammaln(1 + k * a) - gammaln(k + 1) - (1 + a * k) * math.log(x)
    terms = sign * np.sin(k * a * np.pi / 2) * np.exp(logmag)
    value = float(np.sum(terms)) / math.pi
    bound = math.exp(_log_symmetric_bound(n, x, a))
    return SeriesValue(value, bound, int(n))


def stable_tail_series(u: float, params: StableParams,
                       n: Optional[int] = None) -> SeriesValue:
    """``P(Y_1 > u)`` for u >= 1 by integrating the density series termwise."""
    u = float(u)
    _check_heavy(u, params)
    a = params.alpha
    if n is None:
        n = best_order_symmetric(u, a)
    k = np.arange(1, n + 1)
    sign = np.where(k % 2 == 1, 1.0, -1.0)
    # int_u^inf x^{-1-ak} dx = u^{-ak}/(ak); Gamma(1+ak)/(ak) = Gamma(ak)
    logmag = gammaln(k * a) - gammaln(k + 1) - a * k * math.log(u)
    value = float(np.sum(sign * np.sin(k * a * np.pi / 2) * np.exp(logmag))) / math.pi
    # int_u^inf x^{-(n+1)a-1} dx = u^{-(n+1)a} / ((n+1)a)
    bound = math.exp(_log_symmetric_bound(n, u, a)) * u / ((n + 1) * a)
    return SeriesValue(value, bound, int(n))


def skewed_density_series(x: float, alpha: float, gamma_skew: float,
                          n: int) -> SeriesValue:
    """Convergent series for a skewed stable density with index alpha < 1.

    Characteristic function ``exp(-|y|^alpha e^{i pi gamma sgn(y)/2})``.
    Terms ``(1/(pi x)) ((-x)^k/k!) sin(k pi (gamma-alpha)/(2 alpha)) Gamma(1+k/alpha)``,
    remainder at most ``x^n Gamma((n+1)/alpha) / (pi alpha n! cos(pi gamma/2)^((n+1)/alpha))``.
    """
    x = float(x)
    if not (0.0 < alpha < 1.0):
        raise DomainError(f"skewed series needs alpha in (0, 1), got {alpha}")
    if x <= 0:
        raise DomainError("skewed series needs x > 0")
    if abs(gamma_skew) > alpha:
        raise DomainError(f"skewness |gamma| <= alpha required, got {gamma_skew}")
    if n < 1:
        raise DomainError("need at least one term")
    k = np.arange(1, n + 1)
    sign = np.where(k % 2 == 1, -1.0, 1.0)  # (-1)^k
    logmag = k * math.log(x) - gammaln(k + 1) + gammaln(1 + k / alpha)
    s = np.sin(k * np.pi * (gamma_skew - alpha) / (2 * alpha))
    value = float(np.sum(sign * s * np.exp(logmag))) / (math.pi * x)
    log_rem = (n * math.log(x) + gammaln((n + 1) / alpha) - math.log(math.pi * alpha)
               - gammaln(n + 1) - (n + 1) / alpha * math.log(math.cos(math.pi * gamma_skew / 2)))
    return SeriesValue(value, math.exp(log_rem), int(n))


def zolotarev_compose(x: float, params: StableParams,
                      n: Optional[int] = None) -> SeriesValue:
    """Symmetric density at alpha in (1, 2) through the dual index 1/alpha.

    ``p_alpha(x) = x^{-1-alpha} p_{1/alpha}(x^{-alpha}, 1/alpha - 1)``; the
    remainder of the dual series is rescaled by ``x^{-1-alpha}``.
    """
    x = float(x)
    _check_heavy(x, params)
    a = params.alpha
    dual = 1.0 / a
    xd = x ** (-a)
    if n is None:
        n = best_order_symmetric(x, a)
    inner = skewed_density_series(xd, dual, dual - 1.0, n)
    scale = x ** (-1.0 - a)
    return SeriesValue(scale * inner.value, scale * inner.error_bound, inner.terms_used)
