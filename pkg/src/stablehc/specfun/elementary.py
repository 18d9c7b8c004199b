"""Closed-form constants and reference densities for symmetric stable laws.

All densities use the normalization ``E[exp(i xi Y_1)] = exp(-|xi|**alpha)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Tuple

import numpy as np
from scipy import integrate, special

from ..errors import DomainError


@dataclass(frozen=True)
class StableParams:
    """Index of a symmetric stable law plus derived quantities.

    Parameters
    ----------
    alpha : float
        Stability index in (0, 2].
    class_kl : tuple of int, optional
        ``(k, l)`` when ``alpha == 2*l / (1 + 2*k)``.  Validated on
        construction.
    """

    alpha: float
    class_kl: Optional[Tuple[int, int]] = None
    rho: float = field(default=0.5, init=False)

    def __post_init__(self):
        a = float(self.alpha)
        if not (0.0 < a <= 2.0) or math.isnan(a):
            raise DomainError(f"alpha must lie in (0, 2], got {self.alpha!r}")
        object.__setattr__(self, "alpha", a)
        if self.class_kl is not None:
            k, l = self.class_kl
            if k < 1 or l < 1:
                raise DomainError("class (k, l) needs positive integers")
            if abs(a * (0.5 + k) - l) > 8 * np.finfo(float).eps * max(1.0, l):
                raise DomainError(
                    f"alpha={a} is not in class C_({k},{l}): alpha*(1/2+k) != l")

    @classmethod
    def from_class(cls, k: int, l: int) -> "StableParams":
        """Instance with ``alpha = 2l/(1+2k)``."""
        return cls(2.0 * l / (1.0 + 2.0 * k), class_kl=(k, l))

    @property
    def beta(self) -> float:
        """Dual index ``2/alpha``."""
        return 2.0 / self.alpha

    @property
    def alpha_fraction(self) -> Fraction:
        return Fraction(self.alpha).limit_denominator(10_000)


@dataclass(frozen=True)
class SeriesValue:
    """A value together with a rigorous absolute error bound."""

    value: float
    error_bound: float
    terms_used: int

    def __float__(self):
        return float(self.value)

    @property
    def interval(self) -> Tuple[float, float]:
        return self.value - self.error_bound, self.value + self.error_bound

    def contains(self, x: float) -> bool:
        lo, hi = self.interval
        return lo <= x <= hi


def gamma_fn(x):
    """Euler's Gamma function; raises at the poles 0, -1, -2, ..."""
    arr = np.asarray(x, dtype=float)
    if np.any((arr <= 0) & (arr == np.round(arr))):
        raise DomainError(f"Gamma has a pole at nonpositive integer input {x!r}")
    out = special.gamma(arr)
    return float(out) if np.ndim(out) == 0 else out


def _check_open_alpha(alpha, lo=0.0, hi=2.0):
    if not (lo < alpha < hi):
        raise DomainError(f"alpha must lie in ({lo}, {hi}), got {alpha!r}")


def tail_constant(alpha: float) -> float:
    """``C(alpha)`` with ``P(Y_1 > u) ~ C u**-alpha``.

    ``C = Gamma(1+alpha) sin(pi alpha/2) / (pi alpha)``.
    """
    _check_open_alpha(alpha)
    return math.gamma(1.0 + alpha) * math.sin(math.pi * alpha / 2) / (math.pi * alpha)


def frac_perimeter_constant(d: int, alpha: float) -> float:
    """Normalizing constant of the fractional perimeter kernel in dimension d.

    This is also the Levy density constant of the isotropic alpha-stable
    process: ``nu(dy) = A |y|**(-d-alpha) dy``.
    """
    if int(d) != d or d < 1:
        raise DomainError(f"dimension must be a positive integer, got {d!r}")
    _check_open_alpha(alpha)
    return (alpha * math.gamma((d + alpha) / 2)
            / (2 ** (1 - alpha) * math.pi ** (d / 2) * math.gamma(1 - alpha / 2)))


def cauchy_density(x):
    return 1.0 / (np.pi * (1.0 + np.square(x)))


def cauchy_tail(u):
    """``P(Y_1 > u)`` for the standard Cauchy law, ``u >= 0``."""
    u = np.asarray(u, dtype=float)
    if np.any(u < 0):
        raise DomainError("cauchy_tail needs u >= 0")
    with np.errstate(divide="ignore"):
        out = np.arctan(1.0 / u) / np.pi
    return float(out) if out.ndim == 0 else out


def stable_density_fourier(x: float, alpha: float, epsabs: float = 1e-13) -> float:
    """Density of Y_1 by Fourier inversion, ``(1/pi) int_0^inf cos(xy) e^{-y^alpha} dy``.

    Independent reference used to check the series expansions.
    """
    x = abs(float(x))
    if x == 0.0:
        return math.gamma(1 + 1 / alpha) / math.pi
    f = lambda y: math.exp(-y ** alpha)
    # the integrand is negligible past y_max; QAWO on a finite range is
    # more robust than QAWF for slowly oscillating cases
    y_max = (40.0) ** (1.0 / alpha)
    val, _ = integrate.quad(f, 0.0, y_max, weight="cos", wvar=x,
                            epsabs=epsabs, epsrel=1e-12, limit=500)
    return val / math.pi


def stable_tail_fourier(u: float, alpha: float, epsabs: float = 1e-13) -> float:
    """``P(Y_1 > u)`` via ``1/2 - (1/pi) int_0^inf sin(uy) e^{-y^alpha}/y dy``."""
    u = float(u)
    if u == 0.0:
        return 0.5
    sgn = 1.0 if u > 0 else -1.0
    u = abs(u)
    y_max = (40.0) ** (1.0 / alpha)

    def f(y):
        return math.exp(-y ** alpha)

    # sin(uy)/y has a removable singularity at 0; split it off as Si(u y0)
    y0 = min(1e-3, y_max)
    head = special.sici(u * y0)[0]  # int_0^{y0} sin(uy)/y dy with e^{-y^a} ~ 1
    # correction for e^{-y^a} - 1 on [0, y0]
    corr, _ = integrate.quad(lambda y: math.sin(u * y) * math.expm1(-y ** alpha) / y,
                             0.0, y0, epsabs=epsabs)
    body, _ = integrate.quad(lambda y: f(y) / y, y0, y_max, weight="sin", wvar=u,
                             epsabs=epsabs, epsrel=1e-12, limit=500)
    val = 0.5 - (head + corr + body) / math.pi
    return val if sgn > 0 else 1.0 - val


def stable_abs_moment(p: float, alpha: float) -> float:
    """``E|Y_1|**p`` for ``-1 < p < alpha``."""
    if not (-1.0 < p < alpha):
        raise DomainError("absolute moment exists only for -1 < p < alpha")
    return (2.0 ** p * math.gamma((1 + p) / 2) * math.gamma(1 - p / alpha)
            / (math.sqrt(math.pi) * math.gamma(1 - p / 2)))


def sup_mean_exact(alpha: float) -> float:
    """``E[sup_{s<=1} Y_s]`` from Spitzer's identity, ``alpha Gamma(1-1/alpha)/pi``.

    Used only as an independent check on the Mellin route.
    """
    _check_open_alpha(alpha, 1.0, 2.0)
    return alpha * math.gamma(1.0 - 1.0 / alpha) / math.pi
