"""Mellin transform of the running supremum of a symmetric stable process.

For alpha in (1, 2) and ``Ybar = sup_{s<=1} Y_s``,

    M(s) = E[Ybar^(s-1)]
         = alpha^(s-1) G(a/2)/G(a/2+1) * G(a/2+2-s)/G(a/2-1+s) * G(a-1+s)/G(a+1-s)

with ``G(.) = G(.; alpha)`` the double gamma function.  The linear gauge
constant ``a`` of G cancels in this ratio; the quadratic one contributes
``exp(b (1 - 1/alpha)(s - 1))``, i.e. it only rescales ``Ybar``.  The
evaluator fixes ``b`` by matching the residue at ``s = 1 + alpha`` with the
known tail constant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy import integrate

from ..errors import ConvergenceError, DomainError, PoleError
from .double_gamma import DEFAULT_ROWS, log_double_gamma
from .elementary import StableParams, stable_tail_fourier, tail_constant
from .series import stable_tail_series

POLE_GUARD = 1e-4
_TOL = 1e-13
_Y_MAX = 60.0


@dataclass(frozen=True)
class NumericValue:
    """Quadrature result with an error estimate (not a certified bound)."""

    value: float
    error: float

    def __float__(self):
        return float(self.value)


@dataclass(frozen=True)
class MellinEvaluator:
    """Evaluator of ``M(s, alpha)`` built from double gamma ratios.

    Use :meth:`calibrated` to obtain an evaluator whose scale constant
    ``b_cal`` reproduces the residue identity.
    """

    alpha: float
    truncation_N: int = DEFAULT_ROWS
    b_cal: float = 0.0
    target_eps: float = 1e-10
    a_const: float = 0.0

    def __post_init__(self):
        if not (1.0 < self.alpha < 2.0):
            raise DomainError(f"Mellin evaluator needs alpha in (1, 2), got {self.alpha}")
        if self.truncation_N < 1:
            raise DomainError("truncation_N must be positive")

    @classmethod
    def calibrated(cls, alpha: float, truncation_N: int = DEFAULT_ROWS,
                   target_eps: float = 1e-10, a_const: float = 0.0) -> "MellinEvaluator":
        raw = cls(alpha, truncation_N, 0.0, target_eps, a_const)
        res = raw.residue()
        want = tail_constant(alpha) * alpha
        if not res < 0:
            raise ConvergenceError("uncalibrated residue has the wrong sign", achieved=res)
        b = math.log(want / -res) / (alpha - 1.0)
        return cls(alpha, truncation_N, b, target_eps, a_const)

    @property
    def params(self) -> StableParams:
        return StableParams(self.alpha)

    def _logG(self, z):
        val, err = log_double_gamma(z, self.alpha, a=self.a_const,
                                    rows=self.truncation_N, eps=self.target_eps)
        return val, err

    def log_mellin(self, s):
        """``log M(s)`` (arbitrary branch) and an error estimate."""
        a = self.alpha
        s = np.atleast_1d(np.asarray(s, dtype=complex))
        args = np.concatenate([np.array([a / 2, a / 2 + 1], dtype=complex),
                               a / 2 + 2 - s, a / 2 - 1 + s, a - 1 + s, a + 1 - s])
        lg, err = self._logG(args)
        n = s.size
        g0, g1 = lg[0], lg[1]
        num1, den1 = lg[2:2 + n], lg[2 + n:2 + 2 * n]
        num2, den2 = lg[2 + 2 * n:2 + 3 * n], lg[2 + 3 * n:]
        out = ((s - 1) * math.log(a) + g0 - g1 + num1 - den1 + num2 - den2
               + self.b_cal * (1 - 1 / a) * (s - 1))
        return out, 6 * err

    def residue(self) -> float:
        """Residue of M at ``s = 1 + alpha`` (standard orientation, negative)."""
        a = self.alpha
        s = 1 + a
        args = np.array([a / 2, a / 2 + 1, a / 2 + 2 - s, a / 2 - 1 + s, a - 1 + s], dtype=complex)
        lg, _ = self._logG(args)
        # G(z; a) = (z/a)(1 + O(z)) near z = 0, so 1/G(a+1-s) ~ -a/(s-1-a)
        logrest = (s - 1) * math.log(a) + lg[0] - lg[1] + lg[2] - lg[3] + lg[4]
        logrest += self.b_cal * (1 - 1 / a) * (s - 1)
        return float((-a * np.exp(logrest)).real)

    def poles(self, re_min: float = -40.0, re_max: float = 40.0) -> np.ndarray:
        """Poles of M with real part in ``[re_min, re_max]``."""
        a = self.alpha
        K = int(abs(re_min) + abs(re_max)) + 4
        mm, nn = np.meshgrid(np.arange(K), np.arange(K), indexing="ij")
        lat = (mm * a + nn).ravel()
        den = np.concatenate([1 - a / 2 - lat, 1 + a + lat])
        num = np.concatenate([2 + a / 2 + lat, 1 - a - lat])
        den = np.sort(den[(den >= re_min - 1) & (den <= re_max + 1)])
        num = list(np.sort(num[(num >= re_min - 1) & (num <= re_max + 1)]))
        poles = []
        for p in den:
            j = next((i for i, q in enumerate(num) if abs(q - p) < 1e-9), None)
            if j is None:
                poles.append(p)
            else:
                num.pop(j)
        poles = np.array(poles)
        return poles[(poles >= re_min) & (poles <= re_max)]


def _nearest_pole(ev: MellinEvaluator, s: np.ndarray):
    re = s.real
    poles = ev.poles(float(np.min(re)) - 2, float(np.max(re)) + 2)
    if poles.size == 0:
        return np.full(s.shape, np.inf), np.full(s.shape, np.nan)
    d = np.abs(s[:, None] - poles[None, :])
    j = np.argmin(d, axis=1)
    return d[np.arange(s.size), j], poles[j]


def mellin_sup(s, ev: MellinEvaluator):
    """``M(s, alpha) = E[Ybar_1^(s-1)]``; refuses points within 1e-4 of a pole."""
    scalar = np.ndim(s) == 0
    s = np.atleast_1d(np.asarray(s, dtype=complex))
    dist, pole = _nearest_pole(ev, s)
    bad = dist < POLE_GUARD
    if np.any(bad):
        i = int(np.argmax(bad))
        raise PoleError(f"s={s[i]} lies {dist[i]:.3g} from the pole at {pole[i]}",
                        pole=float(pole[i]), distance=float(dist[i]))
    logm, err = ev.log_mellin(s)
    if err > ev.target_eps:
        raise ConvergenceError(f"Mellin evaluation error {err:.3g} above target", achieved=err)
    out = np.exp(logm)
    return complex(out[0]) if scalar else out


# ---------------------------------------------------------------- inversion

@lru_cache(maxsize=64)
def _line(ev: MellinEvaluator, c: float, h: float, y_max: float):
    y = np.arange(0.0, y_max + h / 2, h)
    logm, _ = ev.log_mellin(c + 1j * y)
    return y, np.exp(logm)


def _strip_halfwidth(ev: MellinEvaluator, c: float, extra_poles=()) -> float:
    poles = list(ev.poles(c - 4, c + 4)) + list(extra_poles)
    return min(abs(c - p) for p in poles)


def _step(d: float, logspan: float, tol: float = _TOL) -> float:
    d = 0.8 * d
    h = 2 * math.pi * d / (math.log(1 / tol) + d * logspan)
    # quantize to a power-of-two fraction of 1/4 so line grids are shared
    k = max(0, math.ceil(math.log2(0.25 / h)))
    return 0.25 / 2 ** k


def _invert(ev, c, kernel, logs, extra_poles=()):
    """``(1/pi) Re int_0^Y M(c+iy) kernel(c+iy) dy`` for several points.

    ``kernel(s)`` returns an array of shape (len(points), len(s)).
    Returns values and error estimates (half-step comparison plus the
    size of the integrand at the truncation point).
    """
    d = _strip_halfwidth(ev, c, extra_poles)
    h = _step(d, float(np.max(np.abs(logs))) if len(logs) else 0.0)
    y, m = _line(ev, c, h, _Y_MAX)
    f = m[None, :] * kernel(c + 1j * y)
    w = np.full(y.size, h)
    w[0] = h / 2
    full = (f * w).real.sum(axis=1) / math.pi
    w2 = np.zeros(y.size)
    w2[::2] = 2 * h
    w2[0] = h
    if (y.size - 1) % 2:
        w2[-1] = 0.0
        coarse_ok = False
    else:
        coarse_ok = True
    half = (f * w2).real.sum(axis=1) / math.pi
    err = np.abs(full - half) if coarse_ok else np.zeros_like(full)
    err = err + np.abs(f[:, -1]) * 10.0
    return full, err


def sup_density(x, ev: MellinEvaluator, with_error: bool = False):
    """Density of ``Ybar_1`` by inverse Mellin transform.

    Uses the line ``Re s = 1`` for ``x <= 1`` and ``Re s = 3`` plus the
    residue term ``-Res x^(-1-alpha)`` for ``x > 1``.
    """
    scalar = np.ndim(x) == 0
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(x <= 0):
        raise DomainError("sup_density needs x > 0")
    val = np.empty(x.shape)
    err = np.empty(x.shape)
    res = ev.residue()
    for lo, c in ((True, 1.0), (False, 3.0)):
        sel = (x <= 1.0) if lo else (x > 1.0)
        if not np.any(sel):
            continue
        lx = np.log(x[sel])
        kern = lambda s, lx=lx: np.exp(-s[None, :] * lx[:, None])
        v, e = _invert(ev, c, kern, lx)
        if not lo:
            v = v - res * x[sel] ** (-1 - ev.alpha)
        val[sel], err[sel] = v, e
    if with_error:
        if scalar:
            return NumericValue(float(val[0]), float(err[0]))
        return val, err
    return float(val[0]) if scalar else val


def sup_tail(u, ev: MellinEvaluator, with_error: bool = False):
    """``P(Ybar_1 > u)`` by inverting ``M(s) u^(1-s)/(s-1)``."""
    scalar = np.ndim(u) == 0
    u = np.atleast_1d(np.asarray(u, dtype=float))
    if np.any(u <= 0):
        raise DomainError("sup_tail needs u > 0")
    a = ev.alpha
    val = np.empty(u.shape)
    err = np.empty(u.shape)
    res = ev.residue()
    for lo, c in ((True, 1.0 + a / 2), (False, 3.0)):
        sel = (u <= 1.0) if lo else (u > 1.0)
        if not np.any(sel):
            continue
        lu = np.log(u[sel])
        kern = lambda s, lu=lu: np.exp((1 - s[None, :]) * lu[:, None]) / (s[None, :] - 1)
        v, e = _invert(ev, c, kern, lu, extra_poles=(1.0,))
        if not lo:
            v = v - res / a * u[sel] ** (-a)
        val[sel], err[sel] = v, e
    if with_error:
        if scalar:
            return NumericValue(float(val[0]), float(err[0]))
        return val, err
    return float(val[0]) if scalar else val


def stable_tail(u: float, alpha: float) -> float:
    """``P(Y_1 > u)``: certified series where it is sharp, Fourier otherwise."""
    if u >= 1.0:
        s = stable_tail_series(u, StableParams(alpha))
        if s.error_bound < 1e-12:
            return s.value
    return stable_tail_fourier(u, alpha)


@dataclass(frozen=True)
class SupMean:
    """``E[Ybar_1]`` and its two-summand decomposition.

    ``gamma_term = Gamma(1-1/alpha)/pi`` is ``E[Y_1^+]``; ``excursion_term``
    is ``int_0^inf P(Ybar_1 > u, Y_1 < u) du``.
    """

    value: float
    error: float
    gamma_term: float
    excursion_term: float
    excursion_error: float

    @property
    def decomposition_total(self) -> float:
        return self.gamma_term + self.excursion_term


def excursion_integrand(u: float, ev: MellinEvaluator) -> float:
    """``P(Ybar_1 > u, Y_1 <= u) = P(Ybar_1 > u) - P(Y_1 > u)``."""
    return sup_tail(u, ev) - stable_tail(u, ev.alpha)


def sup_mean(ev: MellinEvaluator) -> SupMean:
    a = ev.alpha
    m2 = mellin_sup(2.0, ev)
    g = math.gamma(1 - 1 / a) / math.pi
    f = lambda u: excursion_integrand(u, ev)
    i1, e1 = integrate.quad(f, 0.0, 1.0, epsabs=1e-11, epsrel=1e-10, limit=200)
    i2, e2 = integrate.quad(f, 1.0, np.inf, epsabs=1e-11, epsrel=1e-10, limit=200)
    return SupMean(float(m2.real), ev.target_eps, g, i1 + i2, e1 + e2)


# ------------------------------------------------------- bound constants

def contour_envelope(ev: MellinEvaluator, c: float = 3.0, y_max: float = 50.0,
                     step: float = 1.0) -> float:
    """Smallest constant K with ``|M(c+iy)| <= K exp(-pi|y|/5)`` on a y grid."""
    y = np.arange(0.0, y_max + step / 2, step)
    m = np.abs(mellin_sup(c + 1j * y, ev))
    return float(np.max(m * np.exp(np.pi * y / 5)))


def fitted_bound_constant(alphas: Sequence[float] = (4 / 3, 6 / 5, 8 / 7, 10 / 9),
                          x_grid=None) -> float:
    """Empirical ``A`` with ``pbar(x) <= C alpha x^(-1-alpha) + A x^(-3)``.

    The supremum of ``(pbar(x) - C alpha x^(-1-alpha)) x^3`` over the
    given alphas and x grid.
    """
    if x_grid is None:
        x_grid = np.logspace(-2, 3, 251)
    best = -np.inf
    for a in alphas:
        ev = MellinEvaluator.calibrated(a)
        p = sup_density(np.asarray(x_grid), ev)
        lead = tail_constant(a) * a * x_grid ** (-1 - a)
        best = max(best, float(np.max((p - lead) * x_grid ** 3)))
    return best


def phi_domination(u, A: float):
    """Integrable dominating function for ``P(Ybar_1 > u, Y_1 <= u)``."""
    u = np.asarray(u, dtype=float)
    out = np.where(u <= 1.0, 1.0, (A / 2 + 6 / math.pi) / np.maximum(u, 1.0) ** 2)
    return float(out) if out.ndim == 0 else out
