"""Double gamma function ``G(z; tau)`` for real ``tau`` in [1, 2].

``G(z;tau) = (z/tau) exp(a z/tau + b z^2/(2 tau)) prod'_{m,n>=0} E2(-z/(m tau + n))``
with the canonical factor ``E2(w) = (1-w) exp(w + w^2/2)``.

The default route sums each row ``m`` of the lattice in closed form,

    sum_n log E2(-z/(c+n)) = lgamma(c) - lgamma(c+z) + z psi(c) + z^2 psi'(c)/2,

with ``c = m tau`` (and a shifted version for the ``m = 0`` row), and sums
the rows beyond ``M`` through the Hurwitz-zeta expansion
``sum_{k>=3} (-1)^{k+1} z^k/k zeta(k, c)`` combined with Euler-Maclaurin in
``m``.  :func:`truncated_product` evaluates the plain truncated double
product instead and serves as an independent check.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy import special

from ..errors import ConvergenceError, DomainError

DEFAULT_ROWS = 60
N_MAX = 5000
_K_MAX = 120


def _check_tau(tau):
    if not (1.0 <= tau <= 2.0):
        raise DomainError(f"tau must lie in [1, 2], got {tau}")


def on_zero_lattice(z, tau, tol=1e-13):
    """True where ``z`` equals ``-(m tau + n)`` for some m, n >= 0."""
    z = np.asarray(z, dtype=complex)
    hit = np.zeros(z.shape, dtype=bool)
    x, y = z.real, z.imag
    cand = (np.abs(y) <= tol) & (x <= tol)
    if not np.any(cand):
        return hit
    xs = -x[cand]
    res = np.zeros(xs.shape, dtype=bool)
    m_max = int(np.max(xs) / tau) + 1
    for m in range(m_max + 1):
        r = xs - m * tau
        res |= (r >= -tol) & (np.abs(r - np.round(r)) <= tol)
    hit[cand] = res
    return hit


@lru_cache(maxsize=256)
def _tail_coefficients(tau: float, rows: int, k_max: int) -> np.ndarray:
    # T_k = sum_{m > rows} zeta(k, m tau) for k = 3..k_max (index k-3)
    a = rows + 1
    c0 = a * tau
    out = np.empty(k_max - 2)
    for i, k in enumerate(range(3, k_max + 1)):
        z = lambda j: special.zeta(k + j, c0)
        s = special.zeta(k - 1, c0) / ((k - 1) * tau) + 0.5 * z(0)
        s += k * tau * z(1) / 12.0
        s -= k * (k + 1) * (k + 2) * tau ** 3 * z(3) / 720.0
        s += k * (k + 1) * (k + 2) * (k + 3) * (k + 4) * tau ** 5 * z(5) / 30240.0
        out[i] = s
    return out


def log_double_gamma(z, tau: float, a: float = 0.0, b: float = 0.0,
                     rows: int = DEFAULT_ROWS, eps: float = 1e-13):
    """Return ``(log G(z;tau), error_estimate)`` for array-like complex ``z``.

    The logarithm is a continuous branch of no particular normalization;
    only ``exp`` of sums of these values is meaningful.  Lattice zeros give
    ``-inf`` real part.
    """
    _check_tau(tau)
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    zmax = float(np.max(np.abs(z))) if z.size else 0.0
    rows = max(int(rows), int(math.ceil(4.0 * zmax / tau)) + 1)
    zeros = on_zero_lattice(z, tau)
    zz = np.where(zeros, 0.5, z)  # placeholder, overwritten below

    out = np.log(zz / tau) + a * zz / tau + b * zz * zz / (2 * tau)
    out += -special.loggamma(1 + zz) - np.euler_gamma * zz + (np.pi ** 2 / 12) * zz * zz
    c = tau * np.arange(1, rows + 1, dtype=float)
    lg_c = special.loggamma(c)
    psi = special.digamma(c)
    tri = special.polygamma(1, c)
    # row sums m = 1..rows, chunked over z to bound memory
    step = max(1, 200_000 // rows)
    for i in range(0, zz.size, step):
        zc = zz[i:i + step, None]
        row = lg_c - special.loggamma(c + zc) + zc * psi + 0.5 * zc * zc * tri
        out[i:i + step] += row.sum(axis=1)

    coef = _tail_coefficients(float(tau), rows, _K_MAX)
    tail = np.zeros_like(zz)
    power = zz ** 3
    last = np.zeros(zz.shape)
    for i, k in enumerate(range(3, _K_MAX + 1)):
        term = (1.0 if k % 2 else -1.0) * power / k * coef[i]
        tail += term
        last = np.abs(term)
        if np.all(last <= eps * 1e-3 * np.maximum(1.0, np.abs(tail))):
            break
        power = power * zz
    out += tail
    ratio = zmax / ((rows + 1) * tau)
    err = float(np.max(last)) * ratio / max(1e-300, 1.0 - ratio) if z.size else 0.0
    out = np.where(zeros, -np.inf + 0j, out)
    return out, err


def double_gamma(z, tau: float, eps: float = 1e-12, a: float = 0.0, b: float = 0.0,
                 rows: int = DEFAULT_ROWS):
    """``G(z; tau)``; exact 0 on the zero lattice ``{-(m tau + n)}``.

    Raises ConvergenceError when the estimated relative error exceeds eps.
    """
    if eps <= 0:
        raise DomainError("eps must be positive")
    scalar = np.ndim(z) == 0
    logg, err = log_double_gamma(z, tau, a=a, b=b, rows=rows, eps=eps)
    if err > eps:
        raise ConvergenceError(f"double gamma tail estimate {err:.3g} exceeds eps={eps:.3g}",
                               achieved=err)
    val = np.exp(logg)
    return complex(val[0]) if scalar else val


def product_tail_bound(z: complex, N: int) -> float:
    """Bound on |log| of the factors omitted by the ``m, n <= N`` truncation.

    Uses ``|log E2(-w)| <= (2/3)|w|^3`` for ``|w| <= 1/2`` and
    ``|m tau + n| >= m + n``; requires ``|z| <= (N+1)/2``.
    """
    r = abs(complex(z))
    if r > (N + 1) / 2:
        return math.inf
    return (2.0 / 3.0) * r ** 3 * (1.0 / N + 0.5 / N ** 2)


def truncated_product(z: complex, tau: float, N: int, a: float = 0.0, b: float = 0.0):
    """Plain truncated double product over ``0 <= m, n <= N``.

    Returns ``(log G_N, tail_bound)`` where ``tail_bound`` bounds
    ``|log G - log G_N|`` (see :func:`product_tail_bound`).
    """
    _check_tau(tau)
    if N < 1 or N > N_MAX:
        raise DomainError(f"N must lie in [1, {N_MAX}]")
    z = complex(z)
    if on_zero_lattice(z, tau):
        return complex(-math.inf), 0.0
    total = np.log(z / tau) + a * z / tau + b * z * z / (2 * tau)
    n = np.arange(N + 1, dtype=float)
    for m in range(N + 1):
        w = m * tau + n
        if m == 0:
            w = w[1:]
        v = z / w
        total += np.sum(np.log1p(v) - v + 0.5 * v * v)
    return complex(total), product_tail_bound(z, N)


def truncated_double_gamma(z: complex, tau: float, eps: float, a: float = 0.0,
                           b: float = 0.0, n_max: int = N_MAX) -> complex:
    """Truncated product with N chosen so the neglected log-tail is below eps."""
    r = abs(complex(z))
    N = max(2 * int(math.ceil(r)) + 1, int(math.ceil((2.0 / 3.0) * r ** 3 / eps)) + 1)
    if N > n_max:
        raise ConvergenceError(
            f"eps={eps:g} needs N={N} > N_max={n_max}",
            achieved=product_tail_bound(z, n_max))
    logg, _ = truncated_product(z, tau, N, a=a, b=b)
    return complex(np.exp(logg))
