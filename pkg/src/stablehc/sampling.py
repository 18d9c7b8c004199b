"""Samplers for stable subordinators and subordinate Brownian motion.

Normalization: Brownian motion has per-coordinate variance ``2t`` and the
isotropic alpha-stable process ``X_t = W(S_t)`` has characteristic function
``exp(-t |xi|^alpha)``, where ``S`` is an ``alpha/2``-stable subordinator with
``E exp(-lam S_t) = exp(-t lam^(alpha/2))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .errors import DomainError
from .rng import as_generator
from .specfun.elementary import StableParams


def _check_index(index):
    if not (0.0 < index < 1.0):
        raise DomainError(f"subordinator index must lie in (0, 1), got {index}")


def unit_subordinator(index: float, size, gen: np.random.Generator) -> np.ndarray:
    """Draws of ``S_1`` with ``E exp(-lam S_1) = exp(-lam^index)`` (Kanter's method)."""
    g = index
    u = 1.0 - gen.random(size)  # (0, 1]
    e = gen.standard_exponential(size)
    pu = np.pi * u
    a = (np.sin(g * pu) / np.sin(pu)) ** (1.0 / (1.0 - g)) * np.sin((1.0 - g) * pu) / np.sin(g * pu)
    return (a / e) ** ((1.0 - g) / g)


def sample_subordinator(index: float, t: float, rng, size=None):
    """Exact draw(s) of ``S_t`` for the ``index``-stable subordinator."""
    _check_index(index)
    if t < 0:
        raise DomainError("t must be nonnegative")
    gen = as_generator(rng)
    if t == 0:
        return 0.0 if size is None else np.zeros(size)
    s = t ** (1.0 / index) * unit_subordinator(index, 1 if size is None else size, gen)
    return float(s[0]) if size is None else s


def stable_step(alpha: float, dt: float, m: int, d: int, gen: np.random.Generator):
    """One step of ``m`` independent paths: subordinator increments and displacements.

    Returns ``(dS, dX)`` with ``dS`` of shape (m,) and ``dX`` of shape (m, d).
    For ``alpha = 2`` the clock is deterministic, ``dS = dt``.
    """
    if alpha == 2.0:
        ds = np.full(m, dt)
    else:
        ds = dt ** (2.0 / alpha) * unit_subordinator(alpha / 2.0, m, gen)
    dx = np.sqrt(2.0 * ds)[:, None] * gen.standard_normal((m, d))
    return ds, dx


def _params(params) -> StableParams:
    return params if isinstance(params, StableParams) else StableParams(float(params))


def sample_stable_point(d: int, params, t: float, start, rng, size=None):
    """Exact draw(s) of ``X_t`` started at ``start``: ``start + sqrt(2 S_t) Z``."""
    p = _params(params)
    if d < 1:
        raise DomainError("dimension must be positive")
    if t < 0:
        raise DomainError("t must be nonnegative")
    start = np.broadcast_to(np.asarray(start, dtype=float), (d,))
    gen = as_generator(rng)
    m = 1 if size is None else int(size)
    if t == 0:
        out = np.tile(start, (m, 1))
    else:
        _, dx = stable_step(p.alpha, t, m, d, gen)
        out = start + dx
    return out[0] if size is None else out


@dataclass(frozen=True)
class PathSkeleton:
    """A path of ``X`` observed on a uniform time grid.

    Attributes
    ----------
    times : ndarray, shape (n+1,)
    subordinator_values : ndarray, shape (n+1,)
        ``S`` at the grid times, starting at 0.
    positions : ndarray, shape (n+1, d)
        ``W(S(t_i))``; ``positions[0]`` is the start point.
    running_max_1d : ndarray or None
        Running maximum of each coordinate along the grid.
    """

    times: np.ndarray
    subordinator_values: np.ndarray
    positions: np.ndarray
    running_max_1d: Optional[np.ndarray] = None

    @property
    def start(self) -> np.ndarray:
        return self.positions[0]

    def coarsen(self, factor: int) -> "PathSkeleton":
        """Sub-skeleton on every ``factor``-th grid point."""
        sl = slice(None, None, factor)
        pos = self.positions[sl]
        return PathSkeleton(self.times[sl], self.subordinator_values[sl], pos,
                            np.maximum.accumulate(pos, axis=0))


def sample_skeletons(d: int, params, t: float, n_steps: int, start, rng, size: int):
    """Batch of skeletons as arrays ``(S, X)`` of shapes (size, n+1) and (size, n+1, d)."""
    p = _params(params)
    if n_steps < 1:
        raise DomainError("n_steps must be at least 1")
    if t <= 0:
        raise DomainError("t must be positive")
    gen = as_generator(rng)
    start = np.broadcast_to(np.asarray(start, dtype=float), (d,))
    S = np.zeros((size, n_steps + 1))
    X = np.empty((size, n_steps + 1, d))
    X[:, 0] = start
    dt = t / n_steps
    for i in range(n_steps):
        ds, dx = stable_step(p.alpha, dt, size, d, gen)
        S[:, i + 1] = S[:, i] + ds
        X[:, i + 1] = X[:, i] + dx
    return S, X


def sample_skeleton(d: int, params, t: float, n_steps: int, start, rng) -> PathSkeleton:
    """One skeleton on the grid ``{i t / n_steps}`` with exact increments."""
    S, X = sample_skeletons(d, params, t, n_steps, start, rng, 1)
    times = np.linspace(0.0, t, n_steps + 1)
    return PathSkeleton(times, S[0], X[0], np.maximum.accumulate(X[0], axis=0))


class SupDraw(NamedTuple):
    """Endpoint and grid extrema of 1-d paths.

    ``sup_approx``/``inf_approx`` use the ``n_steps`` grid; ``sup_fine`` and
    ``inf_fine`` use the refined grid that contains it.
    """

    endpoint: np.ndarray
    sup_approx: np.ndarray
    inf_approx: np.ndarray
    sup_fine: np.ndarray
    inf_fine: np.ndarray


def sup_walk(alpha: float, t: float, n_steps: int, refine: int, m: int,
             gen: np.random.Generator) -> SupDraw:
    """Simulate ``m`` paths of the 1-d symmetric process on ``n_steps*refine`` steps."""
    n_fine = n_steps * refine
    dt = t / n_fine
    y = np.zeros(m)
    hi_c = np.zeros(m)
    lo_c = np.zeros(m)
    hi_f = np.zeros(m)
    lo_f = np.zeros(m)
    for i in range(1, n_fine + 1):
        _, dx = stable_step(alpha, dt, m, 1, gen)
        y += dx[:, 0]
        np.maximum(hi_f, y, out=hi_f)
        np.minimum(lo_f, y, out=lo_f)
        if i % refine == 0:
            np.maximum(hi_c, y, out=hi_c)
            np.minimum(lo_c, y, out=lo_c)
    return SupDraw(y, hi_c, lo_c, hi_f, lo_f)


def sample_sup_1d(params, t: float, n_steps: int, rng, size=None, refine: int = 1) -> SupDraw:
    """Endpoint, grid supremum and grid infimum of the 1-d symmetric process.

    The grid maximum is a lower bound for the true running supremum.  With
    ``refine > 1`` the path is simulated on a grid ``refine`` times finer and
    the coarse extrema are taken over the embedded coarse grid.
    """
    p = _params(params)
    if n_steps < 1 or refine < 1:
        raise DomainError("n_steps and refine must be positive")
    if t <= 0:
        raise DomainError("t must be positive")
    gen = as_generator(rng)
    m = 1 if size is None else int(size)
    out = sup_walk(p.alpha, t, n_steps, refine, m, gen)
    if size is None:
        return SupDraw(*(float(v[0]) for v in out))
    return out


def refinement_ratio(alpha: float, refine: int) -> float:
    """Bias reduction factor of grid extrema under ``refine``-fold refinement.

    The grid-maximum bias decays like ``n^(-1/alpha)``.
    """
    return refine ** (1.0 / alpha)


def extrapolate(coarse, fine, alpha: float, refine: int = 4):
    """Two-level Richardson extrapolation assuming bias ``~ n^(-1/alpha)``."""
    k = refinement_ratio(alpha, refine)
    return (k * np.asarray(fine) - np.asarray(coarse)) / (k - 1.0)


def brownian_exit_prob_ball(radius: float, t: float, d: int, n: int, n_steps: int, rng):
    """``P(tau_B(0,R) < t)`` for Brownian motion (variance 2t) from the centre.

    Grid walk plus a bridge-crossing correction against the tangent plane:
    between two interior grid points at depths ``a``, ``b`` the bridge exits
    with probability ``exp(-a b / dt)``.  Returns ``(estimate, stderr)``.
    """
    gen = as_generator(rng)
    dt = t / n_steps
    x = np.zeros((n, d))
    alive = np.ones(n)
    depth = np.full(n, float(radius))
    for _ in range(n_steps):
        x += math.sqrt(2 * dt) * gen.standard_normal((n, d))
        new = radius - np.linalg.norm(x, axis=1)
        cross = np.where((depth > 0) & (new > 0), np.exp(-np.maximum(depth, 0) * np.maximum(new, 0) / dt), 1.0)
        alive *= np.where(new > 0, 1.0 - cross, 0.0)
        depth = new
    p = 1.0 - alive
    return float(p.mean()), float(p.std(ddof=1) / math.sqrt(n))
