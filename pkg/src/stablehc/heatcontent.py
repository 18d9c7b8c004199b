"""Monte Carlo estimators of heat losses and related path functionals.

Heat losses are ``|D|`` minus a heat content:

* regular:   ``int_D P_x(X_t not in D) dx``
* spectral:  ``int_D P_x(tau_D <= t) dx``
* skbm:      ``int_D P_x(tau_D^BM <= S_t) dx`` (subordinate killed Brownian motion)
* generalized-skbm: ``int_D P_x(tau_D^(alpha) <= T_t) dx`` with ``T`` a
  ``1/alpha``-stable subordinator.

Start points are drawn uniformly in D (``method="uniform"``), from a
boundary-layer density with importance weights (``"stratified"``), or
integrated out exactly where the geometry allows it (``"conditional"``).
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from functools import partial
from typing import Dict, Optional, Tuple

import numpy as np

from .errors import DomainError
from .geometry import Ball, Domain, HalfSpace, Interval
from .rng import DEFAULT_CHUNK, Moments, RngStream, map_chunks, merge_all
from .sampling import (extrapolate, refinement_ratio, stable_step, sup_walk,
                       unit_subordinator)
from .specfun.elementary import StableParams

KINDS = ("regular", "spectral", "skbm", "generalized-skbm")
UNBIASED = "unbiased"
UNDER = "underestimates-loss"


@dataclass(frozen=True)
class HeatLossEstimate:
    """Monte Carlo heat-loss estimate.

    For path-simulated kinds ``mean`` is the two-level extrapolation and
    ``resolutions`` holds the raw grid estimates ``(n_steps, mean, stderr)``
    at the coarse and the refined grid.
    """

    kind: str
    t: float
    alpha: float
    mean: float
    stderr: float
    n_samples: int
    n_steps: int
    bias_direction: str
    method: str = "uniform"
    resolutions: Tuple[Tuple[int, float, float], ...] = field(default=())
    seed: Optional[int] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown heat-loss kind {self.kind!r}")
        if self.stderr < 0:
            raise DomainError("stderr must be nonnegative")

    @property
    def raw_fine(self) -> Tuple[int, float, float]:
        return self.resolutions[-1] if self.resolutions else (self.n_steps, self.mean, self.stderr)

    def as_record(self) -> Dict[str, object]:
        rec = asdict(self)
        rec.pop("resolutions")
        for i, (ns, m, s) in enumerate(self.resolutions):
            rec[f"raw{i}_n_steps"], rec[f"raw{i}_mean"], rec[f"raw{i}_stderr"] = ns, m, s
        return rec


def _alpha(params) -> float:
    return params.alpha if isinstance(params, StableParams) else StableParams(float(params)).alpha


def _check_t(t):
    if not t > 0:
        raise DomainError("t must be positive")


def _check_domain(D: Domain):
    if isinstance(D, HalfSpace) or not math.isfinite(D.volume):
        raise DomainError("heat losses need a domain of finite volume")


# ------------------------------------------------------------ start points

def boundary_layer_starts(D: Domain, alpha: float, t: float, m: int, gen,
                          power: Optional[float] = None):
    """Start points with depth density proportional to ``(q + r0)^(-power)``.

    ``r0 = t^(1/alpha)`` and ``power`` defaults to ``alpha/2``.  Returns
    points and weights ``|level set|/density`` so that ``mean(w f(x))``
    estimates ``int_D f``.
    """
    k = alpha / 2.0 if power is None else float(power)
    r0 = t ** (1.0 / alpha)
    Q = D.max_depth
    u = gen.random(m)
    if abs(k - 1.0) < 1e-12:
        span = math.log1p(Q / r0)
        q = r0 * np.expm1(u * span)
        dens = 1.0 / ((q + r0) * span)
    else:
        b = 1.0 - k
        lo, hi = r0 ** b, (Q + r0) ** b
        q = (lo + (hi - lo) * u) ** (1.0 / b) - r0
        dens = b * (q + r0) ** (-k) / (hi - lo)
    q = np.clip(q, 0.0, Q)
    return D.sample_level(q, gen), D.level_measure(q) / dens


def _starts(D, alpha, t, m, gen, method):
    if method == "uniform":
        return D.uniform_sample(gen, m), np.full(m, D.volume)
    if method == "stratified":
        return boundary_layer_starts(D, alpha, t, m, gen)
    raise DomainError(f"unknown start-point method {method!r}")


# ----------------------------------------------------------------- regular

def _regular_chunk(D, alpha, t, method, gen, m):
    d = D.dim
    if method == "conditional":
        _, dx = stable_step(alpha, t, m, d, gen)
        v = D.covariogram_loss(np.linalg.norm(dx, axis=1))
        return Moments.of(v)
    x, w = _starts(D, alpha, t, m, gen, method)
    _, dx = stable_step(alpha, t, m, d, gen)
    return Moments.of(w * (D.signed_distance(x + dx) <= 0))


def regular_heat_loss(D: Domain, params, t: float, n: int, rng: RngStream,
                      method: str = "uniform", workers: int = 1,
                      chunk_size: int = DEFAULT_CHUNK) -> HeatLossEstimate:
    """``|D| - H_D(t)`` from exact one-shot draws of ``X_t``.

    ``method="conditional"`` integrates the start point out through the
    covariogram ``|D \\ (D - y)|`` (intervals and balls).
    """
    _check_domain(D)
    _check_t(t)
    a = _alpha(params)
    if method == "conditional":
        D.covariogram_loss(1.0)  # raises for shapes without a covariogram
    mom = merge_all(map_chunks(partial(_regular_chunk, D, a, t, method), n, rng,
                               chunk_size, workers))
    return HeatLossEstimate("regular", t, a, float(mom.mean[0]), float(mom.stderr[0]), n, 0,
                            UNBIASED, method, (), rng.seed)


# ---------------------------------------------------------------- path walk

def exit_walk(D: Domain, alpha: float, t, n_steps: int, refine: int, x0: np.ndarray, gen,
              bridge: bool = False):
    """Walk paths from ``x0`` and record exit information.

    ``t`` may be an array (one horizon per path).  Returns a dict with
    boolean arrays ``end_out``, ``exit_coarse`` (grid of n_steps points),
    ``exit_fine`` (refined grid) and, with ``bridge=True``, ``bm_exit``:
    exit of the Brownian path ``W`` before ``S_t``, detected on the fine
    skeleton plus a bridge crossing test against the tangent plane.
    """
    m, d = x0.shape
    n_fine = n_steps * refine
    dt = np.asarray(t, dtype=float) / n_fine
    x = x0.copy()
    out_c = np.zeros(m, dtype=bool)
    out_f = np.zeros(m, dtype=bool)
    bm = np.zeros(m, dtype=bool) if bridge else None
    depth = D.signed_distance(x)
    for i in range(1, n_fine + 1):
        ds, dx = stable_step(alpha, dt, m, d, gen)
        x += dx
        new = D.signed_distance(x)
        outside = new <= 0
        out_f |= outside
        if i % refine == 0:
            out_c |= outside
        if bridge:
            u = gen.random(m)
            with np.errstate(divide="ignore", invalid="ignore"):
                p = np.exp(-np.maximum(depth, 0.0) * np.maximum(new, 0.0) / ds)
            bm |= outside | (u < p)
            depth = new
    return {"end_out": outside, "exit_coarse": out_c, "exit_fine": out_f, "bm_exit": bm}


def _spectral_chunk(D, alpha, t, n_steps, refine, method, gen, m):
    k = refinement_ratio(alpha, refine)
    if method == "conditional":
        # 1-d interval: measure of start points whose path leaves (a, b)
        L = D.volume
        sd = sup_walk(alpha, t, n_steps, refine, m, gen)
        vc = np.minimum(L, sd.sup_approx - sd.inf_approx)
        vf = np.minimum(L, sd.sup_fine - sd.inf_fine)
    elif method == "control":
        # excursions that leave D and are back inside at time t
        x, w = boundary_layer_starts(D, alpha, t, m, gen, power=alpha)
        r = exit_walk(D, alpha, t, n_steps, refine, x, gen)
        vc = w * (r["exit_coarse"] & ~r["end_out"])
        vf = w * (r["exit_fine"] & ~r["end_out"])
    else:
        x, w = _starts(D, alpha, t, m, gen, method)
        r = exit_walk(D, alpha, t, n_steps, refine, x, gen)
        vc = w * r["exit_coarse"]
        vf = w * r["exit_fine"]
    ve = (k * vf - vc) / (k - 1.0)
    return Moments.of(np.stack([vc, vf, ve], axis=1))


def spectral_heat_loss(D: Domain, params, t: float, n: int, n_steps: int, rng: RngStream,
                       method: str = "uniform", refine: int = 4, workers: int = 1,
                       chunk_size: int = DEFAULT_CHUNK) -> HeatLossEstimate:
    """``|D| - Q_D(t)`` by skeleton exit detection at two resolutions.

    Exit is declared when a skeleton position lies outside D, so each raw
    figure underestimates the loss.  The headline mean extrapolates the
    ``n_steps`` and ``refine*n_steps`` figures assuming an ``n^(-1/alpha)``
    bias.  ``method="conditional"`` (intervals only) integrates the start
    point out: the exit set has measure ``min(L, max - min)`` of the path.
    ``method="control"`` (intervals and balls) writes the loss as the
    regular loss, integrated exactly through the covariogram, plus the
    probability of leaving D and returning by time t, sampled near the
    boundary.
    """
    _check_domain(D)
    _check_t(t)
    if n_steps < 1 or refine < 2:
        raise DomainError("need n_steps >= 1 and refine >= 2")
    a = _alpha(params)
    if method == "conditional" and not isinstance(D, Interval):
        raise DomainError("conditional spectral estimator needs an interval")
    mom = merge_all(map_chunks(partial(_spectral_chunk, D, a, t, n_steps, refine, method),
                               n, rng, chunk_size, workers))
    mean, se = mom.mean, mom.stderr
    if method == "control":
        reg = regular_heat_loss(D, a, t, n, RngStream(rng.seed, rng.stream_id + (1 << 32)),
                                "conditional", workers, chunk_size)
        mean = mean + reg.mean
        se = np.sqrt(se ** 2 + reg.stderr ** 2)
    res = ((n_steps, float(mean[0]), float(se[0])),
           (n_steps * refine, float(mean[1]), float(se[1])))
    return HeatLossEstimate("spectral", t, a, float(min(mean[2], D.volume)), float(se[2]), n,
                            n_steps, UNDER, method, res, rng.seed)


# -------------------------------------------------------------------- skbm

def interval_survival(x, s, L: float):
    """``P_x(tau > s)`` for Brownian motion (variance 2s) killed outside (0, L).

    Sine series for large ``s/L^2`` and the method of images otherwise.
    """
    x = np.asarray(x, dtype=float)
    s = np.asarray(s, dtype=float)
    x, s = np.broadcast_arrays(x, s)
    out = np.empty(x.shape)
    big = s / L ** 2 > 0.02
    if np.any(big):
        k = np.arange(1, 200, 2)[None, :]
        xs, ss = x[big][:, None], s[big][:, None]
        out[big] = np.sum(4 / (k * np.pi) * np.sin(k * np.pi * xs / L)
                          * np.exp(-(k * np.pi / L) ** 2 * ss), axis=1)
    small = ~big
    if np.any(small):
        from scipy.special import ndtr
        xs, sg = x[small][:, None], np.sqrt(2 * s[small])[:, None]
        sg = np.maximum(sg, 1e-300)
        nn = np.arange(-4, 5)[None, :] * 2 * L
        # density of the killed process: sum_n g(y - x + 2nL) - g(y + x + 2nL)
        val = (ndtr((L - xs + nn) / sg) - ndtr((-xs + nn) / sg)
               - ndtr((L + xs + nn) / sg) + ndtr((xs + nn) / sg))
        out[small] = np.sum(val, axis=1)
    return np.clip(out, 0.0, 1.0)


def _bm_walk_loss(D, x, S, n_steps, gen):
    # Brownian motion on [0, S] with n_steps steps and bridge correction;
    # returns the conditional exit probability given the skeleton
    m, d = x.shape
    dt = S / n_steps
    surv = np.ones(m)
    two_sided = isinstance(D, Interval)
    if two_sided:
        da, db = x[:, 0] - D.a, D.b - x[:, 0]
    depth = D.signed_distance(x)
    x = x.copy()
    for _ in range(n_steps):
        x += np.sqrt(2 * dt)[:, None] * gen.standard_normal((m, d))
        new = D.signed_distance(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            if two_sided:
                na, nb = x[:, 0] - D.a, D.b - x[:, 0]
                stay = (1 - np.exp(-np.maximum(da, 0) * np.maximum(na, 0) / dt)) * \
                       (1 - np.exp(-np.maximum(db, 0) * np.maximum(nb, 0) / dt))
                da, db = na, nb
            else:
                stay = 1 - np.exp(-np.maximum(depth, 0) * np.maximum(new, 0) / dt)
        surv *= np.where(new > 0, stay, 0.0)
        depth = new
    return 1.0 - surv


def _skbm_chunk(D, alpha, t, inner_method, n_steps, gen, m):
    x = D.uniform_sample(gen, m)
    S = t ** (2.0 / alpha) * unit_subordinator(alpha / 2.0, m, gen) if alpha < 2 else np.full(m, t)
    if inner_method == "interval-series":
        p = 1.0 - interval_survival(x[:, 0] - D.a, S, D.volume)
    else:
        p = _bm_walk_loss(D, x, S, n_steps, gen)
    return Moments.of(D.volume * p)


def skbm_heat_loss(D: Domain, params, t: float, n: int, inner_method: str, rng: RngStream,
                   n_steps: int = 256, workers: int = 1,
                   chunk_size: int = DEFAULT_CHUNK) -> HeatLossEstimate:
    """``|D| - Qtilde_D(t)``: Brownian motion killed on leaving D, run to time ``S_t``.

    ``inner_method="bm-path"`` walks Brownian motion on ``n_steps`` steps of
    ``[0, S_t]`` with a bridge-crossing correction; ``"interval-series"``
    (d = 1) uses the exact killed survival probability.
    """
    _check_domain(D)
    _check_t(t)
    a = _alpha(params)
    if inner_method not in ("bm-path", "interval-series"):
        raise DomainError(f"unknown inner method {inner_method!r}")
    if inner_method == "interval-series" and not isinstance(D, Interval):
        raise DomainError("interval-series needs a 1-d interval")
    mom = merge_all(map_chunks(partial(_skbm_chunk, D, a, t, inner_method, n_steps),
                               n, rng, chunk_size, workers))
    steps = 0 if inner_method == "interval-series" else n_steps
    bias = UNBIASED if inner_method == "interval-series" else UNDER
    return HeatLossEstimate("skbm", t, a, float(mom.mean[0]), float(mom.stderr[0]), n, steps,
                            bias, inner_method, (), rng.seed)


# ---------------------------------------------------------- coupled chain

def coupled_indicators(D: Domain, params, t: float, n: int, n_steps: int, rng: RngStream,
                       refine: int = 1) -> Dict[str, np.ndarray]:
    """Indicators of the three loss events on common paths.

    ``regular``: endpoint outside D; ``spectral``: skeleton exit;
    ``skbm``: Brownian exit before ``S_t`` detected on the same Brownian
    skeleton.  Pathwise ``regular <= spectral <= skbm``.
    """
    _check_domain(D)
    a = _alpha(params)
    gen = rng.generator(0)
    x = D.uniform_sample(gen, n)
    r = exit_walk(D, a, t, n_steps, refine, x, gen, bridge=True)
    return {"regular": r["end_out"], "spectral": r["exit_fine"],
            "spectral_coarse": r["exit_coarse"], "skbm": r["bm_exit"], "start": x}


# ------------------------------------------------------- generalized skbm

def _gskbm_chunk(D, alpha, t, n_steps, refine, method, gen, m):
    k = refinement_ratio(alpha, refine)
    x, w = _starts(D, 1.0, t, m, gen, method)
    T = t ** alpha * unit_subordinator(1.0 / alpha, m, gen)
    r = exit_walk(D, alpha, T, n_steps, refine, x, gen)
    vc = w * r["exit_coarse"]
    vf = w * r["exit_fine"]
    return Moments.of(np.stack([vc, vf, (k * vf - vc) / (k - 1.0)], axis=1))


def generalized_skbm_loss(D: Domain, alpha: float, t: float, n: int, n_steps: int,
                          rng: RngStream, method: str = "uniform", refine: int = 4,
                          workers: int = 1, chunk_size: int = DEFAULT_CHUNK) -> HeatLossEstimate:
    """``|D| - Qtilde^(alpha,beta)_D(t)`` with ``beta = 2/alpha``.

    Draws ``T_t`` from the ``beta/2``-stable subordinator and detects exit of
    the alpha-stable path on ``[0, T_t]``.  ``X^(alpha)(T_t)`` is Cauchy, so
    this loss dominates the Cauchy spectral loss.
    """
    _check_domain(D)
    _check_t(t)
    if not (1.0 < alpha < 2.0):
        raise DomainError("generalized skbm needs alpha in (1, 2)")
    mom = merge_all(map_chunks(partial(_gskbm_chunk, D, alpha, t, n_steps, refine, method),
                               n, rng, chunk_size, workers))
    mean, se = mom.mean, mom.stderr
    res = ((n_steps, float(mean[0]), float(se[0])),
           (n_steps * refine, float(mean[1]), float(se[1])))
    return HeatLossEstimate("generalized-skbm", t, alpha, float(min(mean[2], D.volume)),
                            float(se[2]), n, n_steps, UNDER, method, res, rng.seed)


# ------------------------------------------------------ 1-d functionals

@dataclass(frozen=True)
class JointProb:
    """``P(sup Y > u, Y_1 < u)`` at two grid resolutions plus extrapolation."""

    estimate: float
    stderr: float
    coarse: float
    fine: float
    n: int


def _joint_chunk(alpha, us, n_steps, refine, gen, m):
    k = refinement_ratio(alpha, refine)
    sd = sup_walk(alpha, 1.0, n_steps, refine, m, gen)
    cols = []
    for u in us:
        c = (sd.sup_approx > u) & (sd.endpoint < u)
        f = (sd.sup_fine > u) & (sd.endpoint < u)
        cols += [c, f, (k * f - c) / (k - 1.0)]
    return Moments.of(np.stack(cols, axis=1).astype(float))


def joint_sup_prob(params, u, n: int, n_steps: int, rng: RngStream, refine: int = 4,
                   workers: int = 1, chunk_size: int = DEFAULT_CHUNK):
    """MC estimate of ``P(Ybar_1 > u, Y_1 < u)`` for one u or a sequence of u.

    All u share the same paths.  Returns a :class:`JointProb` (or a list).
    """
    a = _alpha(params)
    if not (1.0 < a < 2.0):
        raise DomainError("joint_sup_prob needs alpha in (1, 2)")
    us = np.atleast_1d(np.asarray(u, dtype=float))
    if np.any(us < 0):
        raise DomainError("u must be nonnegative")
    mom = merge_all(map_chunks(partial(_joint_chunk, a, tuple(us), n_steps, refine),
                               n, rng, chunk_size, workers))
    out = [JointProb(float(mom.mean[3 * i + 2]), float(mom.stderr[3 * i + 2]),
                     float(mom.mean[3 * i]), float(mom.mean[3 * i + 1]), n)
           for i in range(len(us))]
    return out[0] if np.ndim(u) == 0 else out


def _trunc_chunk(beta, Ks, gen, m):
    s = unit_subordinator(beta / 2.0, m, gen)
    g = s ** (beta / 2.0)
    return Moments.of(np.stack([np.where(s < K, g, 0.0) for K in Ks], axis=1))


def truncated_subordinator_moment(beta: float, delta: float, t, n: int, rng: RngStream,
                                  workers: int = 1, chunk_size: int = 1 << 18):
    """``E[S_1^(beta/2); S_1 < delta t^(-2/beta)] / ln(1/t)`` and its stderr.

    ``S`` is the ``beta/2``-stable subordinator; the ratio tends to
    ``1/Gamma(1 - beta/2)`` as ``t -> 0``.  A sequence of ``t`` shares one
    set of draws and gives arrays.
    """
    if not (1.0 < beta < 2.0):
        raise DomainError("beta must lie in (1, 2)")
    if delta <= 0:
        raise DomainError("delta must be positive")
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any((ts <= 0) | (ts >= math.exp(-1))):
        raise DomainError("t must lie in (0, 1/e)")
    Ks = tuple(delta * ts ** (-2.0 / beta))
    mom = merge_all(map_chunks(partial(_trunc_chunk, beta, Ks), n, rng, chunk_size, workers))
    lg = np.log(1.0 / ts)
    ratio, se = mom.mean / lg, mom.stderr / lg
    if np.ndim(t) == 0:
        return float(ratio[0]), float(se[0])
    return ratio, se


@dataclass(frozen=True)
class HalfSpaceReport:
    """Outcome of the half-space exit identity check on simulated skeletons."""

    n: int
    violations: int
    exit_frequency: float
    sup_frequency: float
    d: int

    @property
    def passed(self) -> bool:
        return self.violations == 0


def halfspace_exit_identity_check(alpha: float, r: float, t: float, n: int, n_steps: int,
                                  rng: RngStream, d: int = 2) -> HalfSpaceReport:
    """Compare half-space exit with the supremum event of the projected path.

    From ``x = (0, ..., 0, r)`` the skeleton leaves ``{x_d > 0}`` exactly when
    the grid maximum of ``Y = r - X_d`` reaches ``r``.  Positions are formed
    as start plus cumulative displacement so both sides see the same numbers.
    """
    if d < 2:
        raise DomainError("the half-space check needs d >= 2")
    if r <= 0:
        raise DomainError("r must be positive")
    H = HalfSpace(d)
    gen = rng.generator(0)
    start = np.zeros(d)
    start[-1] = r
    disp = np.zeros((n, d))
    exit_h = np.zeros(n, dtype=bool)
    ymax = np.zeros(n)
    dt = t / n_steps
    for _ in range(n_steps):
        _, dx = stable_step(alpha, dt, n, d, gen)
        disp += dx
        exit_h |= H.signed_distance(start + disp) <= 0
        np.maximum(ymax, -disp[:, -1], out=ymax)
    ev = ymax >= r
    return HalfSpaceReport(n, int(np.sum(exit_h != ev)), float(exit_h.mean()), float(ev.mean()), d)
