"""Small-time limits of heat losses: scales, predicted constants and ladder fits."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import special

from .errors import DomainError
from .geometry import Domain, frac_perimeter
from .heatcontent import (HeatLossEstimate, regular_heat_loss, skbm_heat_loss,
                          spectral_heat_loss)
from .rng import RngStream
from .specfun.elementary import StableParams
from .specfun.mellin import MellinEvaluator, mellin_sup

Z95 = 1.959963984540054


def _alpha(params) -> float:
    return params.alpha if isinstance(params, StableParams) else StableParams(float(params)).alpha


def regime(alpha: float) -> str:
    if alpha > 1.0:
        return "alpha>1"
    if alpha == 1.0:
        return "alpha=1"
    return "alpha<1"


def f_alpha(t, alpha: float):
    """Leading small-time scale: ``t^(1/alpha)``, ``t ln(1/t)`` or ``t``.

    Defined for ``t`` in ``(0, 1/e]``.
    """
    tt = np.asarray(t, dtype=float)
    if np.any((tt <= 0) | (tt > math.exp(-1) * (1 + 1e-15))):
        raise DomainError("t must lie in (0, 1/e]")
    if not (0.0 < alpha < 2.0):
        raise DomainError("alpha must lie in (0, 2)")
    if alpha > 1.0:
        out = tt ** (1.0 / alpha)
    elif alpha == 1.0:
        out = tt * np.log(1.0 / tt)
    else:
        out = tt.copy()
    return float(out) if out.ndim == 0 else out


def default_sub_exponent(alpha: float) -> float:
    """Exponent of the nuisance term ``t^p``: 1 for alpha >= 1, else ``1 + min(alpha, 1-alpha)``."""
    return 1.0 if alpha >= 1.0 else 1.0 + min(alpha, 1.0 - alpha)


def predicted_coefficient(D: Domain, params, ev: Optional[MellinEvaluator] = None,
                          eps: float = 1e-8) -> float:
    """Limit of ``loss(t)/f_alpha(t)``.

    ``|dD| E[Ybar_1]`` for alpha in (1, 2), ``|dD|/pi`` at alpha = 1 and
    ``Per_alpha(D)`` for alpha in (0, 1).  Intervals count two boundary points.
    """
    a = _alpha(params)
    if 1.0 < a < 2.0:
        if ev is None:
            raise DomainError("alpha in (1, 2) needs a MellinEvaluator")
        if abs(ev.alpha - a) > 1e-14:
            raise DomainError("evaluator built for a different alpha")
        return D.boundary_measure * float(mellin_sup(2.0, ev).real)
    if a == 1.0:
        return D.boundary_measure / math.pi
    if a < 1.0:
        return frac_perimeter(D, a, eps)
    raise DomainError("no small-time prediction for alpha = 2 in this toolkit")


@dataclass(frozen=True)
class AsymptoticFit:
    """Weighted least-squares fit of ``loss = c1 f_alpha(t) + c2 t^p``."""

    regime: str
    ladder: Tuple[Tuple[float, float, float], ...]
    model: str
    c1: float
    c1_stderr: float
    c1_ci: Tuple[float, float]
    c2: float
    c2_stderr: float
    goodness: float
    sub_exponent: float

    @property
    def ci_halfwidth(self) -> float:
        return 0.5 * (self.c1_ci[1] - self.c1_ci[0])


def _check_ladder(t):
    if len(t) < 5:
        raise DomainError("ladder needs at least 5 points")
    if math.log10(t.max() / t.min()) < 2.0 - 1e-9:
        raise DomainError("ladder must span at least two decades of t")


def fit_limit_coefficient(ladder: Sequence, alpha: float,
                          sub_exponent: Optional[float] = None,
                          leading_only: bool = False) -> AsymptoticFit:
    """Fit the leading coefficient from ``(t, mean, stderr)`` triples.

    Weights are ``1/stderr^2``; if any stderr is zero the fit is unweighted.
    ``leading_only=True`` drops the nuisance term (used to study its effect).
    """
    rows = [(float(r.t), float(r.mean), float(r.stderr)) if isinstance(r, HeatLossEstimate)
            else tuple(map(float, r)) for r in ladder]
    arr = np.array(rows)
    t, y, s = arr[:, 0], arr[:, 1], arr[:, 2]
    _check_ladder(t)
    p = default_sub_exponent(alpha) if sub_exponent is None else float(sub_exponent)
    cols = [f_alpha(t, alpha)] if leading_only else [f_alpha(t, alpha), t ** p]
    X = np.stack(cols, axis=1)
    w = np.ones_like(s) if np.any(s <= 0) else 1.0 / s
    scale = np.abs(X).max(axis=0)
    Xs = X / scale * w[:, None]
    ys = y * w
    cond = np.linalg.cond(Xs)
    if not np.isfinite(cond) or cond > 1e8:
        raise DomainError(f"ill-conditioned ladder design (condition number {cond:.3g})")
    beta, *_ = np.linalg.lstsq(Xs, ys, rcond=None)
    cov = np.linalg.inv(Xs.T @ Xs)
    resid = ys - Xs @ beta
    dof = max(len(y) - X.shape[1], 1)
    chi2 = float(resid @ resid) / dof
    if np.any(s <= 0):
        cov = cov * chi2  # scale by residual variance when no stderrs are given
    coef = beta / scale
    se = np.sqrt(np.diag(cov)) / scale
    c1, c1s = float(coef[0]), float(se[0])
    c2 = 0.0 if leading_only else float(coef[1])
    c2s = 0.0 if leading_only else float(se[1])
    model = "c1*f_alpha(t)" if leading_only else f"c1*f_alpha(t) + c2*t^{p:g}"
    return AsymptoticFit(regime(alpha), tuple(map(tuple, arr)), model, c1, c1s,
                         (c1 - Z95 * c1s, c1 + Z95 * c1s), c2, c2s, chi2, p)


def geometric_ladder(t0: float, J: int, ratio: float = 2.0) -> np.ndarray:
    t = t0 * ratio ** (-np.arange(J + 1, dtype=float))
    if np.any((t <= 0) | (t >= math.exp(-1))):
        raise DomainError("t-ladder must lie inside (0, 1/e)")
    return t


def default_ladder(alpha: float) -> np.ndarray:
    if alpha == 1.0:
        return geometric_ladder(1e-3, 10)
    return geometric_ladder(1e-2, 8)


def within_tolerance(fit: AsymptoticFit, predicted: float, rel_tol: float) -> Tuple[bool, float]:
    """Acceptance rule: ``|c1 - pred| <= max(rel_tol*|pred|, 3*CI half-width)``."""
    tol = max(rel_tol * abs(predicted), 3.0 * fit.ci_halfwidth)
    return abs(fit.c1 - predicted) <= tol, tol


def truncated_moment_expansion(beta: float, delta: float, t: float) -> float:
    """Two-term expansion of ``E[S^g; S < delta t^(-1/g)]/ln(1/t)`` with ``g = beta/2``.

    From ``E[S^q] = Gamma(1 - q/g)/Gamma(1 - q)`` near its pole at ``q = g``:
    ``E[S^g; S < K] = g ln K/Gamma(1-g) - (euler_gamma + g psi(1-g))/Gamma(1-g) + o(1)``.
    """
    g = beta / 2.0
    G = math.gamma(1.0 - g)
    lnK = math.log(delta) + math.log(1.0 / t) / g
    c0 = -(np.euler_gamma + g * special.digamma(1.0 - g)) / G
    return (g * lnK / G + c0) / math.log(1.0 / t)


# ---------------------------------------------------------------- pipeline

@dataclass
class VerifyConfig:
    """Settings for :func:`verify_theorem`."""

    kinds: Tuple[str, ...] = ("spectral",)
    t_ladder: Optional[Sequence[float]] = None
    n_samples: int = 100_000
    n_steps: int = 256
    refine: int = 4
    method: str = "uniform"
    regular_method: str = "uniform"
    seed: int = 0
    rel_tol: object = 0.1  # float or {kind: float}
    workers: int = 1
    sub_exponent: Optional[float] = None
    regular_n_samples: Optional[int] = None


@dataclass
class VerifyReport:
    domain: str
    alpha: float
    predicted: float
    fits: dict
    passed: dict
    tolerance: dict
    estimates: dict = field(default_factory=dict)
    notes: List[str] = field(default_factory=list)

    @property
    def all_passed(self) -> bool:
        return all(self.passed.values())

    def summary_lines(self) -> List[str]:
        out = []
        for k, fit in self.fits.items():
            out.append(f"{k}: c1={fit.c1:.5g} (CI {fit.c1_ci[0]:.5g}..{fit.c1_ci[1]:.5g}) "
                       f"predicted={self.predicted:.5g} tol={self.tolerance[k]:.3g} "
                       f"{'PASS' if self.passed[k] else 'FAIL'}")
        return out


def run_ladder(kind: str, D: Domain, alpha: float, ts, cfg: VerifyConfig) -> List[HeatLossEstimate]:
    out = []
    for j, t in enumerate(ts):
        rng = RngStream(cfg.seed, j)
        if kind == "regular":
            n = cfg.regular_n_samples or cfg.n_samples
            out.append(regular_heat_loss(D, alpha, float(t), n, rng, cfg.regular_method,
                                         workers=cfg.workers))
        elif kind == "spectral":
            out.append(spectral_heat_loss(D, alpha, float(t), cfg.n_samples, cfg.n_steps, rng,
                                          cfg.method, cfg.refine, workers=cfg.workers))
        elif kind == "skbm":
            out.append(skbm_heat_loss(D, alpha, float(t), cfg.n_samples, "bm-path", rng,
                                      n_steps=cfg.n_steps, workers=cfg.workers))
        else:
            raise DomainError(f"unsupported ladder kind {kind!r}")
    return out


def verify_theorem(D: Domain, params, config: Optional[VerifyConfig] = None,
                   ev: Optional[MellinEvaluator] = None) -> VerifyReport:
    """Run t-ladders, fit the leading coefficient and compare with the prediction."""
    cfg = config or VerifyConfig()
    a = _alpha(params)
    ts = default_ladder(a) if cfg.t_ladder is None else np.asarray(cfg.t_ladder, dtype=float)
    if ts.size == 0:
        raise DomainError("empty t-ladder")
    if np.any((ts <= 0) | (ts >= math.exp(-1))):
        raise DomainError("t-ladder must lie inside (0, 1/e)")
    if 1.0 < a < 2.0 and ev is None:
        ev = MellinEvaluator.calibrated(a)
    pred = predicted_coefficient(D, a, ev)
    fits, passed, tol, ests = {}, {}, {}, {}
    notes = []
    for kind in cfg.kinds:
        est = run_ladder(kind, D, a, ts, cfg)
        fit = fit_limit_coefficient(est, a, cfg.sub_exponent)
        rt = cfg.rel_tol[kind] if isinstance(cfg.rel_tol, dict) else cfg.rel_tol
        ok, tl = within_tolerance(fit, pred, rt)
        fits[kind], passed[kind], tol[kind], ests[kind] = fit, ok, tl, est
        if kind == "regular":
            notes.append("regular fit uses one-shot exact draws (unbiased)")
    return VerifyReport(repr(D), a, pred, fits, passed, tol, ests, notes)
