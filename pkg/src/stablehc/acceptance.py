"""End-to-end acceptance checks AC1 to AC10.

Each ``acN`` function runs one check and returns an :class:`AcceptanceResult`
whose ``lines`` are human-readable and whose ``details`` are serializable.
``scale`` multiplies Monte Carlo sample sizes (1.0 is the reference size).
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List

import numpy as np

from .asymptotics import (VerifyConfig, geometric_ladder, truncated_moment_expansion,
                          verify_theorem)
from .geometry import Ball, Interval, frac_perimeter, frac_perimeter_mc
from .heatcontent import coupled_indicators, joint_sup_prob, truncated_subordinator_moment
from .rng import RngStream
from .sampling import sample_stable_point, sample_subordinator
from .specfun.elementary import (StableParams, gamma_fn, stable_density_fourier,
                                 tail_constant)
from .specfun.mellin import (MellinEvaluator, fitted_bound_constant, mellin_sup,
                             phi_domination, sup_density, sup_mean, sup_tail)
from .specfun.series import stable_density_series, zolotarev_compose

DEFAULT_SEED = 20240611


@dataclass
class AcceptanceResult:
    name: str
    passed: bool
    lines: List[str] = field(default_factory=list)
    details: Dict[str, object] = field(default_factory=dict)
    runtime: float = 0.0

    def headline(self) -> str:
        return f"{self.name} {'PASS' if self.passed else 'FAIL'} ({self.runtime:.1f} s)"


def _n(n: float, scale: float) -> int:
    return max(1000, int(round(n * scale)))


def _ladder_check(name, D, alpha, cfg, ev=None):
    rep = verify_theorem(D, alpha, cfg, ev)
    det = {"predicted": rep.predicted}
    for k, fit in rep.fits.items():
        det[k] = {"c1": fit.c1, "c1_ci": list(fit.c1_ci), "c2": fit.c2,
                  "tolerance": rep.tolerance[k], "passed": rep.passed[k]}
    return AcceptanceResult(name, rep.all_passed, rep.summary_lines(), det)


def ac1(seed: int = DEFAULT_SEED, scale: float = 1.0, workers: int = 1) -> AcceptanceResult:
    """Interval (0, 1), alpha = 1.5: spectral loss slope vs ``2 E[Ybar_1]``."""
    cfg = VerifyConfig(kinds=("spectral",), t_ladder=geometric_ladder(1e-2, 8),
                       n_samples=_n(2e5, scale), n_steps=256, refine=4, method="conditional",
                       seed=seed, rel_tol=0.05, workers=workers)
    return _ladder_check("AC1", Interval(0.0, 1.0), 1.5, cfg)


def ac2(seed: int = DEFAULT_SEED, scale: float = 1.0, workers: int = 1) -> AcceptanceResult:
    """Unit disk, alpha = 1.5: spectral loss slope vs ``2 pi E[Ybar_1]``."""
    cfg = VerifyConfig(kinds=("spectral",), t_ladder=geometric_ladder(1e-2, 8),
                       n_samples=_n(1e5, scale), n_steps=256, refine=4, method="stratified",
                       seed=seed, rel_tol=0.10, workers=workers)
    return _ladder_check("AC2", Ball(1.0, 2), 1.5, cfg)


def ac3(seed: int = DEFAULT_SEED, scale: float = 1.0, workers: int = 1) -> AcceptanceResult:
    """Unit disk, alpha = 1: regular and spectral losses vs ``2 t ln(1/t)``."""
    cfg = VerifyConfig(kinds=("regular", "spectral"), t_ladder=geometric_ladder(1e-3, 10),
                       n_samples=_n(2e5, scale), regular_n_samples=_n(1e6, scale),
                       n_steps=64, refine=4, method="control", regular_method="conditional",
                       seed=seed, rel_tol={"regular": 0.10, "spectral": 0.25}, workers=workers)
    return _ladder_check("AC3", Ball(1.0, 2), 1.0, cfg)


def ac4(seed: int = DEFAULT_SEED, scale: float = 1.0, workers: int = 1) -> AcceptanceResult:
    """Unit disk, alpha = 0.5: losses over t vs the fractional perimeter."""
    D = Ball(1.0, 2)
    cfg = VerifyConfig(kinds=("regular", "spectral"), t_ladder=geometric_ladder(1e-2, 8),
                       n_samples=_n(2e5, scale), regular_n_samples=_n(1e6, scale),
                       n_steps=64, refine=4, method="control", regular_method="conditional",
                       seed=seed, rel_tol=0.10, workers=workers)
    res = _ladder_check("AC4", D, 0.5, cfg)
    quad = frac_perimeter(D, 0.5, 1e-10)
    mc, se = frac_perimeter_mc(D, 0.5, _n(1e7, scale), RngStream(seed, 99))
    ok = abs(quad - mc) <= 3 * se
    res.lines.append(f"perimeter: quadrature={quad:.10g} mc={mc:.6g}+-{se:.2g} "
                     f"{'PASS' if ok else 'FAIL'}")
    res.details["perimeter"] = {"quadrature": quad, "mc": mc, "mc_stderr": se, "passed": ok}
    res.passed = res.passed and ok
    return res


def ac5(seed: int = DEFAULT_SEED, scale: float = 1.0, workers: int = 1) -> AcceptanceResult:
    """Mellin machinery: normalization, density mass and calibrated tail."""
    lines, det, ok = [], {}, True
    for a in (4 / 3, 1.5, 1.8):
        ev = MellinEvaluator.calibrated(a)
        m1 = complex(mellin_sup(1.0, ev))
        e1 = abs(m1 - 1.0)
        tail = float(sup_tail(1e3, ev)) * 1e3 ** a / tail_constant(a)
        good = e1 <= 1e-8 and abs(tail - 1.0) <= 0.01
        lines.append(f"alpha={a:.4g}: |M(1)-1|={e1:.2e} u^a*tail/C={tail:.6f} "
                     f"{'PASS' if good else 'FAIL'}")
        det[f"{a:.6g}"] = {"M1_error": e1, "tail_ratio_1e3": tail}
        ok &= good
    ev = MellinEvaluator.calibrated(1.5)
    mass = _density_mass(ev)
    good = abs(mass - 1.0) <= 1e-6
    lines.append(f"alpha=1.5: int pbar = {mass:.12f} {'PASS' if good else 'FAIL'}")
    det["density_mass"] = mass
    return AcceptanceResult("AC5", ok and good, lines, det)


def _density_mass(ev: MellinEvaluator) -> float:
    from scipy import integrate
    head = integrate.quad(lambda x: float(sup_density(x, ev)), 0.0, 1.0, epsabs=1e-13,
                          epsrel=1e-12, limit=200)[0]
    mid = integrate.quad(lambda x: float(sup_density(x, ev)), 1.0, 1e3, epsabs=1e-13,
                         epsrel=1e-12, limit=400)[0]
    return head + mid + float(sup_tail(1e3, ev))


def ac6(seed: int = DEFAULT_SEED, scale: float = 1.0, workers: int = 1) -> AcceptanceResult:
    """Certified density series against Fourier inversion and the dual-index route."""
    lines, rows, ok = [], [], True
    for a in (1.2, 1.5, 1.8):
        p = StableParams(a)
        for x in (1.0, 2.0, 5.0, 20.0):
            sv = stable_density_series(x, p)
            ref = stable_density_fourier(x, a)
            slack = 1e-13 * max(1.0, abs(ref))
            good = abs(sv.value - ref) <= sv.error_bound + slack
            z = zolotarev_compose(x, p)
            zgood = abs(z.value - sv.value) <= z.error_bound + sv.error_bound + slack
            rows.append({"alpha": a, "x": x, "series": sv.value, "bound": sv.error_bound,
                         "fourier": ref, "zolotarev": z.value, "zbound": z.error_bound,
                         "passed": good and zgood})
            lines.append(f"alpha={a} x={x:g}: |series-fourier|={abs(sv.value - ref):.2e} "
                         f"bound={sv.error_bound:.2e} zolotarev diff={abs(z.value - sv.value):.2e} "
                         f"{'PASS' if good and zgood else 'FAIL'}")
            ok &= good and zgood
    return AcceptanceResult("AC6", ok, lines, {"rows": rows})


def ac7(seed: int = DEFAULT_SEED, scale: float = 1.0, workers: int = 1) -> AcceptanceResult:
    """Laplace transform of the subordinator and characteristic function of X_t."""
    n = _n(1e6, scale)
    lines, det, ok = [], {}, True
    for a in (1.0, 1.5):
        s = sample_subordinator(a / 2, 1.0, RngStream(seed, 7), size=n)
        for lam in (0.5, 1.0, 2.0, 5.0):
            v = np.exp(-lam * s)
            z = abs(v.mean() - math.exp(-lam ** (a / 2))) / (v.std(ddof=1) / math.sqrt(n))
            ok &= z <= 4
            det[f"lt_{a}_{lam}"] = z
            lines.append(f"Laplace alpha={a} lambda={lam}: z={z:.2f}")
        t = 0.5
        x = sample_stable_point(2, a, t, np.zeros(2), RngStream(seed, 8), size=n)
        for xi in (0.25, 0.5, 1.0, 2.0, 4.0):
            c = np.cos(xi * x[:, 0])
            z = abs(c.mean() - math.exp(-t * xi ** a)) / (c.std(ddof=1) / math.sqrt(n))
            ok &= z <= 4
            det[f"cf_{a}_{xi}"] = z
            lines.append(f"CF alpha={a} xi={xi}: z={z:.2f}")
    return AcceptanceResult("AC7", bool(ok), lines, det)


def ac8(seed: int = DEFAULT_SEED, scale: float = 1.0, workers: int = 1) -> AcceptanceResult:
    """Pathwise nesting of the regular, spectral and skbm loss events."""
    n = _n(1e5, scale)
    r = coupled_indicators(Ball(1.0, 2), 1.5, 1e-2, n, 64, RngStream(seed, 5), refine=4)
    bad_hq = int(np.sum(r["regular"] & ~r["spectral"]))
    bad_qc = int(np.sum(r["spectral_coarse"] & ~r["spectral"]))
    bad_qs = int(np.sum(r["spectral"] & ~r["skbm"]))
    ok = bad_hq == bad_qc == bad_qs == 0
    lines = [f"{n} coupled draws: H events {int(r['regular'].sum())}, "
             f"Q events {int(r['spectral'].sum())}, skbm events {int(r['skbm'].sum())}",
             f"violations H<=Q {bad_hq}, Q(coarse)<=Q(fine) {bad_qc}, Q<=skbm {bad_qs}"]
    return AcceptanceResult("AC8", ok, lines, {"n": n, "violations": [bad_hq, bad_qc, bad_qs]})


AC9_TS = (1e-3, 1e-4, 1e-5, 1e-6)


def ac9(seed: int = DEFAULT_SEED, scale: float = 1.0, workers: int = 1) -> AcceptanceResult:
    """Truncated subordinator moment at beta = 1.5 against ``1/Gamma(1 - beta/2)``.

    The criterion is not met at ``t = 1e-6``: the ratio approaches its limit
    like ``1/ln(1/t)`` and still sits about 19% above it.  ``details`` also
    reports the two-term expansion, which the Monte Carlo values do follow.
    """
    beta, delta = 1.5, 1.0
    limit = 1.0 / gamma_fn(1.0 - beta / 2)
    r, se = truncated_subordinator_moment(beta, delta, AC9_TS, _n(1e7, scale),
                                          RngStream(seed, 9), workers)
    expan = [truncated_moment_expansion(beta, delta, t) for t in AC9_TS]
    rel = abs(r[-1] - limit) / limit
    # draws are shared across t, so a difference is at most as noisy as its finer end
    mono = all(r[i + 1] - r[i] <= 3 * se[i + 1] for i in range(len(r) - 1))
    ok = rel <= 0.15 and mono
    lines = [f"t={t:g}: ratio={v:.4f}+-{s:.4f} two-term={e:.4f}"
             for t, v, s, e in zip(AC9_TS, r, se, expan)]
    lines.append(f"limit 1/Gamma(1-beta/2)={limit:.4f} relative gap at t=1e-6 {rel:.3f} "
                 f"(target 0.15) monotone={mono}")
    det = {"ratios": list(map(float, r)), "stderr": list(map(float, se)),
           "expansion": expan, "limit": limit, "relative_gap": rel, "monotone": mono}
    return AcceptanceResult("AC9", ok, lines, det)


def ac10(seed: int = DEFAULT_SEED, scale: float = 1.0, workers: int = 1) -> AcceptanceResult:
    """Joint supremum/endpoint probability below phi(u), and the excursion ratio trend."""
    A = fitted_bound_constant()
    us = (2.0, 5.0, 10.0)
    lines, det, ok = [f"fitted A={A:.6f}"], {"A": A}, True
    for j, a in enumerate((4 / 3, 6 / 5)):
        est = joint_sup_prob(a, list(us), _n(2e5, scale), 64, RngStream(seed, 10 + j),
                             refine=4, workers=workers)
        for u, e in zip(us, est):
            phi = float(phi_domination(u, A))
            good = e.estimate <= phi + 3 * e.stderr
            ok &= good
            det[f"joint_{a:.4g}_{u:g}"] = {"estimate": e.estimate, "stderr": e.stderr, "phi": phi}
            lines.append(f"alpha={a:.4g} u={u:g}: P={e.estimate:.5f}+-{e.stderr:.1e} "
                         f"phi={phi:.5f} {'PASS' if good else 'FAIL'}")
    ratios = []
    for a in (1.5, 4 / 3, 6 / 5, 8 / 7):
        sm = sup_mean(MellinEvaluator.calibrated(a))
        ratios.append(sm.excursion_term / gamma_fn(1.0 - 1.0 / a))
    dec = all(ratios[i + 1] < ratios[i] for i in range(len(ratios) - 1))
    ok &= dec
    lines.append("excursion integral / Gamma(1-1/alpha): "
                 + ", ".join(f"{v:.6f}" for v in ratios)
                 + f" {'decreasing PASS' if dec else 'FAIL'}")
    det["excursion_ratios"] = ratios
    return AcceptanceResult("AC10", bool(ok), lines, det)


SUITES: Dict[str, Callable[..., AcceptanceResult]] = {
    "AC1": ac1, "AC2": ac2, "AC3": ac3, "AC4": ac4, "AC5": ac5,
    "AC6": ac6, "AC7": ac7, "AC8": ac8, "AC9": ac9, "AC10": ac10,
}


def run_suite(name: str, seed: int = DEFAULT_SEED, scale: float = 1.0,
              workers: int = 1) -> AcceptanceResult:
    key = name.upper()
    if key not in SUITES:
        raise KeyError(name)
    t0 = time.perf_counter()
    res = SUITES[key](seed=seed, scale=scale, workers=workers)
    res.runtime = time.perf_counter() - t0
    return res
