"""Command-line batch runner.

Commands: ``simulate``, ``mellin``, ``perimeter``, ``verify`` and ``report``.
Settings come from an INI file (``--config``) with command-line values taking
precedence; the default seed is read from ``STABLEHC_SEED``.  CSV outputs
start with ``#`` comment lines holding the schema version and a JSON run
manifest, followed by a header row.

Exit codes: 0 success, 1 check failed, 2 usage or configuration error,
3 numerical failure (convergence or pole proximity).
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import math
import os
import sys
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import __version__
from .errors import ConfigError, ConvergenceError, DomainError, PoleError
from .geometry import domain_from_config, frac_perimeter
from .rng import RngStream

SCHEMA_VERSION = "1.0"
SEED_ENV = "STABLEHC_SEED"
FALLBACK_SEED = 12345

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3

SIMULATE_COLUMNS = ["kind", "alpha", "t", "mean", "stderr", "n_samples", "n_steps",
                    "bias_direction", "seed", "method", "raw_coarse_mean", "raw_fine_mean"]

# key -> (type, default); the [run] section of a config file uses the same keys
SETTINGS = {
    "seed": (int, None),
    "workers": (int, 1),
    "alpha": (float, None),
    "kind": (str, "spectral"),
    "method": (str, "uniform"),
    "t_ladder": (str, "1e-2:8"),
    "n_samples": (int, 100_000),
    "n_steps": (int, 256),
    "refine": (int, 4),
    "eps": (float, 1e-6),
    "scale": (float, 1.0),
    "output": (str, None),
}


# ------------------------------------------------------------------- CSV I/O

def write_csv(stream, columns: Sequence[str], rows: Sequence[Dict[str, object]],
              manifest: Dict[str, object]) -> None:
    """Write a versioned CSV with the manifest in leading comment lines."""
    stream.write(f"# stablehc-csv schema={SCHEMA_VERSION}\n")
    stream.write("# manifest=" + json.dumps(manifest, sort_keys=True) + "\n")
    w = csv.DictWriter(stream, fieldnames=list(columns), lineterminator="\n",
                       extrasaction="ignore")
    w.writeheader()
    for r in rows:
        w.writerow({k: _fmt(v) for k, v in r.items()})


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


def read_csv(stream) -> Tuple[Dict[str, object], List[Dict[str, str]]]:
    """Read a CSV written by :func:`write_csv`; rejects unknown major versions."""
    text = stream.read()
    lines = text.splitlines()
    if not lines or not lines[0].startswith("# stablehc-csv schema="):
        raise ConfigError("not a stablehc CSV (missing schema line)")
    version = lines[0].split("=", 1)[1].strip()
    major = version.split(".")[0]
    if major != SCHEMA_VERSION.split(".")[0]:
        raise ConfigError(f"unsupported CSV schema version {version}")
    manifest: Dict[str, object] = {}
    body = []
    for ln in lines[1:]:
        if ln.startswith("# manifest="):
            manifest = json.loads(ln.split("=", 1)[1])
        elif not ln.startswith("#"):
            body.append(ln)
    return manifest, list(csv.DictReader(io.StringIO("\n".join(body))))


# ------------------------------------------------------------------ settings

def default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw.strip() == "":
        return FALLBACK_SEED
    try:
        return int(raw)
    except ValueError as exc:
        raise ConfigError(f"{SEED_ENV} must be an integer, got {raw!r}") from exc


def load_config(path: Optional[str]) -> Tuple[Dict[str, object], Dict[str, str]]:
    """Parse an INI file into run settings and a domain descriptor."""
    if path is None:
        return {}, {}
    cp = configparser.ConfigParser()
    try:
        with open(path, encoding="utf-8") as fh:
            cp.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    run: Dict[str, object] = {}
    if cp.has_section("run"):
        for key, raw in cp.items("run"):
            if key not in SETTINGS:
                raise ConfigError(f"{path}: [run] unknown key {key!r}")
            typ = SETTINGS[key][0]
            try:
                run[key] = typ(raw)
            except ValueError as exc:
                raise ConfigError(f"{path}: [run] {key} = {raw!r}: {exc}") from exc
    domain = dict(cp.items("domain")) if cp.has_section("domain") else {}
    return run, domain


def resolve(args: argparse.Namespace) -> Dict[str, object]:
    """Merge built-in defaults, config file and command line (highest precedence)."""
    run, domain = load_config(getattr(args, "config", None))
    out = {k: d for k, (_, d) in SETTINGS.items()}
    out.update(run)
    for k in SETTINGS:
        v = getattr(args, k, None)
        if v is not None:
            out[k] = v
    if out["seed"] is None:
        out["seed"] = default_seed()
    cli_domain = getattr(args, "domain", None)
    if cli_domain:
        domain = parse_domain_spec(cli_domain)
    out["domain"] = domain
    if out["workers"] < 1:
        raise ConfigError("workers must be at least 1")
    return out


def parse_domain_spec(text: str) -> Dict[str, str]:
    """``shape=ball;radius=1;dim=2`` to a descriptor dict."""
    out = {}
    for part in text.split(";"):
        if not part.strip():
            continue
        if "=" not in part:
            raise ConfigError(f"domain item {part!r} is not key=value")
        k, v = part.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def parse_ladder(spec: str) -> np.ndarray:
    """``t0:J`` (geometric, ratio 2) or a comma-separated list of times."""
    spec = spec.strip()
    if not spec:
        raise ConfigError("empty t-ladder")
    try:
        if ":" in spec:
            t0, J = spec.split(":")
            t = float(t0) * 2.0 ** (-np.arange(int(J) + 1, dtype=float))
        else:
            t = np.array([float(v) for v in spec.split(",") if v.strip()])
    except ValueError as exc:
        raise ConfigError(f"bad t-ladder {spec!r}") from exc
    if t.size == 0:
        raise ConfigError("empty t-ladder")
    if np.any((t <= 0) | (t >= math.exp(-1))):
        raise ConfigError("t-ladder values must lie in (0, 1/e)")
    return t


def _manifest(command: str, cfg: Dict[str, object], **extra) -> Dict[str, object]:
    m = {"tool": "stablehc", "version": __version__, "command": command}
    m.update({k: v for k, v in cfg.items() if k not in ("output", "workers")})
    m.update(extra)
    return m


def _open_out(path):
    if path in (None, "-"):
        return sys.stdout, False
    return open(path, "w", encoding="utf-8", newline=""), True


def _need_alpha(cfg):
    if cfg["alpha"] is None:
        raise ConfigError("alpha is required (--alpha or [run] alpha)")
    return float(cfg["alpha"])


# ------------------------------------------------------------------ commands

def cmd_simulate(cfg: Dict[str, object]) -> int:
    from .heatcontent import regular_heat_loss, skbm_heat_loss, spectral_heat_loss

    alpha = _need_alpha(cfg)
    if not cfg["domain"]:
        raise ConfigError("a domain is required (--domain or [domain] section)")
    D = domain_from_config(cfg["domain"])
    ts = parse_ladder(str(cfg["t_ladder"]))
    rows = []
    for j, t in enumerate(ts):
        rng = RngStream(int(cfg["seed"]), j)
        kind = cfg["kind"]
        if kind == "regular":
            e = regular_heat_loss(D, alpha, float(t), cfg["n_samples"], rng, cfg["method"],
                                  workers=cfg["workers"])
        elif kind == "spectral":
            e = spectral_heat_loss(D, alpha, float(t), cfg["n_samples"], cfg["n_steps"], rng,
                                   cfg["method"], cfg["refine"], workers=cfg["workers"])
        elif kind == "skbm":
            inner = "interval-series" if cfg["method"] == "interval-series" else "bm-path"
            e = skbm_heat_loss(D, alpha, float(t), cfg["n_samples"], inner, rng,
                               n_steps=cfg["n_steps"], workers=cfg["workers"])
        else:
            raise ConfigError(f"unknown kind {kind!r}")
        rec = e.as_record()
        rec["raw_coarse_mean"] = e.resolutions[0][1] if e.resolutions else e.mean
        rec["raw_fine_mean"] = e.raw_fine[1]
        rows.append(rec)
    cfg = dict(cfg, domain=D.to_config())
    out, close = _open_out(cfg["output"])
    try:
        write_csv(out, SIMULATE_COLUMNS, rows, _manifest("simulate", cfg))
    finally:
        if close:
            out.close()
    return EXIT_OK


def cmd_mellin(cfg: Dict[str, object], args) -> int:
    from .specfun.mellin import MellinEvaluator, mellin_sup, sup_density, sup_mean, sup_tail

    alpha = _need_alpha(cfg)
    ev = MellinEvaluator.calibrated(alpha)
    rows, status = [], EXIT_OK
    for s in _floats(args.s):
        try:
            v = complex(mellin_sup(s, ev))
            _, err = ev.log_mellin(s)
            rows.append({"quantity": "mellin", "arg": s, "value": v.real,
                         "error": abs(v) * float(np.max(err)), "status": "ok"})
        except PoleError as exc:
            rows.append({"quantity": "mellin", "arg": s, "value": "nan", "error": "nan",
                         "status": f"error: {exc}"})
            status = EXIT_NUMERIC
    if args.moments:
        sm = sup_mean(ev)
        rows.append({"quantity": "sup_mean", "arg": 1.0, "value": sm.value,
                     "error": sm.error, "status": "ok"})
    for x in _floats(args.density):
        nv = sup_density(x, ev, with_error=True)
        rows.append({"quantity": "density", "arg": x, "value": nv.value, "error": nv.error,
                     "status": "ok"})
    for u in _floats(args.tail):
        nv = sup_tail(u, ev, with_error=True)
        rows.append({"quantity": "tail", "arg": u, "value": nv.value, "error": nv.error,
                     "status": "ok"})
    out, close = _open_out(cfg["output"])
    try:
        write_csv(out, ["quantity", "arg", "value", "error", "status"], rows,
                  _manifest("mellin", cfg, s=args.s, density=args.density, tail=args.tail,
                            moments=bool(args.moments), b_cal=ev.b_cal))
    finally:
        if close:
            out.close()
    return status


def _floats(text: Optional[str]) -> List[float]:
    if not text:
        return []
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad number list {text!r}") from exc


def cmd_perimeter(cfg: Dict[str, object]) -> int:
    alpha = _need_alpha(cfg)
    if not cfg["domain"]:
        raise ConfigError("a domain is required (--domain or [domain] section)")
    D = domain_from_config(cfg["domain"])
    val = frac_perimeter(D, alpha, float(cfg["eps"]), rng=RngStream(int(cfg["seed"]), 0))
    cfg = dict(cfg, domain=D.to_config())
    out, close = _open_out(cfg["output"])
    try:
        write_csv(out, ["shape", "alpha", "value"],
                  [{"shape": cfg["domain"]["shape"], "alpha": alpha, "value": val}],
                  _manifest("perimeter", cfg))
    finally:
        if close:
            out.close()
    return EXIT_OK


def cmd_verify(cfg: Dict[str, object], args) -> int:
    from .acceptance import SUITES, run_suite

    suite = args.suite.upper()
    if suite not in SUITES:
        raise ConfigError(f"unknown suite {args.suite!r}; choose from {', '.join(SUITES)}")
    res = run_suite(suite, seed=int(cfg["seed"]), scale=float(cfg["scale"]),
                    workers=int(cfg["workers"]))
    print(res.headline())
    for ln in res.lines:
        print("  " + ln)
    if cfg["output"]:
        report = {"manifest": _manifest("verify", cfg, suite=suite), "suite": suite,
                  "passed": res.passed, "runtime": res.runtime, "lines": res.lines,
                  "details": res.details}
        with open(cfg["output"], "w", encoding="utf-8") as fh:
            json.dump(report, fh, indent=2, sort_keys=True, default=_jsonable)
    return EXIT_OK if res.passed else EXIT_FAIL


def _jsonable(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, (np.bool_,)):
        return bool(v)
    raise TypeError(f"cannot serialize {type(v).__name__}")


def cmd_report(cfg: Dict[str, object], args) -> int:
    """Fit the leading small-time coefficient from a ``simulate`` CSV."""
    from .asymptotics import fit_limit_coefficient

    with open(args.input, encoding="utf-8") as fh:
        manifest, rows = read_csv(fh)
    if not rows:
        raise ConfigError(f"{args.input} has no data rows")
    alpha = float(rows[0]["alpha"])
    ladder = [(float(r["t"]), float(r["mean"]), float(r["stderr"])) for r in rows]
    fit = fit_limit_coefficient(ladder, alpha)
    print(f"source: {manifest.get('command', '?')} kind={rows[0]['kind']} alpha={alpha:g} "
          f"points={len(rows)}")
    print(f"model: {fit.model}")
    print(f"c1 = {fit.c1:.6g} +- {fit.c1_stderr:.3g} (95% CI {fit.c1_ci[0]:.6g}..{fit.c1_ci[1]:.6g})")
    print(f"c2 = {fit.c2:.6g} +- {fit.c2_stderr:.3g}; reduced chi2 = {fit.goodness:.3g}")
    return EXIT_OK


# ---------------------------------------------------------------------- main

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI file with [run] and [domain] sections")
    common.add_argument("--seed", type=int, help=f"random seed (default ${SEED_ENV})")
    common.add_argument("--workers", type=int, help="worker processes")
    common.add_argument("--output", "-o", help="output path ('-' for stdout)")

    p = argparse.ArgumentParser(prog="stablehc", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"stablehc {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", parents=[common], help="heat-loss estimates on a t-ladder")
    s.add_argument("--domain", help="e.g. 'shape=ball;radius=1;dim=2'")
    s.add_argument("--alpha", type=float)
    s.add_argument("--kind", choices=["regular", "spectral", "skbm"])
    s.add_argument("--method")
    s.add_argument("--t-ladder", dest="t_ladder", help="'t0:J' or comma-separated times")
    s.add_argument("--n-samples", dest="n_samples", type=int)
    s.add_argument("--n-steps", dest="n_steps", type=int)
    s.add_argument("--refine", type=int)

    m = sub.add_parser("mellin", parents=[common], help="Mellin transform, density, tail, mean")
    m.add_argument("--alpha", type=float)
    m.add_argument("--s", default="", help="comma-separated real s values")
    m.add_argument("--density", default="", help="comma-separated x values")
    m.add_argument("--tail", default="", help="comma-separated u values")
    m.add_argument("--moments", action="store_true", help="add the mean of the supremum")

    f = sub.add_parser("perimeter", parents=[common], help="fractional perimeter")
    f.add_argument("--domain")
    f.add_argument("--alpha", type=float)
    f.add_argument("--eps", type=float)

    v = sub.add_parser("verify", parents=[common], help="run an acceptance suite")
    v.add_argument("suite", help="AC1..AC10")
    v.add_argument("--scale", type=float, help="sample-size multiplier")

    r = sub.add_parser("report", parents=[common], help="fit a simulate CSV")
    r.add_argument("input")
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve(args)
        if args.command == "simulate":
            return cmd_simulate(cfg)
        if args.command == "mellin":
            return cmd_mellin(cfg, args)
        if args.command == "perimeter":
            return cmd_perimeter(cfg)
        if args.command == "verify":
            return cmd_verify(cfg, args)
        return cmd_report(cfg, args)
    except (ConvergenceError, PoleError) as exc:
        print(f"stablehc: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ConfigError, DomainError, OSError) as exc:
        print(f"stablehc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
