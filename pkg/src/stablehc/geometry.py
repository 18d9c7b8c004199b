"""Catalog of C^{1,1} domains and fractional perimeter evaluation.

Every shape exposes exact volume, boundary measure and the uniform
interior/exterior ball radius ``R``, a signed distance (positive inside),
and a parametrization of its level sets ``{delta_D = q}`` used for
boundary-layer sampling.
"""

from __future__ import annotations

import math
import warnings
from typing import Dict, Mapping, Optional, Tuple

import numpy as np
from scipy import integrate

from .errors import ConfigError, ConvergenceError, DomainError
from .rng import RngStream, as_generator, chunk_sizes
from .specfun.elementary import frac_perimeter_constant


def sphere_area(d: int) -> float:
    """Surface measure of the unit sphere in R^d (2 for d = 1)."""
    return 2.0 * math.pi ** (d / 2) / math.gamma(d / 2)


def random_directions(m: int, d: int, gen) -> np.ndarray:
    if d == 1:
        return np.where(gen.random(m) < 0.5, -1.0, 1.0)[:, None]
    z = gen.standard_normal((m, d))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


class Domain:
    """Base class for catalog shapes."""

    shape: str = "abstract"
    dim: int = 0

    # exact geometric data
    @property
    def volume(self) -> float:
        raise NotImplementedError

    @property
    def boundary_measure(self) -> float:
        raise NotImplementedError

    @property
    def ball_radius_R(self) -> float:
        raise NotImplementedError

    @property
    def max_depth(self) -> float:
        """Largest value of the signed distance (inradius)."""
        raise NotImplementedError

    def bounding_box(self) -> Tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def signed_distance(self, x) -> np.ndarray:
        raise NotImplementedError

    def contains(self, x) -> np.ndarray:
        return self.signed_distance(x) > 0

    def level_measure(self, q):
        """(d-1)-measure of ``{delta_D = q}`` for ``0 < q < max_depth``."""
        raise NotImplementedError

    def sample_level(self, q, gen) -> np.ndarray:
        """Points uniformly distributed on ``{delta_D = q}``, one per entry of q."""
        raise NotImplementedError

    def covariogram_loss(self, rho):
        """``|D \\ (D - y)|`` for ``|y| = rho`` when it depends on |y| only."""
        raise NotImplementedError(f"no closed-form covariogram for {self.shape}")

    def scaled(self, r: float) -> "Domain":
        raise NotImplementedError

    def to_config(self) -> Dict[str, str]:
        raise NotImplementedError

    def __repr__(self):
        cfg = ", ".join(f"{k}={v}" for k, v in self.to_config().items() if k != "shape")
        return f"{type(self).__name__}({cfg})"

    # derived operations
    def inner_boundary_measure(self, q: float) -> float:
        """``|partial D_q|``, the measure of the level set at depth q, for 0 < q < R."""
        if not (0.0 < q < self.ball_radius_R):
            raise DomainError(f"q must lie in (0, R={self.ball_radius_R}), got {q}")
        return float(self.level_measure(q))

    def uniform_sample(self, rng, size: int) -> np.ndarray:
        """Uniform points in D by rejection from the bounding box."""
        if not math.isfinite(self.volume):
            raise DomainError(f"{self.shape} has infinite volume")
        gen = as_generator(rng)
        lo, hi = self.bounding_box()
        out = []
        need = int(size)
        frac = self.volume / float(np.prod(hi - lo))
        while need > 0:
            m = int(need / frac * 1.1) + 16
            x = lo + (hi - lo) * gen.random((m, self.dim))
            x = x[self.contains(x)]
            out.append(x[:need])
            need -= len(out[-1])
        return np.concatenate(out)


def _pts(x, d):
    x = np.asarray(x, dtype=float)
    if d == 1 and (x.ndim == 0 or x.shape[-1] != 1):
        x = x[..., None]
    return x


class Interval(Domain):
    shape = "interval"
    dim = 1

    def __init__(self, a: float = 0.0, b: float = 1.0):
        if not b > a:
            raise DomainError("interval needs a < b")
        self.a, self.b = float(a), float(b)

    @property
    def length(self):
        return self.b - self.a

    volume = property(lambda self: self.length)
    boundary_measure = property(lambda self: 2.0)
    ball_radius_R = property(lambda self: self.length / 2)
    max_depth = property(lambda self: self.length / 2)

    def bounding_box(self):
        return np.array([self.a]), np.array([self.b])

    def signed_distance(self, x):
        x = _pts(x, 1)[..., 0]
        return np.minimum(x - self.a, self.b - x)

    def level_measure(self, q):
        return np.full(np.shape(q), 2.0) if np.ndim(q) else 2.0

    def sample_level(self, q, gen):
        q = np.asarray(q, dtype=float)
        left = gen.random(q.shape) < 0.5
        return np.where(left, self.a + q, self.b - q)[:, None]

    def covariogram_loss(self, rho):
        return np.minimum(np.abs(rho), self.length)

    def scaled(self, r):
        return Interval(r * self.a, r * self.b)

    def to_config(self):
        return {"shape": "interval", "a": repr(self.a), "b": repr(self.b)}


class Ball(Domain):
    shape = "ball"

    def __init__(self, radius: float = 1.0, dim: int = 2, center=None):
        if radius <= 0:
            raise DomainError("radius must be positive")
        if dim < 1:
            raise DomainError("dimension must be positive")
        self.radius = float(radius)
        self.dim = int(dim)
        self.center = np.zeros(self.dim) if center is None else np.asarray(center, dtype=float)
        if self.center.shape != (self.dim,):
            raise DomainError("center has the wrong dimension")

    @property
    def volume(self):
        d = self.dim
        return math.pi ** (d / 2) * self.radius ** d / math.gamma(d / 2 + 1)

    @property
    def boundary_measure(self):
        d = self.dim
        return d * math.pi ** (d / 2) * self.radius ** (d - 1) / math.gamma(d / 2 + 1)

    ball_radius_R = property(lambda self: self.radius)
    max_depth = property(lambda self: self.radius)

    def bounding_box(self):
        return self.center - self.radius, self.center + self.radius

    def signed_distance(self, x):
        x = _pts(x, self.dim)
        return self.radius - np.linalg.norm(x - self.center, axis=-1)

    def level_measure(self, q):
        return sphere_area(self.dim) * (self.radius - np.asarray(q)) ** (self.dim - 1)

    def sample_level(self, q, gen):
        q = np.asarray(q, dtype=float)
        w = random_directions(q.size, self.dim, gen)
        return self.center + (self.radius - q)[:, None] * w

    def covariogram_loss(self, rho):
        R = self.radius
        rho = np.minimum(np.abs(np.asarray(rho, dtype=float)), 2 * R)
        if self.dim == 1:
            return np.minimum(rho, 2 * R)
        if self.dim == 2:
            lens = 2 * R * R * np.arccos(rho / (2 * R)) - 0.5 * rho * np.sqrt(4 * R * R - rho * rho)
            return math.pi * R * R - lens
        if self.dim == 3:
            cap = math.pi * (4 * R + rho) * (2 * R - rho) ** 2 / 12
            return self.volume - cap
        return super().covariogram_loss(rho)

    def scaled(self, r):
        return Ball(r * self.radius, self.dim, r * self.center)

    def to_config(self):
        return {"shape": "ball", "dim": str(self.dim), "radius": repr(self.radius),
                "center": ",".join(repr(float(c)) for c in self.center)}


class Annulus(Domain):
    shape = "annulus"
    dim = 2

    def __init__(self, r1: float = 1.0, r2: float = 2.0, center=None):
        if not (0 < r1 < r2):
            raise DomainError("annulus needs 0 < r1 < r2")
        self.r1, self.r2 = float(r1), float(r2)
        self.center = np.zeros(2) if center is None else np.asarray(center, dtype=float)

    volume = property(lambda self: math.pi * (self.r2 ** 2 - self.r1 ** 2))
    boundary_measure = property(lambda self: 2 * math.pi * (self.r1 + self.r2))
    max_depth = property(lambda self: (self.r2 - self.r1) / 2)

    @property
    def ball_radius_R(self):
        # interior balls have radius <= width/2; exterior balls in the hole <= r1
        return min(self.r1, (self.r2 - self.r1) / 2)

    def bounding_box(self):
        return self.center - self.r2, self.center + self.r2

    def signed_distance(self, x):
        r = np.linalg.norm(_pts(x, 2) - self.center, axis=-1)
        return np.minimum(r - self.r1, self.r2 - r)

    def level_measure(self, q):
        return np.full(np.shape(q), 2 * math.pi * (self.r1 + self.r2)) if np.ndim(q) \
            else 2 * math.pi * (self.r1 + self.r2)

    def sample_level(self, q, gen):
        q = np.asarray(q, dtype=float)
        inner = gen.random(q.shape) < (self.r1 + q) / (self.r1 + self.r2)
        rad = np.where(inner, self.r1 + q, self.r2 - q)
        return self.center + rad[:, None] * random_directions(q.size, 2, gen)

    def scaled(self, r):
        return Annulus(r * self.r1, r * self.r2, r * self.center)

    def to_config(self):
        return {"shape": "annulus", "r1": repr(self.r1), "r2": repr(self.r2),
                "center": ",".join(repr(float(c)) for c in self.center)}


class RoundedRectangle(Domain):
    """Rectangle ``[-a, a] x [-b, b]`` with corners rounded at radius ``rc``."""

    shape = "rounded-rectangle"
    dim = 2

    def __init__(self, half_width: float = 1.0, half_height: float = 0.5,
                 corner_radius: float = 0.25, center=None):
        a, b, rc = float(half_width), float(half_height), float(corner_radius)
        if not (0 < rc <= min(a, b)):
            raise DomainError("need 0 < corner_radius <= min(half_width, half_height)")
        self.a, self.b, self.rc = a, b, rc
        self.center = np.zeros(2) if center is None else np.asarray(center, dtype=float)

    @property
    def volume(self):
        return 4 * self.a * self.b - (4 - math.pi) * self.rc ** 2

    @property
    def boundary_measure(self):
        return 4 * (self.a - self.rc) + 4 * (self.b - self.rc) + 2 * math.pi * self.rc

    ball_radius_R = property(lambda self: self.rc)
    max_depth = property(lambda self: min(self.a, self.b))

    def bounding_box(self):
        h = np.array([self.a, self.b])
        return self.center - h, self.center + h

    def signed_distance(self, x):
        p = np.abs(_pts(x, 2) - self.center)
        ax, by = self.a - self.rc, self.b - self.rc
        ox = np.maximum(p[..., 0] - ax, 0.0)
        oy = np.maximum(p[..., 1] - by, 0.0)
        outside_core = np.hypot(ox, oy)
        inside_core = np.minimum(ax - p[..., 0], by - p[..., 1])
        return np.where(outside_core > 0, self.rc - outside_core, self.rc + inside_core)

    def _level_parts(self, q):
        # straight lengths (one side each) and arc radius of the level curve
        q = np.asarray(q, dtype=float)
        sx = 2 * np.where(q <= self.rc, self.a - self.rc, self.a - q)
        sy = 2 * np.where(q <= self.rc, self.b - self.rc, self.b - q)
        rad = np.maximum(self.rc - q, 0.0)
        return sx, sy, rad

    def level_measure(self, q):
        sx, sy, rad = self._level_parts(q)
        return 2 * sx + 2 * sy + 2 * math.pi * rad

    def sample_level(self, q, gen):
        q = np.asarray(q, dtype=float)
        sx, sy, rad = self._level_parts(q)
        total = 2 * sx + 2 * sy + 2 * math.pi * rad
        s = gen.random(q.shape) * total
        hx, hy = sx / 2, sy / 2  # half lengths of straight parts
        ex, ey = hx + rad, hy + rad  # outer half extents of the level curve
        out = np.empty(q.shape + (2,))
        # walk: top side, right side, bottom, left, then the four arcs
        seg = [2 * hx, 2 * hy, 2 * hx, 2 * hy]
        cum = np.zeros(q.shape)
        done = np.zeros(q.shape, dtype=bool)
        for k, L in enumerate(seg):
            sel = ~done & (s < cum + L)
            u = (s - cum)[sel]
            if k == 0:
                out[sel] = np.stack([-hx[sel] + u, ey[sel]], -1)
            elif k == 1:
                out[sel] = np.stack([ex[sel], hy[sel] - u], -1)
            elif k == 2:
                out[sel] = np.stack([hx[sel] - u, -ey[sel]], -1)
            else:
                out[sel] = np.stack([-ex[sel], -hy[sel] + u], -1)
            done |= sel
            cum = cum + L
        rest = ~done
        if np.any(rest):
            u = (s - cum)[rest] / np.maximum(rad[rest], 1e-300)  # angle in [0, 2 pi)
            quad = np.minimum((u // (math.pi / 2)).astype(int), 3)
            cx = np.where((quad == 0) | (quad == 3), hx[rest], -hx[rest])
            cy = np.where(quad <= 1, hy[rest], -hy[rest])
            out[rest] = np.stack([cx + rad[rest] * np.cos(u), cy + rad[rest] * np.sin(u)], -1)
        return self.center + out

    def scaled(self, r):
        return RoundedRectangle(r * self.a, r * self.b, r * self.rc, r * self.center)

    def to_config(self):
        return {"shape": "rounded-rectangle", "half_width": repr(self.a),
                "half_height": repr(self.b), "corner_radius": repr(self.rc),
                "center": ",".join(repr(float(c)) for c in self.center)}


class HalfSpace(Domain):
    """``{x : x_d > 0}``; only for exit-identity checks."""

    shape = "half-space"

    def __init__(self, dim: int = 2):
        if dim < 1:
            raise DomainError("dimension must be positive")
        self.dim = int(dim)

    volume = property(lambda self: math.inf)
    boundary_measure = property(lambda self: math.inf)
    ball_radius_R = property(lambda self: math.inf)
    max_depth = property(lambda self: math.inf)

    def signed_distance(self, x):
        return _pts(x, self.dim)[..., -1]

    def level_measure(self, q):
        return math.inf

    def scaled(self, r):
        return HalfSpace(self.dim)

    def to_config(self):
        return {"shape": "half-space", "dim": str(self.dim)}


def _floats(text: str):
    return [float(v) for v in text.split(",") if v.strip()]


def domain_from_config(cfg: Mapping[str, str]) -> Domain:
    """Build a domain from ``shape = ...`` plus numeric keys."""
    cfg = {k.strip().lower(): str(v).strip() for k, v in cfg.items()}
    shape = cfg.get("shape")
    try:
        if shape == "interval":
            return Interval(float(cfg.get("a", 0.0)), float(cfg.get("b", 1.0)))
        if shape in ("ball", "disk"):
            dim = int(cfg.get("dim", 2))
            c = _floats(cfg["center"]) if "center" in cfg else None
            return Ball(float(cfg.get("radius", 1.0)), dim, c)
        if shape == "annulus":
            c = _floats(cfg["center"]) if "center" in cfg else None
            return Annulus(float(cfg.get("r1", 1.0)), float(cfg.get("r2", 2.0)), c)
        if shape == "rounded-rectangle":
            c = _floats(cfg["center"]) if "center" in cfg else None
            return RoundedRectangle(float(cfg.get("half_width", 1.0)),
                                    float(cfg.get("half_height", 0.5)),
                                    float(cfg.get("corner_radius", 0.25)), c)
        if shape == "half-space":
            return HalfSpace(int(cfg.get("dim", 2)))
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"bad domain parameters: {exc}") from exc
    raise ConfigError(f"unknown domain shape {shape!r}")


def dist_to_boundary(D: Domain, x):
    """Signed distance to the boundary, positive inside."""
    out = D.signed_distance(x)
    return float(out) if np.ndim(out) == 0 else out


def inner_boundary_measure(D: Domain, q: float) -> float:
    return D.inner_boundary_measure(q)


def uniform_sample(D: Domain, rng, size: int = 1) -> np.ndarray:
    return D.uniform_sample(rng, size)


# ------------------------------------------------------ fractional perimeter

def _check_frac_alpha(alpha):
    if not (0.0 < alpha < 1.0):
        raise DomainError(f"fractional perimeter needs alpha in (0, 1), got {alpha}")


def _disk_radial(alpha: float, eps: float):
    # Per(unit disk) = A int_0^1 2 pi r (1/alpha) int_0^{2pi} l(r,th)^(-alpha) dth dr,
    # l = distance from (r, 0) to the circle in direction th
    # l = (1 - r^2)/(r cos th + sqrt(1 - r^2 sin^2 th)), so (1-r)^alpha l^(-alpha)
    # is bounded; the factor (1-r)^(-alpha) goes into the quadrature weight
    def inner(r):
        f = lambda th: max(0.0, (r * math.cos(th) + math.sqrt(max(0.0, 1 - (r * math.sin(th)) ** 2)))
                           / (1 + r)) ** alpha
        v1, _ = integrate.quad(f, 0.0, math.pi / 2, epsabs=1e-13, epsrel=1e-12, limit=200)
        v2, _ = integrate.quad(f, math.pi / 2, math.pi, epsabs=1e-13, epsrel=1e-12, limit=200)
        return 2 * (v1 + v2)

    g = lambda r: 2 * math.pi * r * inner(r) / alpha
    with warnings.catch_warnings():
        # the inner integrand has a square-root kink at th = pi/2 as r -> 1
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err = integrate.quad(g, 0.0, 1.0, weight="alg", wvar=(0.0, -alpha),
                                  epsabs=eps / 10, epsrel=1e-11, limit=200)
    return val, err


def frac_perimeter_covariogram(D: Domain, alpha: float) -> Tuple[float, float]:
    """``Per = int A|y|^(-d-alpha) |D \\ (D-y)| dy`` for radial covariograms.

    Independent route through the set covariogram; returns (value, error).
    """
    _check_frac_alpha(alpha)
    d = D.dim
    A = frac_perimeter_constant(d, alpha)
    rmax = 2 * D.max_depth
    f = lambda r: float(D.covariogram_loss(max(r, 1e-8))) / max(r, 1e-8)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        v1, e1 = integrate.quad(f, 0.0, rmax, weight="alg", wvar=(-alpha, 0.0),
                                epsabs=1e-13, epsrel=1e-12, limit=200)
    full = float(D.covariogram_loss(rmax))
    v2 = full * rmax ** (-alpha) / alpha
    return A * sphere_area(d) * (v1 + v2), A * sphere_area(d) * e1


def _flat_exit_prob(d: int, alpha: float) -> float:
    # P(rho w_n > q) for rho ~ Pareto(q, alpha), w uniform: exit from a half-space
    if d == 1:
        return 0.5
    if d == 3:
        return 0.5 / (alpha + 1)
    if d == 2:
        v, _ = integrate.quad(lambda u: math.acos(u ** (1 / alpha)), 0.0, 1.0, epsabs=1e-13)
        return v / math.pi
    raise DomainError("flat-layer correction implemented for d <= 3")


def frac_perimeter_mc(D: Domain, alpha: float, n: int, rng, chunk_size: int = 1 << 16,
                      q_min_rel: float = 1e-9):
    """Boundary-layer Monte Carlo for ``Per_alpha(D)``; returns (value, stderr).

    The depth ``q`` of x has density proportional to ``q^(-alpha)`` on
    ``(q_min, Q)``, x is uniform on the level set, and ``y = x + rho w`` with
    ``rho ~ Pareto(q, alpha)``.  Since ``B(x, q)`` lies in D,
    ``int_{D^c} |x-y|^(-d-alpha) dy = |S^{d-1}| q^(-alpha)/alpha * P(y outside D)``.
    The layer ``q < q_min`` is added with the flat-boundary exit probability;
    below ``q_min`` rounding of x would dominate the geometry.
    """
    _check_frac_alpha(alpha)
    if isinstance(rng, (int, np.integer)):
        rng = RngStream(int(rng))
    d = D.dim
    Q = D.max_depth
    if not math.isfinite(Q):
        raise DomainError("fractional perimeter needs a bounded domain")
    A = frac_perimeter_constant(d, alpha)
    b = 1.0 - alpha
    q0 = q_min_rel * Q
    span = Q ** b - q0 ** b
    c = A * sphere_area(d) / alpha * span / b
    layer = (A * sphere_area(d) / alpha * D.boundary_measure * _flat_exit_prob(d, alpha)
             * q0 ** b / b)
    s1 = s2 = 0.0
    for k, m in enumerate(chunk_sizes(n, chunk_size)):
        gen = rng.generator(k)
        q = (q0 ** b + span * gen.random(m)) ** (1.0 / b)
        x = D.sample_level(q, gen)
        rho = q * (1.0 - gen.random(m)) ** (-1.0 / alpha)
        y = x + rho[:, None] * random_directions(m, d, gen)
        w = c * D.level_measure(q) * (D.signed_distance(y) <= 0)
        s1 += w.sum()
        s2 += (w * w).sum()
    mean = s1 / n
    var = max(s2 / n - mean * mean, 0.0) * n / max(n - 1, 1)
    return mean + layer, math.sqrt(var / n)


def frac_perimeter(D: Domain, alpha: float, eps: float = 1e-6, rng=None,
                   n_max: int = 20_000_000) -> float:
    """``Per_alpha(D) = int_D int_{D^c} A_{d,alpha} |x-y|^(-d-alpha) dy dx``.

    Intervals use the closed form ``2 A L^(1-alpha)/(alpha(1-alpha))``; disks a
    radial double quadrature.  Other shapes use :func:`frac_perimeter_mc`
    with enough samples for a standard error below ``eps/3``.
    """
    _check_frac_alpha(alpha)
    if eps <= 0:
        raise DomainError("eps must be positive")
    if isinstance(D, Interval) or (isinstance(D, Ball) and D.dim == 1):
        L = D.volume
        return 2 * frac_perimeter_constant(1, alpha) * L ** (1 - alpha) / (alpha * (1 - alpha))
    if isinstance(D, Ball) and D.dim == 2:
        val, err = _disk_radial(alpha, eps / D.radius ** (2 - alpha))
        val *= frac_perimeter_constant(2, alpha) * D.radius ** (2 - alpha)
        err *= frac_perimeter_constant(2, alpha) * D.radius ** (2 - alpha)
        if err > eps:
            raise ConvergenceError(f"radial quadrature error {err:.3g} above eps", achieved=err)
        return val
    if isinstance(D, HalfSpace):
        raise DomainError("fractional perimeter needs a bounded domain")
    rng = RngStream(0) if rng is None else rng
    pilot_n = 200_000
    v, se = frac_perimeter_mc(D, alpha, pilot_n, rng.substream(rng.stream_id + 1)
                              if isinstance(rng, RngStream) else rng)
    need = int(pilot_n * (3 * se / eps) ** 2) + 1
    if need > n_max:
        raise ConvergenceError(f"eps={eps:g} needs {need} samples > {n_max}",
                               achieved=3 * se * math.sqrt(pilot_n / n_max))
    if need <= pilot_n:
        return v
    v, _ = frac_perimeter_mc(D, alpha, need, rng)
    return v
