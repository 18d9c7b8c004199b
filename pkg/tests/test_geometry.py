"""Catalog shapes, boundary layers and fractional perimeters."""

import math

import numpy as np
import pytest

from stablehc.errors import ConfigError, DomainError
from stablehc.geometry import (Annulus, Ball, HalfSpace, Interval, RoundedRectangle,
                               dist_to_boundary, domain_from_config,
                               frac_perimeter, frac_perimeter_covariogram, frac_perimeter_mc,
                               inner_boundary_measure, sphere_area, uniform_sample)
from stablehc.rng import RngStream

SHAPES = [Interval(0.0, 1.0), Ball(1.0, 2), Ball(0.7, 3, [0.1, 0.2, 0.3]),
          Annulus(1.0, 2.0), RoundedRectangle(1.0, 0.5, 0.25)]
IDS = ["interval", "disk", "ball3", "annulus", "rrect"]


def test_sphere_area():
    assert sphere_area(2) == pytest.approx(2 * math.pi)
    assert sphere_area(3) == pytest.approx(4 * math.pi)
    assert sphere_area(1) == pytest.approx(2.0)


@pytest.mark.parametrize("d", [1, 2, 3, 4])
def test_ball_boundary_measure(d):
    B = Ball(1.3, d)
    ref = d * math.pi ** (d / 2) * 1.3 ** (d - 1) / math.gamma(d / 2 + 1)
    assert B.boundary_measure == pytest.approx(ref, rel=1e-14)
    assert B.ball_radius_R == 1.3


def test_distance_examples():
    assert dist_to_boundary(Ball(1.0, 2), [0.0, 0.0]) == pytest.approx(1.0)
    assert dist_to_boundary(Interval(0, 1), 0.3) == pytest.approx(0.3)
    assert dist_to_boundary(Annulus(1, 2), [1.4, 0.0]) == pytest.approx(0.4)
    assert dist_to_boundary(HalfSpace(2), [5.0, -0.5]) == pytest.approx(-0.5)


@pytest.mark.parametrize("D", SHAPES, ids=IDS)
def test_signed_distance_lipschitz(D):
    gen = np.random.default_rng(1)
    lo, hi = D.bounding_box()
    x = lo - 0.5 + (hi - lo + 1) * gen.random((2000, D.dim))
    y = lo - 0.5 + (hi - lo + 1) * gen.random((2000, D.dim))
    dd = np.abs(D.signed_distance(x) - D.signed_distance(y))
    assert np.all(dd <= np.linalg.norm(x - y, axis=1) + 1e-12)


@pytest.mark.parametrize("D", SHAPES, ids=IDS)
def test_level_sets_sit_at_their_depth(D):
    gen = np.random.default_rng(2)
    q = D.max_depth * gen.random(500) * 0.99
    x = D.sample_level(q, gen)
    assert np.allclose(D.signed_distance(x), q, atol=1e-12)


@pytest.mark.parametrize("D", SHAPES, ids=IDS)
def test_boundary_sandwich(D):
    R, d, P = D.ball_radius_R, D.dim, D.boundary_measure
    for q in R * np.array([0.01, 0.3, 0.7, 0.99]):
        m = inner_boundary_measure(D, q)
        assert P * ((R - q) / R) ** (d - 1) <= m * (1 + 1e-12)
        assert m <= P * (R / (R - q)) ** (d - 1) * (1 + 1e-12)


def test_inner_boundary_examples():
    assert inner_boundary_measure(Ball(1.5, 2), 0.4) == pytest.approx(2 * math.pi * 1.1)
    assert inner_boundary_measure(Interval(0, 1), 0.2) == 2.0
    with pytest.raises(DomainError):
        inner_boundary_measure(Ball(1.0, 2), 1.0)


def test_rounded_rectangle_level_mc():
    # coarea: |{q < delta < q + h}| / h against the closed-form level measure
    D = RoundedRectangle(1.0, 0.5, 0.25)
    gen = RngStream(3).generator()
    n = 400_000
    x = D.uniform_sample(gen, n)
    dd = D.signed_distance(x)
    for q in (0.1, 0.35):
        h = 0.01
        frac = np.mean((dd > q) & (dd < q + h))
        se = math.sqrt(frac * (1 - frac) / n)
        ref = (D.level_measure(q) + D.level_measure(q + h)) / 2 * h / D.volume
        assert abs(frac - ref) < 4 * se + 1e-4


def test_uniform_sample_disk():
    D = Ball(1.0, 2, [0.5, -0.5])
    x = uniform_sample(D, RngStream(4), 100_000)
    assert np.all(D.contains(x))
    se = 0.5 / math.sqrt(100_000)
    assert np.all(np.abs(x.mean(axis=0) - D.center) < 4 * se)
    q = 0.3
    frac = np.mean(D.signed_distance(x) > q)
    assert abs(frac - (1 - q) ** 2) < 4 * math.sqrt(frac * (1 - frac) / 1e5)


def test_depth_density_near_boundary():
    D = Ball(1.0, 2)
    x = uniform_sample(D, RngStream(5), 400_000)
    dd = D.signed_distance(x)
    for q in (1e-2, 1e-3):
        frac = np.mean(dd < q) * D.volume
        assert frac == pytest.approx(D.boundary_measure * q, rel=0.1)


@pytest.mark.parametrize("D", SHAPES, ids=IDS)
def test_config_round_trip(D):
    E = domain_from_config(D.to_config())
    assert type(E) is type(D)
    assert E.volume == pytest.approx(D.volume)
    assert E.boundary_measure == pytest.approx(D.boundary_measure)


def test_config_errors():
    with pytest.raises(ConfigError):
        domain_from_config({"shape": "torus"})
    with pytest.raises(ConfigError):
        domain_from_config({"shape": "ball", "radius": "abc"})


def test_halfspace_excluded():
    with pytest.raises(DomainError):
        HalfSpace(2).uniform_sample(RngStream(1), 3)


# -------------------------------------------------------- fractional perimeter

def test_interval_closed_form():
    assert frac_perimeter(Interval(0, 1), 0.5) == pytest.approx(1.5957691216, rel=1e-10)
    v, _ = frac_perimeter_covariogram(Interval(0, 1), 0.5)
    assert v == pytest.approx(1.5957691216, rel=1e-8)


@pytest.mark.parametrize("a,ref", [(0.5, 5.171877628668), (0.3, 4.0026980955), (0.9, 21.2764077)])
def test_disk_quadrature(a, ref):
    assert frac_perimeter(Ball(1.0, 2), a, 1e-9) == pytest.approx(ref, rel=1e-8)


@pytest.mark.parametrize("a", [0.3, 0.5, 0.9])
def test_disk_covariogram_route(a):
    v, _ = frac_perimeter_covariogram(Ball(1.0, 2), a)
    assert v == pytest.approx(frac_perimeter(Ball(1.0, 2), a, 1e-9), rel=1e-7)


def test_disk_mc_oracle():
    v, se = frac_perimeter_mc(Ball(1.0, 2), 0.5, 4_000_000, RngStream(6))
    assert abs(v - frac_perimeter(Ball(1.0, 2), 0.5)) < 3 * se + 1e-6


@pytest.mark.parametrize("D", [Ball(1.0, 3), Interval(0.0, 2.0)], ids=["ball3", "interval"])
def test_mc_against_covariogram(D):
    v, se = frac_perimeter_mc(D, 0.4, 2_000_000, RngStream(7))
    ref, _ = frac_perimeter_covariogram(D, 0.4)
    assert abs(v - ref) < 4 * se


def test_scaling():
    a = 0.5
    p1 = frac_perimeter(Ball(1.0, 2), a, 1e-9)
    p2 = frac_perimeter(Ball(2.0, 2), a, 1e-9)
    assert p2 == pytest.approx(2 ** (2 - a) * p1, rel=1e-8)


def test_blow_up_towards_one():
    vals = [frac_perimeter(Ball(1.0, 2), a, 1e-8) for a in (0.5, 0.7, 0.9)]
    assert vals[0] < vals[1] < vals[2]


def test_annulus_mc_route():
    v = frac_perimeter(Annulus(1.0, 2.0), 0.5, eps=0.05, rng=RngStream(8))
    v2, se = frac_perimeter_mc(Annulus(1.0, 2.0), 0.5, 1_000_000, RngStream(9))
    assert abs(v - v2) < 4 * se + 0.05


def test_perimeter_domain_checks():
    with pytest.raises(DomainError):
        frac_perimeter(Ball(1.0, 2), 1.2)
    with pytest.raises(DomainError):
        frac_perimeter(HalfSpace(2), 0.5)
