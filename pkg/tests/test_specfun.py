"""Special functions: elementary constants, certified series, double gamma, Mellin machinery."""

import math

import mpmath
import numpy as np
import pytest
from scipy import integrate

from stablehc.errors import DomainError, PoleError
from stablehc.specfun import (MellinEvaluator, StableParams, cauchy_density, cauchy_tail,
                              frac_perimeter_constant, gamma_fn, stable_density_fourier,
                              stable_density_series, stable_tail_fourier, tail_constant)
from stablehc.specfun.double_gamma import (double_gamma, log_double_gamma, truncated_product)
from stablehc.specfun.mellin import (contour_envelope, excursion_integrand, fitted_bound_constant,
                                     mellin_sup, stable_tail, sup_density, sup_mean, sup_tail)
from stablehc.specfun.series import (best_order_symmetric, skewed_density_series,
                                     uniform_remainder_bound, zolotarev_compose)


@pytest.fixture(scope="module")
def ev15():
    return MellinEvaluator.calibrated(1.5)


# ---------------------------------------------------------------- elementary

class TestStableParams:
    def test_dual_index(self):
        p = StableParams(1.5)
        assert p.beta * p.alpha == pytest.approx(2.0, abs=0)
        assert p.rho == 0.5

    def test_class_membership(self):
        p = StableParams.from_class(1, 2)
        assert p.alpha == pytest.approx(4 / 3)
        assert p.alpha * (0.5 + 1) == pytest.approx(2.0, rel=1e-15)

    def test_class_mismatch(self):
        with pytest.raises(DomainError):
            StableParams(1.5, class_kl=(1, 2))

    @pytest.mark.parametrize("a", [0.0, -1.0, 2.5, float("nan")])
    def test_bad_alpha(self, a):
        with pytest.raises(DomainError):
            StableParams(a)


def test_gamma_values():
    assert gamma_fn(1.0) == 1.0
    assert gamma_fn(4.0) == pytest.approx(6.0, rel=1e-15)
    assert gamma_fn(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-15)
    with pytest.raises(DomainError):
        gamma_fn(-2.0)


def test_tail_constant():
    assert tail_constant(1.0) == pytest.approx(1 / math.pi, rel=1e-14)
    ref = math.gamma(2.5) * math.sin(0.75 * math.pi) / (1.5 * math.pi)
    assert tail_constant(1.5) == pytest.approx(ref, rel=1e-14)
    assert tail_constant(2 - 1e-9) < 1e-8
    # Fourier oracle: u^alpha P(Y > u) at u = 50
    u = 50.0
    assert u ** 1.5 * stable_tail_fourier(u, 1.5) == pytest.approx(ref, rel=5e-3)


def test_frac_perimeter_constant():
    assert frac_perimeter_constant(2, 1.0) == pytest.approx(1 / (2 * math.pi), rel=1e-14)
    assert frac_perimeter_constant(1, 0.5) == pytest.approx(1 / (2 * math.sqrt(2 * math.pi)),
                                                            rel=1e-14)
    with pytest.raises(DomainError):
        frac_perimeter_constant(2, 2.0)


def test_cauchy():
    assert cauchy_density(0.0) == pytest.approx(1 / math.pi)
    assert cauchy_tail(1.0) == pytest.approx(0.25, rel=1e-15)
    # two arctan terms; the next one is 1/(5e5 pi)
    two = 1 / (10 * math.pi) - 1 / (3000 * math.pi)
    assert abs(cauchy_tail(10.0) - two) <= 1.01 / (5e5 * math.pi)


def test_fourier_oracle_against_mpmath():
    a, x = 1.5, 2.0
    ref = mpmath.quad(lambda y: mpmath.cos(x * y) * mpmath.exp(-y ** a), [0, mpmath.inf]) / mpmath.pi
    assert stable_density_fourier(x, a) == pytest.approx(float(ref), abs=1e-12)


# -------------------------------------------------------------------- series

@pytest.mark.parametrize("a", [1.2, 1.5, 1.8])
@pytest.mark.parametrize("x", [1.0, 2.0, 5.0, 20.0])
def test_series_within_certified_bound(a, x):
    sv = stable_density_series(x, StableParams(a))
    ref = stable_density_fourier(x, a)
    assert abs(sv.value - ref) <= sv.error_bound + 1e-13


def test_series_bound_never_exceeds_uniform():
    for a in (1.1, 1.5, 1.9):
        for x in (1.0, 3.0, 10.0):
            for n in (1, 5, 20):
                sv = stable_density_series(x, StableParams(a), n)
                assert sv.error_bound <= uniform_remainder_bound(n, x) * (1 + 1e-12)


def test_series_near_cauchy():
    # one term at alpha close to 1 is 1/(pi x^2); Cauchy density at 2 is 1/(5 pi)
    sv = stable_density_series(2.0, StableParams(1.0 + 1e-9), 1)
    assert sv.value == pytest.approx(1 / (4 * math.pi), rel=1e-7)
    assert abs(sv.value - cauchy_density(2.0)) <= sv.error_bound + 1e-12


def test_series_leading_term_dominates():
    a = 1.5
    x = 1e4
    lead = math.gamma(1 + a) * math.sin(a * math.pi / 2) / math.pi * x ** (-1 - a)
    assert stable_density_series(x, StableParams(a), 1).value / lead == pytest.approx(1.0)


def test_series_order_choice():
    assert 1 <= best_order_symmetric(1.0, 1.5) <= 30
    with pytest.raises(DomainError):
        stable_density_series(0.5, StableParams(1.5))
    with pytest.raises(DomainError):
        stable_density_series(2.0, StableParams(0.8))


def test_skewed_series_vanishes_at_full_skew():
    sv = skewed_density_series(0.5, 0.7, 0.7, 10)
    assert sv.value == pytest.approx(0.0, abs=1e-15)
    assert sv.error_bound > 0


def test_skewed_bound_ratio():
    a, x = 0.75, 0.3
    g = 0.0
    b = [skewed_density_series(x, a, g, n).error_bound for n in (3, 4)]
    ratio = x * math.gamma(5 / a) / (4 * math.gamma(4 / a))
    assert b[1] / b[0] == pytest.approx(ratio, rel=1e-12)


@pytest.mark.parametrize("x", [1.0, 2.0, 7.0])
def test_zolotarev_agrees_with_series(x):
    p = StableParams(1.5)
    z = zolotarev_compose(x, p)
    s = stable_density_series(x, p)
    assert abs(z.value - s.value) <= z.error_bound + s.error_bound + 1e-15


def test_zolotarev_fourier():
    z = zolotarev_compose(10.0, StableParams(1.25))
    assert abs(z.value - stable_density_fourier(10.0, 1.25)) <= z.error_bound + 1e-13


# -------------------------------------------------------------- double gamma

def test_double_gamma_zero():
    assert double_gamma(0.0, 1.5) == 0


def test_double_gamma_reference_value():
    lg, err = log_double_gamma(0.7 + 0.3j, 1.5)
    assert lg == pytest.approx(-0.59214912 + 0.57670769j, abs=1e-8)
    assert err < 1e-12


@pytest.mark.parametrize("z", [0.4 + 0.1j, 1.3 - 0.6j, 2.2])
def test_double_gamma_against_truncated_product(z):
    lg, _ = log_double_gamma(z, 1.5)
    brute, bound = truncated_product(z, 1.5, 2000)
    # compare logs modulo the branch
    assert abs(np.exp(complex(lg[0]) - brute) - 1) <= 1.01 * bound + 1e-12


def test_truncation_refinement():
    z = 0.9 + 0.4j
    b1, e1 = truncated_product(z, 1.25, 500)
    b2, e2 = truncated_product(z, 1.25, 1000)
    assert abs(b1 - b2) <= e1


# -------------------------------------------------------------------- Mellin

@pytest.mark.parametrize("a", [4 / 3, 1.5, 1.8])
def test_mellin_normalization(a):
    ev = MellinEvaluator.calibrated(a)
    assert abs(complex(mellin_sup(1.0, ev)) - 1) <= 1e-8


def test_mellin_one_independent_of_b():
    ev = MellinEvaluator(1.5, b_cal=3.0)
    assert abs(complex(mellin_sup(1.0, ev)) - 1) <= 1e-12


def test_gauge_constant_cancels():
    e0 = MellinEvaluator.calibrated(1.5)
    e1 = MellinEvaluator(1.5, b_cal=e0.b_cal, a_const=0.37)
    s = np.array([1.2 + 0.5j, 2.0, 2.3 - 1.0j])
    assert np.allclose(mellin_sup(s, e0), mellin_sup(s, e1), rtol=1e-10)


def test_residue_calibration(ev15):
    # -Res equals C alpha with the standard orientation
    assert -ev15.residue() == pytest.approx(tail_constant(1.5) * 1.5, rel=1e-10)
    # numerical contour check around the pole
    r, s0 = 1e-3, 2.5
    th = np.linspace(0, 2 * np.pi, 64, endpoint=False)
    vals = mellin_sup(s0 + r * np.exp(1j * th), ev15) * r * np.exp(1j * th)
    assert complex(vals.mean()).real == pytest.approx(ev15.residue(), rel=1e-8)


@pytest.mark.parametrize("a", [1.2, 1.5, 1.8])
def test_mellin_mean_matches_spitzer(a):
    # E[Ybar_1] = alpha Gamma(1 - 1/alpha)/pi (independent classical identity)
    ev = MellinEvaluator.calibrated(a)
    ref = a * math.gamma(1 - 1 / a) / math.pi
    assert complex(mellin_sup(2.0, ev)).real == pytest.approx(ref, rel=1e-10)


def test_pole_guard(ev15):
    with pytest.raises(PoleError):
        mellin_sup(2.5 + 1e-6, ev15)
    poles = ev15.poles(0.0, 6.0)
    assert any(abs(p - 2.5) < 1e-12 for p in poles)


def test_density_normalization(ev15):
    f = lambda x: float(sup_density(x, ev15))
    head = integrate.quad(f, 0, 1, epsabs=1e-13, limit=200)[0]
    mid = integrate.quad(f, 1, 1e3, epsabs=1e-13, limit=400)[0]
    assert head + mid + sup_tail(1e3, ev15) == pytest.approx(1.0, abs=1e-6)


def test_tail_consistent_with_density(ev15):
    u = 2.0
    mass = integrate.quad(lambda x: float(sup_density(x, ev15)), u, 1e3, epsabs=1e-13, limit=400)[0]
    assert sup_tail(u, ev15) == pytest.approx(mass + sup_tail(1e3, ev15), abs=1e-9)


def test_tail_asymptotics(ev15):
    C = tail_constant(1.5)
    r = [u ** 1.5 * sup_tail(u, ev15) / C for u in (1e2, 1e3, 1e4)]
    assert abs(r[1] - 1) < 0.01
    assert abs(r[0] - 1) > abs(r[1] - 1) > abs(r[2] - 1)


def test_density_domination():
    A = fitted_bound_constant()
    for a in (4 / 3, 6 / 5):
        ev = MellinEvaluator.calibrated(a)
        x = np.array([2.0, 5.0, 10.0, 50.0])
        bound = tail_constant(a) * a * x ** (-1 - a) + A * x ** -3.0
        assert np.all(sup_density(x, ev) <= bound * (1 + 1e-9))


def test_sup_mean_decomposition(ev15):
    sm = sup_mean(ev15)
    assert sm.decomposition_total == pytest.approx(sm.value, abs=1e-3)
    assert sm.gamma_term == pytest.approx(math.gamma(1 / 3) / math.pi, rel=1e-14)
    # excursion integral in closed form (alpha - 1) Gamma(1 - 1/alpha)/pi
    assert sm.excursion_term == pytest.approx(0.5 * math.gamma(1 / 3) / math.pi, rel=1e-8)


def test_excursion_integrand_is_positive(ev15):
    # sup tail exceeds endpoint tail
    for u in (0.1, 1.0, 3.0, 30.0):
        assert excursion_integrand(u, ev15) > 0
        assert sup_tail(u, ev15) > stable_tail(u, 1.5)


def test_excursion_integral_bounded_as_alpha_decreases():
    vals = [sup_mean(MellinEvaluator.calibrated(a)).excursion_term for a in (4 / 3, 6 / 5, 8 / 7)]
    gam = [math.gamma(1 - 1 / a) / math.pi for a in (4 / 3, 6 / 5, 8 / 7)]
    assert gam[0] < gam[1] < gam[2]
    assert max(vals) < 1.0


def test_contour_decay(ev15):
    K = contour_envelope(ev15)
    y = np.linspace(-50, 50, 201)
    m = np.abs(mellin_sup(3.0 + 1j * y, ev15))
    assert np.all(m <= K * np.exp(-np.pi * np.abs(y) / 5) * (1 + 1e-9))


def test_mellin_rejects_alpha_outside():
    with pytest.raises(DomainError):
        MellinEvaluator(0.8)
