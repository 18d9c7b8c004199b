"""Special functions: stable constants, certified series, double gamma, Mellin inversion."""

from .double_gamma import double_gamma, log_double_gamma, truncated_double_gamma, truncated_product
from .elementary import (SeriesValue, StableParams, cauchy_density, cauchy_tail,
                         frac_perimeter_constant, gamma_fn, stable_density_fourier,
                         stable_tail_fourier, sup_mean_exact, tail_constant)
from .mellin import (MellinEvaluator, NumericValue, SupMean, contour_envelope,
                     fitted_bound_constant, mellin_sup, phi_domination, stable_tail,
                     sup_density, sup_mean, sup_tail)
from .series import (best_order_symmetric, skewed_density_series, stable_density_series,
                     stable_tail_series, uniform_remainder_bound, zolotarev_compose)

__all__ = [
    "MellinEvaluator", "NumericValue", "SeriesValue", "StableParams", "SupMean",
    "best_order_symmetric", "cauchy_density", "cauchy_tail", "contour_envelope",
    "double_gamma", "fitted_bound_constant", "frac_perimeter_constant", "gamma_fn",
    "log_double_gamma", "mellin_sup", "phi_domination", "skewed_density_series",
    "stable_density_fourier", "stable_density_series", "stable_tail", "stable_tail_fourier",
    "stable_tail_series", "sup_density", "sup_mean", "sup_mean_exact", "sup_tail",
    "tail_constant", "truncated_double_gamma", "truncated_product",
    "uniform_remainder_bound", "zolotarev_compose",
]
