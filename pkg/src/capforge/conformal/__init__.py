"""Exterior maps, Green functions, harmonic measure and Julia-set boundaries."""

from .exterior import (
    ExteriorMap,
    SeriesConvergenceWarning,
    bottcher_series,
    conformal_angle,
    development_coefficients,
    functional_residual,
    harmonic_cap_boundary,
    harmonic_cap_development,
)
from .polynomial import GreenEvaluator, PolynomialMap, green_polynomial, metric_density, quadratic
from .harmonic import HarmonicHits, HarmonicSampler, harmonic_measure_mc
from .julia import julia_boundary, pulled_back_curves
from .square import square_arclength, square_conformal_angle, square_harmonic_atoms, square_harmonic_cdf
