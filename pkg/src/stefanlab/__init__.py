"""Numerical laboratory for a free-boundary invasion model in a
time-periodic environment: radial logistic reaction-diffusion with a
Stefan moving front, principal periodic eigenvalues, sharp spreading
thresholds, and semi-wave front speeds."""

__version__ = "0.1.0"

from .coeffmodel import (CoefficientField, Numerics, ProblemSpec,
                         classify_habitat, constant_field, validate)
from .eigen import EigenResult, d_thresholds, h_star, principal_eigenvalue
from .freeboundary import Outcome, Trajectory, classify_outcome, simulate
from .semiwave import (envelope_speeds, k0_fixed_point, measure_front_speed,
                       periodic_logistic, semiwave_profile)
from .thresholds import ThresholdResult, criteria_experiment, mu_star, sigma0

__all__ = [
    "CoefficientField", "Numerics", "ProblemSpec", "classify_habitat",
    "constant_field", "validate",
    "EigenResult", "d_thresholds", "h_star", "principal_eigenvalue",
    "Outcome", "Trajectory", "classify_outcome", "simulate",
    "envelope_speeds", "k0_fixed_point", "measure_front_speed",
    "periodic_logistic", "semiwave_profile",
    "ThresholdResult", "criteria_experiment", "mu_star", "sigma0",
    "__version__",
]
