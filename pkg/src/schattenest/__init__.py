"""Randomized Schatten p-norm estimation for symmetric positive semidefinite matrices."""

__version__ = "0.1.0"

from .base import ExactSchattenNorm, SchattenNormEstimator
from .estimator import (
    EstimationError,
    EstimatorParams,
    SchattenEstimate,
    SchattenWarning,
    hutchinson_htilde,
    schatten_general,
    schatten_kappa,
    schatten_plain,
    spectral_upper_bound,
)
from .generate import SpectrumSpec, make_spsd_matrix
from .linop import gram_operator, load_matrix_market, matvec, residual_operator, save_matrix_market
from .oracle import eigenvalues_symmetric, schatten_exact, schatten_exact_general
from .probes import ProbeSource, hutchinson_plain, rademacher_probe

__all__ = [
    "EstimationError",
    "EstimatorParams",
    "ExactSchattenNorm",
    "ProbeSource",
    "SchattenEstimate",
    "SchattenNormEstimator",
    "SchattenWarning",
    "SpectrumSpec",
    "eigenvalues_symmetric",
    "gram_operator",
    "hutchinson_htilde",
    "hutchinson_plain",
    "load_matrix_market",
    "make_spsd_matrix",
    "matvec",
    "rademacher_probe",
    "residual_operator",
    "save_matrix_market",
    "schatten_exact",
    "schatten_exact_general",
    "schatten_general",
    "schatten_kappa",
    "schatten_plain",
    "spectral_upper_bound",
]
