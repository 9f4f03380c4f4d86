"""GUP-corrected Arthurs-Kelly propagator: operator algebra, closed-form kernels and numerical oracles."""

from .coefficients import CoefficientTable, derive_coefficients, quoted_coefficients
from .dynamics import GaussianPacket, InitialState, UncertaintyReport, ak_product, evolve, variance
from .factorization import check_factorization, factor_exponents, verify_factorization
from .gaussian import GaussianQuadraticForm, gaussian_moment, gaussian_triple
from .params import ParameterError, SystemParams
from .propagator import PropagatorPoint, PropagatorValue, k_ak, k_free_gup, k_gup

__version__ = "0.1.0"

__all__ = [
    "CoefficientTable",
    "derive_coefficients",
    "quoted_coefficients",
    "GaussianPacket",
    "InitialState",
    "UncertaintyReport",
    "ak_product",
    "evolve",
    "variance",
    "check_factorization",
    "factor_exponents",
    "verify_factorization",
    "GaussianQuadraticForm",
    "gaussian_moment",
    "gaussian_triple",
    "ParameterError",
    "SystemParams",
    "PropagatorPoint",
    "PropagatorValue",
    "k_ak",
    "k_free_gup",
    "k_gup",
]
