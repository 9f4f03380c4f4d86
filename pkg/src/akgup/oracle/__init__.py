"""Independent numerical references: regulated quadrature and grid evolution."""

from .grid import (
    GridSpec,
    GridState,
    GridTooSmallError,
    apply_factorized_unitary,
    compare_states,
    load_state,
    save_state,
    to_momentum,
    to_position,
    trotter_convergence,
    trotter_extrapolated,
    trotter_reference,
)
from .quadrature import QuadratureResult, quad_kernel, richardson_zero, triple_quadrature, triple_quadrature_many

__all__ = [
    "GridSpec",
    "GridState",
    "GridTooSmallError",
    "apply_factorized_unitary",
    "compare_states",
    "load_state",
    "save_state",
    "to_momentum",
    "to_position",
    "trotter_convergence",
    "trotter_extrapolated",
    "trotter_reference",
    "QuadratureResult",
    "quad_kernel",
    "richardson_zero",
    "triple_quadrature",
    "triple_quadrature_many",
]
