"""carroll-lab: numerical laboratory for equal-x many-body quantum dynamics."""

from .core import (BoundaryLeak, Field, NumericError, PhysParams, ShapeError,
                   TemporalGrid, UnsupportedOrder, field_from_function,
                   finite_diff_check, l2_norm, spectral_derivative)

__all__ = [
    "BoundaryLeak", "Field", "NumericError", "PhysParams", "ShapeError",
    "TemporalGrid", "UnsupportedOrder", "field_from_function",
    "finite_diff_check", "l2_norm", "spectral_derivative",
]

__version__ = "0.1.0"
