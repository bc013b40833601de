"""Exact scalars, linear algebra and linear programming."""

from .linalg import nullspace, rank, row_echelon, solve
from .lp import (
    FarkasCertificate,
    LinearProgram,
    LpBuilder,
    LpDimensionError,
    LpResult,
    LpStatus,
    lp_feasible,
    lp_solve,
)
from .scalars import (
    DEFAULT_PRECISION,
    FLOAT_TOL,
    Certainty,
    FieldMismatchError,
    IndeterminateError,
    IntervalScalar,
    QuadraticScalar,
    as_fraction,
    certainty_of,
    from_json,
    is_zero,
    scalars_equal,
    sign,
    to_json,
)

__all__ = [
    "Certainty", "DEFAULT_PRECISION", "FLOAT_TOL", "FarkasCertificate", "FieldMismatchError",
    "IndeterminateError", "IntervalScalar", "LinearProgram", "LpBuilder", "LpDimensionError",
    "LpResult", "LpStatus", "QuadraticScalar", "as_fraction", "certainty_of", "from_json",
    "is_zero", "lp_feasible", "lp_solve", "nullspace", "rank", "row_echelon", "scalars_equal",
    "sign", "solve", "to_json",
]
