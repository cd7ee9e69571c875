"""splinecol: isogeometric spline collocation solvers and benchmarks.

The package solves second-order boundary value problems in strong form on
NURBS-mapped domains, either interpolatory (as many collocation points as
unknowns, solved by Gaussian elimination) or least-squares (more points
than unknowns, solved through the normal equations), and ships five
manufactured-solution benchmarks with error metrics and a CLI harness.
"""

from .collocation import (
    CollocationScheme,
    CollocationSet,
    CollocationSystem,
    assemble,
    build_field,
    build_field_from_knots,
    coefficients_to_field,
    collocation_knot_vector,
    empty_cells,
    generate_collocation_points,
)
from .config import ExperimentConfig
from .errors import (
    AssemblyError,
    ConfigError,
    DomainError,
    InvalidRefinementError,
    InvalidSchemeError,
    PreconditionError,
    RankDeficientError,
    SingularGeometryError,
    SingularSystemError,
    SplineColError,
    UndefinedMetricError,
    UnsupportedDerivativeError,
)
from .estimator import CollocationSolver
from .geometry import GeometryMap, PullbackData
from .metrics import (
    ErrorReport,
    absolute_error_field,
    error_report,
    relative_operator_error,
    relative_quantity_errors,
    relative_solution_error,
)
from .problems import (
    STABILITY_KNOTS,
    BvpDefinition,
    MaterialParams,
    example_1d_dirichlet,
    example_1d_mixed,
    example_2d_annulus,
    example_3d_cube,
    example_beam,
    make_example,
)
from .solvers import (
    CostModel,
    SolveReport,
    flop_cost_model,
    solve_normal_equations,
    solve_square,
)
from .splines import (
    KnotGrid,
    KnotVector,
    TensorSpline,
    refine_to_count,
    uniform_refine,
)

__version__ = "0.1.0"

__all__ = [
    "AssemblyError",
    "BvpDefinition",
    "CollocationScheme",
    "CollocationSet",
    "CollocationSolver",
    "CollocationSystem",
    "ConfigError",
    "CostModel",
    "DomainError",
    "ErrorReport",
    "ExperimentConfig",
    "GeometryMap",
    "InvalidRefinementError",
    "InvalidSchemeError",
    "KnotGrid",
    "KnotVector",
    "MaterialParams",
    "PreconditionError",
    "PullbackData",
    "RankDeficientError",
    "STABILITY_KNOTS",
    "SingularGeometryError",
    "SingularSystemError",
    "SolveReport",
    "SplineColError",
    "TensorSpline",
    "UndefinedMetricError",
    "UnsupportedDerivativeError",
    "absolute_error_field",
    "assemble",
    "build_field",
    "build_field_from_knots",
    "coefficients_to_field",
    "collocation_knot_vector",
    "empty_cells",
    "error_report",
    "example_1d_dirichlet",
    "example_1d_mixed",
    "example_2d_annulus",
    "example_3d_cube",
    "example_beam",
    "flop_cost_model",
    "generate_collocation_points",
    "make_example",
    "refine_to_count",
    "relative_operator_error",
    "relative_quantity_errors",
    "relative_solution_error",
    "solve_normal_equations",
    "solve_square",
    "uniform_refine",
]
