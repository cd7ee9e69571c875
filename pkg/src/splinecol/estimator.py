"""Scikit-learn style solver facade.

:class:`CollocationSolver` wires field construction, point generation,
assembly and the dense solve into a fit/predict estimator with
``get_params``/``set_params`` semantics, so discretization studies compose
with generic parameter-sweep tooling.
"""

from __future__ import annotations

import inspect

import numpy as np

from ._validation import as_points
from .collocation import (
    CollocationScheme,
    assemble,
    build_field,
    build_field_from_knots,
    coefficients_to_field,
    generate_collocation_points,
)
from .errors import InvalidSchemeError
from .problems import BvpDefinition
from .solvers import solve_normal_equations, solve_square

METHODS = ("igac", "igal_fixed", "igal_variable")


class CollocationSolver:
    """Strong-form spline collocation solver (interpolatory or least-squares).

    Parameters
    ----------
    method:
        ``"igac"`` collocates at exactly as many points as unknowns and
        solves the square system by Gaussian elimination. ``"igal_fixed"``
        uses the explicit ``m_per_dir`` point counts (more points than
        unknowns) and solves the normal equations. ``"igal_variable"``
        derives the point counts as n + 2 per direction.
    n_per_dir:
        Control-point count per direction (int or tuple). Ignored when
        ``interior_knots`` is given.
    m_per_dir:
        Collocation-point count per direction for ``igal_fixed``.
    scheme:
        ``"greville"`` (Greville abscissae of a collocation knot vector) or
        ``"uniform"`` (evenly spaced points including the endpoints).
    boundary_weight:
        Scalar weighting applied to boundary rows; ``"auto"`` (default)
        equalizes boundary rows with the mean interior row norm, ``1``
        gives the plain unweighted least-squares stacking.
    interior_knots:
        Optional explicit interior knots per direction for non-uniform
        discretizations (used by the stability experiment).

    Attributes (after ``fit``)
    --------------------------
    field_ : the solved spline field
    points_ : the collocation point set
    system_ : the assembled collocation system
    solve_report_ : solver diagnostics (residual, flops, condition estimate)
    """

    def __init__(
        self,
        method="igac",
        n_per_dir=None,
        m_per_dir=None,
        scheme="greville",
        boundary_weight="auto",
        interior_knots=None,
    ):
        self.method = method
        self.n_per_dir = n_per_dir
        self.m_per_dir = m_per_dir
        self.scheme = scheme
        self.boundary_weight = boundary_weight
        self.interior_knots = interior_knots

    # -- sklearn-compatible parameter handling ------------------------------

    @classmethod
    def _param_names(cls):
        sig = inspect.signature(cls.__init__)
        return [name for name in sig.parameters if name != "self"]

    def get_params(self, deep=True):
        return {name: getattr(self, name) for name in self._param_names()}

    def set_params(self, **params):
        valid = set(self._param_names())
        for key, value in params.items():
            if key not in valid:
                raise ValueError(
                    f"invalid parameter {key!r} for {type(self).__name__}; "
                    f"valid parameters are {sorted(valid)}"
                )
            setattr(self, key, value)
        return self

    # -- fitting -------------------------------------------------------------

    def _counts(self, value, dim, name):
        if value is None:
            raise ValueError(f"{name} must be set for method {self.method!r}")
        counts = tuple(int(c) for c in np.atleast_1d(value))
        if len(counts) == 1 and dim > 1:
            counts = counts * dim
        if len(counts) != dim:
            raise ValueError(f"{name} must give one count per direction, got {value!r}")
        return counts

    def fit(self, problem: BvpDefinition, y=None):
        """Solve ``problem`` and store the fitted field on the estimator."""
        if not isinstance(problem, BvpDefinition):
            raise TypeError("fit expects a BvpDefinition")
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        dim = problem.dim
        c = problem.field_components

        if self.interior_knots is not None:
            field = build_field_from_knots(
                problem.geometry, self.interior_knots, components=c
            )
        else:
            counts = self._counts(self.n_per_dir, dim, "n_per_dir")
            field = build_field(
                problem.geometry,
                counts,
                components=c,
                operator_order=problem.operator.order,
            )
        n_dirs = tuple(kv.n_basis for kv in field.kvs)

        if self.method == "igac":
            m_counts = n_dirs
        elif self.method == "igal_variable":
            m_counts = tuple(n + 2 for n in n_dirs)
        else:
            m_counts = self._counts(self.m_per_dir, dim, "m_per_dir")
            if any(m < n for m, n in zip(m_counts, n_dirs)):
                raise InvalidSchemeError(
                    f"least-squares point counts {m_counts} must reach the "
                    f"basis counts {n_dirs}"
                )

        points = generate_collocation_points(
            field.kvs, CollocationScheme(self.scheme, m_counts)
        )
        system = assemble(problem, field, points, boundary_weight=self.boundary_weight)
        if self.method == "igac":
            report = solve_square(system.matrix, system.rhs)
        else:
            report = solve_normal_equations(system.matrix, system.rhs)

        self.problem_ = problem
        self.points_ = points
        self.system_ = system
        self.solve_report_ = report
        self.field_ = coefficients_to_field(field, report.coefficients)
        self.n_unknowns_ = system.n_unknowns
        return self

    # -- prediction ----------------------------------------------------------

    def predict(self, theta) -> np.ndarray:
        """Solution values at parametric points, shape (n, components)."""
        self._check_fitted()
        pts = as_points(theta, self.field_.dim)
        return np.stack([self.field_.evaluate(p).value for p in pts])

    def physical_points(self, theta) -> np.ndarray:
        """Physical images of parametric points under the problem geometry."""
        self._check_fitted()
        pts = as_points(theta, self.field_.dim)
        return np.stack(
            [self.problem_.geometry.physical_point(p) for p in pts]
        )

    def _check_fitted(self):
        if not hasattr(self, "field_"):
            raise RuntimeError("this solver has not been fitted yet")
