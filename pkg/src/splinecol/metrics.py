"""Error functionals for manufactured-solution benchmarks.

Relative solution and operator errors are L2-type integrals evaluated by
Gauss-Legendre quadrature per knot cell of the discrete field, weighted by
the geometry Jacobian; absolute error fields are sampled on a dense
parametric lattice mapped to physical space. Reductions are ordered and
deterministic so repeated runs produce identical numbers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import UndefinedMetricError
from .geometry import (
    lattice_pullbacks,
    lattice_push_gradient,
    lattice_push_hessian,
)
from .problems import BvpDefinition
from .splines import TensorSpline

DEFAULT_ABS_SAMPLES = {1: 1001, 2: 201, 3: 41}


def default_quad_order(field: TensorSpline) -> int:
    return max(field.degrees) + 2


def _gauss_axis(kv, order):
    """Quadrature nodes and weights over all nonempty cells of one direction."""
    nodes, wts = leggauss(order)
    axes, weights = [], []
    for a, b in kv.spans:
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        axes.append(mid + half * nodes)
        weights.append(half * wts)
    return np.concatenate(axes), np.concatenate(weights)


def quadrature_rule(field: TensorSpline, quad_order=None):
    """Per-direction node arrays and the flattened tensor weight vector."""
    if quad_order is None:
        quad_order = default_quad_order(field)
    if quad_order < max(field.degrees) + 1:
        raise ValueError(
            f"quad_order must be at least degree+1 = {max(field.degrees) + 1}"
        )
    axes, wts = zip(*(_gauss_axis(kv, quad_order) for kv in field.kvs))
    w = wts[0]
    for extra in wts[1:]:
        w = np.multiply.outer(w, extra)
    return list(axes), w.ravel(), quad_order


def _field_data(problem, field, axes, max_deriv):
    """Physical points, Jacobian weights and pushed field jets on a lattice."""
    pts, _, inv, det, second = lattice_pullbacks(problem.geometry, axes)
    jet = field.evaluate_lattice(axes, max_deriv=max_deriv)
    c = field.ncomp
    value = jet.value.reshape(-1, c)
    grad_x = hess_x = None
    if max_deriv >= 1:
        grad_t = jet.grad.reshape(-1, field.dim, c)
        grad_x = lattice_push_gradient(inv, grad_t)
    if max_deriv >= 2:
        hess_t = jet.hess.reshape(-1, field.dim, field.dim, c)
        hess_x = lattice_push_hessian(inv, second, grad_x, hess_t)
    return pts, np.abs(det), value, grad_x, hess_x


def field_l2_norm(problem: BvpDefinition, func, field: TensorSpline, quad_order=None):
    """L2 norm over the physical domain of a callable of physical points.

    The quadrature cells come from ``field``; ``func`` maps (N, d) points to
    (N,) or (N, c) values.
    """
    axes, w, _ = quadrature_rule(field, quad_order)
    pts, _, inv, det, _ = lattice_pullbacks(problem.geometry, axes)
    vals = np.asarray(func(pts), dtype=float)
    if vals.ndim == 1:
        vals = vals[:, None]
    return float(np.sqrt(np.sum((vals**2).sum(axis=1) * np.abs(det) * w)))


def relative_solution_error(
    problem: BvpDefinition, field: TensorSpline, quad_order=None
) -> float:
    """Relative L2 error of the discrete solution against the analytic one."""
    _require_analytic(problem)
    axes, w, _ = quadrature_rule(field, quad_order)
    pts, det, value, _, _ = _field_data(problem, field, axes, max_deriv=0)
    exact = np.asarray(problem.analytic_solution(pts), dtype=float)
    if exact.ndim == 1:
        exact = exact[:, None]
    dw = det * w
    num = np.sum(((exact - value) ** 2).sum(axis=1) * dw)
    den = np.sum((exact**2).sum(axis=1) * dw)
    if den == 0.0:
        raise UndefinedMetricError("analytic solution has zero L2 norm")
    return float(np.sqrt(num / den))


def relative_quantity_errors(
    problem: BvpDefinition, field: TensorSpline, quad_order=None
) -> dict:
    """Relative L2 error per reported output quantity (solution, stresses, ...)."""
    _require_analytic(problem)
    axes, w, _ = quadrature_rule(field, quad_order)
    needs_grad = any(qty.needs_gradient for qty in problem.quantities)
    pts, det, value, grad_x, _ = _field_data(
        problem, field, axes, max_deriv=1 if needs_grad else 0
    )
    dw = det * w
    out = {}
    for qty in problem.quantities:
        exact = np.asarray(qty.analytic(pts), dtype=float)
        approx = np.asarray(qty.extract(value, grad_x), dtype=float)
        den = np.sum(exact**2 * dw)
        if den == 0.0:
            raise UndefinedMetricError(f"quantity {qty.name!r} has zero L2 norm")
        out[qty.name] = float(np.sqrt(np.sum((exact - approx) ** 2 * dw) / den))
    return out


def relative_operator_error(
    problem: BvpDefinition, field: TensorSpline, quad_order=None
) -> float:
    """Relative L2 error of the differential operator applied to the solution.

    For a manufactured solution the reference operator values equal the
    source term, so this measures how far the discrete field is from
    satisfying the strong-form equation.
    """
    axes, w, _ = quadrature_rule(field, quad_order)
    pts, det, value, grad_x, hess_x = _field_data(problem, field, axes, max_deriv=2)
    exact = np.stack(
        [np.asarray(problem.source(p), dtype=float) for p in pts]
    ).reshape(len(pts), -1)
    approx = problem.operator.apply(value, grad_x, hess_x)
    dw = det * w
    den = np.sum((exact**2).sum(axis=1) * dw)
    if den == 0.0:
        raise UndefinedMetricError("operator of the analytic solution is identically zero")
    num = np.sum(((exact - approx) ** 2).sum(axis=1) * dw)
    return float(np.sqrt(num / den))


def absolute_error_field(problem: BvpDefinition, field: TensorSpline, sample_counts=None):
    """Pointwise absolute errors on a parametric lattice mapped to physical space.

    Returns (points, errors) with ``points`` of shape (N, d) in physical
    coordinates and ``errors`` a dict mapping quantity names to (N,) arrays.
    """
    _require_analytic(problem)
    d = problem.dim
    if sample_counts is None:
        sample_counts = (DEFAULT_ABS_SAMPLES[d],) * d
    sample_counts = tuple(int(c) for c in np.atleast_1d(sample_counts))
    if len(sample_counts) == 1 and d > 1:
        sample_counts = sample_counts * d
    axes = [
        np.linspace(kv.start, kv.end, m) for kv, m in zip(field.kvs, sample_counts)
    ]
    needs_grad = any(qty.needs_gradient for qty in problem.quantities)
    pts, _, value, grad_x, _ = _field_data(
        problem, field, axes, max_deriv=1 if needs_grad else 0
    )
    errors = {}
    for qty in problem.quantities:
        exact = np.asarray(qty.analytic(pts), dtype=float)
        approx = np.asarray(qty.extract(value, grad_x), dtype=float)
        errors[qty.name] = np.abs(exact - approx)
    return pts, errors


def _require_analytic(problem):
    if problem.analytic_solution is None:
        raise UndefinedMetricError(
            f"example {problem.example_id} carries no analytic solution"
        )


@dataclass(frozen=True)
class QuantityError:
    name: str
    relative: float
    max_abs: float


@dataclass(frozen=True)
class ErrorReport:
    """Errors of one solve, per reported quantity plus the operator error."""

    example_id: str
    quantities: tuple
    e_DT: float | None
    quadrature_order: int
    sample_points: np.ndarray
    sample_errors: dict

    @property
    def e_T(self) -> float:
        """Relative solution error of the primary quantity."""
        return self.quantities[0].relative

    @property
    def max_abs(self) -> float:
        return self.quantities[0].max_abs

    def quantity(self, name: str) -> QuantityError:
        for q in self.quantities:
            if q.name == name:
                return q
        raise KeyError(name)

    def to_dict(self, include_samples: bool = False) -> dict:
        out = {
            "example": self.example_id,
            "quadrature_order": self.quadrature_order,
            "e_DT": self.e_DT,
            "quantities": [
                {"name": q.name, "e_T": q.relative, "max_abs": q.max_abs}
                for q in self.quantities
            ],
        }
        if include_samples:
            out["samples"] = {
                "points": self.sample_points.tolist(),
                "errors": {k: v.tolist() for k, v in self.sample_errors.items()},
            }
        return out


def error_report(
    problem: BvpDefinition,
    field: TensorSpline,
    quad_order=None,
    sample_counts=None,
) -> ErrorReport:
    """Full error report: relative errors, operator error, absolute samples."""
    _, _, order = quadrature_rule(field, quad_order)
    rel = relative_quantity_errors(problem, field, order)
    pts, abs_errors = absolute_error_field(problem, field, sample_counts)
    try:
        e_dt = relative_operator_error(problem, field, order)
    except UndefinedMetricError:
        e_dt = None
    quantities = tuple(
        QuantityError(name, rel[name], float(abs_errors[name].max()))
        for name in (q.name for q in problem.quantities)
    )
    return ErrorReport(
        example_id=problem.example_id,
        quantities=quantities,
        e_DT=e_dt,
        quadrature_order=order,
        sample_points=pts,
        sample_errors=abs_errors,
    )
