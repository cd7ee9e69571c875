"""Collocation point generation and strong-form system assembly.

Turns a boundary value problem plus a discrete unknown field into the
dense linear system: one block of interior operator rows followed by one
block of boundary-condition rows, both in lexicographic point order with
field components interleaved per point. With as many collocation points
as unknowns the system is square (interpolatory collocation); with more
points it is overdetermined and meant for a least-squares solve.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (
    AssemblyError,
    InvalidSchemeError,
    PreconditionError,
    SingularGeometryError,
)
from .geometry import GeometryMap, push_gradient, push_hessian
from .problems import BvpDefinition
from .splines import KnotGrid, KnotVector, TensorSpline

SCHEME_KINDS = ("greville", "uniform")


@dataclass(frozen=True)
class CollocationScheme:
    """How collocation points are placed: Greville abscissae or uniform."""

    kind: str
    counts: tuple[int, ...]

    def __post_init__(self):
        if self.kind not in SCHEME_KINDS:
            raise InvalidSchemeError(
                f"unknown scheme kind {self.kind!r}; expected one of {SCHEME_KINDS}"
            )
        counts = tuple(int(c) for c in np.atleast_1d(self.counts))
        if any(c < 2 for c in counts):
            raise InvalidSchemeError("need at least 2 collocation points per direction")
        object.__setattr__(self, "counts", counts)


@dataclass(frozen=True)
class CollocationSet:
    """Interior and boundary collocation points on a tensor lattice.

    ``boundary_faces`` lists, per boundary point, the ids of all parametric
    faces the point lies on (corners and edges touch several).
    """

    axes: tuple[np.ndarray, ...]
    interior: np.ndarray
    boundary: np.ndarray
    boundary_faces: tuple[tuple[int, ...], ...]

    @property
    def dim(self) -> int:
        return len(self.axes)

    @property
    def n_interior(self) -> int:
        return len(self.interior)

    @property
    def n_boundary(self) -> int:
        return len(self.boundary)

    @property
    def n_points(self) -> int:
        return self.n_interior + self.n_boundary

    def all_points(self) -> np.ndarray:
        return np.vstack([self.interior, self.boundary])


def collocation_knot_vector(kv: KnotVector, m: int) -> KnotVector:
    """Knot vector whose Greville abscissae serve as m collocation sites.

    The collocation knot vector is built by uniform interior-knot insertion
    over the field's parametric range, independent of the field's own
    interior knots. For fields that were themselves uniformly refined this
    reproduces classical interpolatory collocation at the field's Greville
    abscissae when m equals the basis count. Alternatives that adapt to the
    field knots (midpoint refinement, or the field knots themselves on
    non-uniform discretizations) produce unevenly spaced sites that cost
    about an order of magnitude of least-squares accuracy.
    """
    if m < kv.n_basis:
        raise InvalidSchemeError(
            f"Greville count {m} below the basis count {kv.n_basis}"
        )
    p = kv.degree
    lo, hi = kv.start, kv.end
    n_int = m - p - 1
    interior = lo + np.arange(1, n_int + 1) * (hi - lo) / (n_int + 1)
    knots = np.concatenate([np.full(p + 1, lo), interior, np.full(p + 1, hi)])
    return KnotVector(knots, p)


def generate_collocation_points(
    kvs, scheme: CollocationScheme, *, require_cell_coverage: bool = False
) -> CollocationSet:
    """Tensor-product collocation points for a field on knot vectors ``kvs``.

    Greville placement takes the Greville abscissae of a per-direction
    collocation knot vector (see :func:`collocation_knot_vector`); uniform
    placement spaces points evenly including the endpoints. A point is a
    boundary point iff any coordinate sits at a parametric extreme.
    """
    kvs = tuple(kvs)
    if len(scheme.counts) != len(kvs):
        raise InvalidSchemeError(
            f"scheme has {len(scheme.counts)} counts for {len(kvs)} directions"
        )
    axes = []
    for kv, m in zip(kvs, scheme.counts):
        if scheme.kind == "greville":
            axes.append(collocation_knot_vector(kv, m).greville_abscissae())
        else:
            axes.append(np.linspace(kv.start, kv.end, m))
    axes = tuple(axes)

    lows = [kv.start for kv in kvs]
    highs = [kv.end for kv in kvs]
    interior, boundary, faces = [], [], []
    for point in itertools.product(*axes):
        touched = []
        for a, u in enumerate(point):
            if u == lows[a]:
                touched.append(2 * a)
            elif u == highs[a]:
                touched.append(2 * a + 1)
        if touched:
            boundary.append(point)
            faces.append(tuple(touched))
        else:
            interior.append(point)

    dim = len(kvs)
    cset = CollocationSet(
        axes=axes,
        interior=np.array(interior, dtype=float).reshape(-1, dim),
        boundary=np.array(boundary, dtype=float).reshape(-1, dim),
        boundary_faces=tuple(faces),
    )
    if require_cell_coverage:
        empty = empty_cells(cset, KnotGrid(kvs))
        if empty:
            warnings.warn(
                f"{len(empty)} knot cells contain no collocation point; "
                "the consistency hypothesis does not hold for this scheme",
                stacklevel=2,
            )
    return cset


def empty_cells(points: CollocationSet, grid: KnotGrid):
    """Knot cells (as per-direction span indices) without any collocation point.

    A point on a shared cell face counts for every adjacent cell.
    """
    per_dir_hits = []
    for axis, kv in enumerate(grid.kvs):
        bp = kv.breakpoints
        spans = len(bp) - 1
        hits = np.zeros((spans, len(points.axes[axis])), dtype=bool)
        for j, u in enumerate(points.axes[axis]):
            for s in range(spans):
                if bp[s] <= u <= bp[s + 1]:
                    hits[s, j] = True
        per_dir_hits.append(hits)

    # A lattice point covers a cell iff each coordinate covers the matching
    # per-direction span, so coverage separates by direction.
    empty = []
    for cell in itertools.product(*(range(h.shape[0]) for h in per_dir_hits)):
        if not all(per_dir_hits[a][cell[a]].any() for a in range(len(cell))):
            empty.append(cell)
    return empty


def build_field(
    geometry: GeometryMap, counts, components: int = 1, operator_order: int = 2
) -> TensorSpline:
    """Unknown solution field sharing the geometry's refined knot vectors.

    The geometry spline is refined by uniform knot insertion to the
    requested per-direction basis counts; the field copies the refined knot
    vectors and weights (a rational field over a rational geometry) and
    starts with zero coefficients.
    """
    counts = tuple(int(c) for c in np.atleast_1d(counts))
    if len(counts) == 1 and geometry.dim > 1:
        counts = counts * geometry.dim
    if len(counts) != geometry.dim:
        raise ValueError(f"expected {geometry.dim} basis counts, got {counts}")
    if min(kv.degree for kv in geometry.kvs) <= operator_order:
        raise PreconditionError(
            "field degree must exceed the operator order in every direction"
        )
    refined = geometry.spline
    for axis, target in enumerate(counts):
        have = refined.kvs[axis].n_basis
        if target < have:
            raise PreconditionError(
                f"requested {target} basis functions in direction {axis}, "
                f"geometry already has {have}"
            )
        refined = refined.refine_uniform(
            tuple(target - have if a == axis else 0 for a in range(geometry.dim))
        )
    shape = tuple(kv.n_basis for kv in refined.kvs)
    return TensorSpline(refined.kvs, np.zeros(shape + (components,)), refined.weights)


def build_field_from_knots(
    geometry: GeometryMap, interior_knots, components: int = 1
) -> TensorSpline:
    """Unknown field obtained by inserting explicit interior knots per direction."""
    interior_knots = tuple(interior_knots)
    if geometry.dim == 1 and (
        not interior_knots or np.ndim(interior_knots[0]) == 0
    ):
        interior_knots = (interior_knots,)
    refined = geometry.spline
    for axis, knots in enumerate(interior_knots):
        for u in knots:
            refined = refined.insert_knot(axis, float(u))
    shape = tuple(kv.n_basis for kv in refined.kvs)
    return TensorSpline(refined.kvs, np.zeros(shape + (components,)), refined.weights)


@dataclass(frozen=True)
class RowMeta:
    """Provenance of one assembled row."""

    point: tuple
    kind: str  # "interior" | "boundary" | "constraint"
    component: int
    face: int | None = None


@dataclass(frozen=True)
class CollocationSystem:
    """Dense collocation matrix with right-hand side and row provenance."""

    matrix: np.ndarray
    rhs: np.ndarray
    row_meta: tuple
    n_unknowns: int

    @property
    def shape(self):
        return self.matrix.shape

    @property
    def is_square(self) -> bool:
        return self.matrix.shape[0] == self.matrix.shape[1]


def _owning_condition(problem: BvpDefinition, faces):
    """Boundary condition owning a point that touches ``faces``.

    Dirichlet conditions win over derivative-type ones; remaining ties go
    to the lowest face id. This keeps corner points from emitting duplicate
    rows and keeps the interpolatory (square) case square.
    """
    conds = [problem.condition_for_face(f) for f in faces]
    dirichlet = [bc for bc in conds if bc.kind == "dirichlet"]
    pool = dirichlet if dirichlet else conds
    return min(pool, key=lambda bc: bc.face)


def assemble(
    problem: BvpDefinition,
    field: TensorSpline,
    points: CollocationSet,
    boundary_weight="auto",
) -> CollocationSystem:
    """Assemble the strong-form collocation system A x = b.

    Interior rows impose the differential operator, boundary rows the
    owning face's condition scaled by ``boundary_weight``; point
    constraints then replace the matching component row of their nearest
    collocation point.

    ``boundary_weight="auto"`` scales every boundary row by the mean
    2-norm of the interior rows. Interior operator rows carry second
    derivatives of the basis and grow like the squared mesh density, so an
    unweighted least-squares stack would let them drown out the O(1)
    boundary rows; equalizing the scales keeps the boundary conditions
    enforced as the point count grows. A square system's solution is
    unaffected by the scaling.
    """
    c = problem.field_components
    if field.ncomp != c:
        raise PreconditionError(
            f"field has {field.ncomp} components, problem needs {c}"
        )
    if min(field.degrees) <= problem.operator.order:
        raise PreconditionError(
            "field degree must exceed the operator order in every direction"
        )
    geometry = problem.geometry
    n_cols = field.n_coeffs * c
    rows_interior = points.n_interior * c
    rows_boundary = sum(
        _owning_condition(problem, faces).n_rows for faces in points.boundary_faces
    )
    A = np.zeros((rows_interior + rows_boundary, n_cols))
    b = np.zeros(rows_interior + rows_boundary)
    meta = []

    # Interior operator rows.
    row = 0
    row_of_point = {}
    for theta in points.interior:
        try:
            pb = geometry.pullback(theta)
        except SingularGeometryError as exc:
            raise AssemblyError(
                f"singular geometry at interior point {tuple(theta)}"
            ) from exc
        cols, val, grad_t, hess_t = field.basis_jets(theta)
        grad_x = push_gradient(pb, grad_t[:, :, None])[..., 0]
        hess_x = push_hessian(pb, grad_x[:, :, None], hess_t[:, :, :, None])[..., 0]
        fval = np.asarray(problem.source(pb.point_physical), dtype=float)
        for comp in range(c):
            rows = problem.operator.basis_rows(val, grad_x, hess_x, comp)
            for i in range(c):
                A[row + i, cols * c + comp] = rows[i]
        for i in range(c):
            b[row + i] = fval[i]
            meta.append(RowMeta(tuple(theta), "interior", i))
        row_of_point[tuple(theta)] = row
        row += c

    if boundary_weight == "auto":
        norms = np.linalg.norm(A[:rows_interior], axis=1)
        boundary_weight = float(norms.mean()) if rows_interior else 1.0
    else:
        boundary_weight = float(boundary_weight)

    # Boundary condition rows.
    for theta, faces in zip(points.boundary, points.boundary_faces):
        bc = _owning_condition(problem, faces)
        try:
            pb = geometry.pullback(theta)
        except SingularGeometryError as exc:
            raise AssemblyError(
                f"singular geometry at boundary point {tuple(theta)}"
            ) from exc
        normal = geometry.boundary_normal(pb, bc.axis, bc.side)
        cols, val, grad_t, _ = field.basis_jets(theta)
        grad_x = push_gradient(pb, grad_t[:, :, None])[..., 0]
        gval = bc.rhs(pb.point_physical)
        for comp in range(c):
            rows = bc.rows_for_basis(normal, val, grad_x, comp)
            for i in range(bc.n_rows):
                A[row + i, cols * c + comp] = boundary_weight * rows[i]
        for i in range(bc.n_rows):
            b[row + i] = boundary_weight * gval[i]
            meta.append(RowMeta(tuple(theta), "boundary", i, face=bc.face))
        row_of_point[tuple(theta)] = row
        row += bc.n_rows

    # Point constraints replace the matching component row of the nearest point.
    all_points = points.all_points()
    for pc in problem.point_constraints:
        target = np.asarray(pc.theta, dtype=float)
        dist = np.linalg.norm(all_points - target, axis=1)
        theta = tuple(all_points[int(np.argmin(dist))])
        base = row_of_point[theta]
        r = base + pc.component
        pb = geometry.pullback(theta)
        cols, val, _, _ = field.basis_jets(theta)
        A[r, :] = 0.0
        A[r, cols * c + pc.component] = boundary_weight * val
        b[r] = boundary_weight * float(pc.value(pb.point_physical))
        meta[r] = RowMeta(theta, "constraint", pc.component)

    return CollocationSystem(
        matrix=A, rhs=b, row_meta=tuple(meta), n_unknowns=n_cols
    )


def coefficients_to_field(field: TensorSpline, x: np.ndarray) -> TensorSpline:
    """Reshape a solved coefficient vector back onto the field's tensor layout."""
    c = field.ncomp
    coeffs = np.asarray(x, dtype=float).reshape(field.shape + (c,))
    return field.with_coefficients(coeffs)
