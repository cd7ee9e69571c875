"""Collocation point generation and system assembly."""

import numpy as np
import pytest

from oracles import naive_basis
from splinecol.collocation import (
    CollocationScheme,
    assemble,
    build_field,
    build_field_from_knots,
    coefficients_to_field,
    collocation_knot_vector,
    empty_cells,
    generate_collocation_points,
)
from splinecol.errors import (
    AssemblyError,
    InvalidSchemeError,
    PreconditionError,
)
from splinecol.geometry import GeometryMap
from splinecol.problems import (
    example_1d_dirichlet,
    example_1d_mixed,
    example_2d_annulus,
    example_beam,
)
from splinecol.splines import KnotGrid, KnotVector, TensorSpline

CUBIC = KnotVector([0, 0, 0, 0, 1, 1, 1, 1], 3)


class TestPointGeneration:
    def test_1d_greville_16_of_10(self):
        field = build_field(example_1d_dirichlet().geometry, (10,))
        pts = generate_collocation_points(
            field.kvs, CollocationScheme("greville", (16,))
        )
        assert pts.n_points == 16
        assert pts.n_interior == 14
        assert pts.boundary[:, 0].tolist() == [0.0, 1.0]

    def test_greville_equal_counts_is_interpolatory_set(self):
        pts = generate_collocation_points((CUBIC,), CollocationScheme("greville", (4,)))
        axis = np.sort(np.concatenate([pts.interior[:, 0], pts.boundary[:, 0]]))
        assert np.allclose(axis, [0, 1 / 3, 2 / 3, 1])

    def test_2d_uniform_boundary_split(self):
        pts = generate_collocation_points(
            (CUBIC, CUBIC), CollocationScheme("uniform", (4, 4))
        )
        assert pts.n_boundary == 12
        assert pts.n_interior == 4

    def test_counts_below_basis_rejected(self):
        with pytest.raises(InvalidSchemeError):
            generate_collocation_points((CUBIC,), CollocationScheme("greville", (3,)))

    def test_unknown_scheme_kind(self):
        with pytest.raises(InvalidSchemeError):
            CollocationScheme("chebyshev", (4,))

    def test_corner_faces_recorded(self):
        pts = generate_collocation_points(
            (CUBIC, CUBIC), CollocationScheme("uniform", (3, 3))
        )
        corner_idx = [i for i, p in enumerate(pts.boundary) if tuple(p) == (0.0, 0.0)]
        assert pts.boundary_faces[corner_idx[0]] == (0, 2)

    def test_collocation_knot_vector_uniform_interior(self):
        kv = collocation_knot_vector(CUBIC, 16)
        assert kv.n_basis == 16
        assert np.allclose(np.diff(kv.breakpoints), 1.0 / 13.0)

    def test_cell_coverage_warning(self):
        field = build_field(example_1d_dirichlet().geometry, (10,))
        with pytest.warns(UserWarning, match="no collocation point"):
            generate_collocation_points(
                field.kvs,
                CollocationScheme("uniform", (2,)),
                require_cell_coverage=True,
            )

    def test_empty_cells_detects_gaps(self):
        field = build_field(example_1d_dirichlet().geometry, (10,))
        pts = generate_collocation_points(field.kvs, CollocationScheme("uniform", (2,)))
        empty = empty_cells(pts, KnotGrid(field.kvs))
        assert len(empty) == 5  # the endpoints cover only the outer cells

    def test_dense_set_covers_all_cells(self):
        field = build_field(example_2d_annulus().geometry, (8, 8))
        pts = generate_collocation_points(field.kvs, CollocationScheme("greville", (10, 10)))
        assert empty_cells(pts, KnotGrid(field.kvs)) == []


class TestBuildField:
    def test_counts_from_benchmark_setups(self):
        assert build_field(example_1d_dirichlet().geometry, (10,)).n_coeffs == 10
        f2 = build_field(example_2d_annulus().geometry, (15, 15))
        assert f2.n_coeffs == 225
        from splinecol.problems import example_3d_cube

        f3 = build_field(example_3d_cube().geometry, (7, 7, 7))
        assert f3.n_coeffs == 343

    def test_weights_follow_refined_geometry(self):
        # The field copies knot vectors and weights from the refined
        # geometry, giving a rational solution space over rational patches.
        geo = example_2d_annulus().geometry
        field = build_field(geo, (8, 8))
        refined = geo.spline.refine_uniform((4, 4))
        assert np.allclose(field.weights, refined.weights)
        assert field.kvs == refined.kvs

    def test_degree_precondition(self):
        geo = example_1d_dirichlet().geometry
        with pytest.raises(PreconditionError):
            build_field(geo, (10,), operator_order=3)

    def test_counts_below_geometry_rejected(self):
        geo = example_2d_annulus().geometry
        with pytest.raises(PreconditionError):
            build_field(geo, (3, 3))

    def test_explicit_knots(self):
        field = build_field_from_knots(
            example_1d_dirichlet().geometry, (0.25, 0.5, 0.75)
        )
        assert field.kvs[0].n_basis == 7


class TestAssembly:
    def test_shape_16x10(self):
        prob = example_1d_dirichlet()
        field = build_field(prob.geometry, (10,))
        pts = generate_collocation_points(field.kvs, CollocationScheme("greville", (16,)))
        system = assemble(prob, field, pts)
        assert system.shape == (16, 10)
        kinds = [m.kind for m in system.row_meta]
        assert kinds.count("interior") == 14
        assert kinds.count("boundary") == 2

    def test_square_when_counts_match(self):
        prob = example_2d_annulus()
        field = build_field(prob.geometry, (6, 6))
        pts = generate_collocation_points(field.kvs, CollocationScheme("greville", (6, 6)))
        system = assemble(prob, field, pts)
        assert system.is_square and system.shape == (36, 36)

    def test_beam_square_with_pins(self):
        prob = example_beam()
        field = build_field(prob.geometry, (7, 7), components=2)
        pts = generate_collocation_points(field.kvs, CollocationScheme("greville", (7, 7)))
        system = assemble(prob, field, pts)
        assert system.shape == (98, 98)
        assert sum(m.kind == "constraint" for m in system.row_meta) == 3

    def test_rows_encode_the_operator(self):
        # A row dotted with coefficients equals the operator applied to the
        # corresponding field at that row's point.
        rng = np.random.default_rng(0)
        prob = example_2d_annulus()
        field = build_field(prob.geometry, (7, 7))
        pts = generate_collocation_points(field.kvs, CollocationScheme("greville", (9, 9)))
        system = assemble(prob, field, pts)
        coeffs = rng.normal(size=(49,))
        trial = coefficients_to_field(field, coeffs)
        geo = prob.geometry
        for row in rng.integers(0, len(system.rhs), 12):
            meta = system.row_meta[row]
            if meta.kind != "interior":
                continue
            theta = np.array(meta.point)
            pb = geo.pullback(theta)
            jet = trial.evaluate(theta, 2)
            from splinecol.geometry import push_gradient, push_hessian

            gx = push_gradient(pb, jet.grad)
            hx = push_hessian(pb, gx, jet.hess)
            expected = prob.operator.apply(
                jet.value[None], gx[None], hx[None]
            )[0, meta.component]
            got = system.matrix[row] @ coeffs
            assert np.isclose(got, expected, atol=1e-10 * max(1, abs(expected)))

    def test_row_linearity(self):
        rng = np.random.default_rng(1)
        prob = example_1d_dirichlet()
        field = build_field(prob.geometry, (8,))
        pts = generate_collocation_points(field.kvs, CollocationScheme("greville", (12,)))
        system = assemble(prob, field, pts)
        x1, x2 = rng.normal(size=(2, 8))
        a, b = 0.7, -2.3
        assert np.allclose(
            system.matrix @ (a * x1 + b * x2),
            a * (system.matrix @ x1) + b * (system.matrix @ x2),
            atol=1e-10,
        )

    def test_interior_row_support_blocks(self):
        # Nonzeros of each interior row sit exactly on the span's local
        # support block (the discrete counterpart of operator and field
        # sharing knot intervals).
        prob = example_1d_dirichlet()
        field = build_field(prob.geometry, (10,))
        pts = generate_collocation_points(field.kvs, CollocationScheme("greville", (16,)))
        system = assemble(prob, field, pts)
        kv = field.kvs[0]
        for row, meta in enumerate(system.row_meta):
            if meta.kind != "interior":
                continue
            span = kv.find_span(meta.point[0])
            block = set(range(span - kv.degree, span + 1))
            nz = set(np.nonzero(system.matrix[row])[0])
            assert nz <= block

    def test_boundary_coverage(self):
        prob = example_2d_annulus()
        field = build_field(prob.geometry, (6, 6))
        pts = generate_collocation_points(field.kvs, CollocationScheme("greville", (8, 8)))
        system = assemble(prob, field, pts)
        faces = {m.face for m in system.row_meta if m.kind == "boundary"}
        assert faces == {0, 1, 2, 3}

    def test_neumann_row_is_the_end_derivative(self):
        prob = example_1d_mixed()
        field = build_field(prob.geometry, (8,))
        pts = generate_collocation_points(field.kvs, CollocationScheme("uniform", (10,)))
        system = assemble(prob, field, pts, boundary_weight=1.0)
        row = next(
            i for i, m in enumerate(system.row_meta)
            if m.kind == "boundary" and m.point == (1.0,)
        )
        rng = np.random.default_rng(3)
        coeffs = rng.normal(size=8)
        trial = coefficients_to_field(field, coeffs)
        deriv = trial.evaluate([1.0], 1).grad[0, 0]
        assert np.isclose(system.matrix[row] @ coeffs, deriv, atol=1e-12)
        assert np.isclose(system.rhs[row], 2 * np.pi)

    def test_interpolated_analytic_solution_nearly_solves_the_system(self):
        # Interpolate sin(2 pi x) at the Greville sites through a basis
        # matrix built with the naive recursion (independent oracle), then
        # check the assembled equations are nearly satisfied.
        prob = example_1d_dirichlet()
        n = 80
        field = build_field(prob.geometry, (n,))
        kv = field.kvs[0]
        sites = kv.greville_abscissae()
        B = np.zeros((n, n))
        for r, u in enumerate(sites):
            uu = min(u, 1.0 - 1e-12)  # naive recursion is half-open at 1
            B[r] = [naive_basis(kv.knots, 3, i, uu) for i in range(n)]
        coeffs = np.linalg.solve(B, np.sin(2 * np.pi * sites))
        pts = generate_collocation_points(field.kvs, CollocationScheme("greville", (n,)))
        system = assemble(prob, field, pts, boundary_weight=1.0)
        residual = system.matrix @ coeffs - system.rhs
        assert np.linalg.norm(residual) < 1e-3 * np.linalg.norm(system.rhs)

    def test_singular_geometry_names_the_point(self):
        from dataclasses import replace

        collapsed = GeometryMap(
            TensorSpline.polynomial((CUBIC,), np.zeros(4))
        )
        prob = replace(example_1d_dirichlet(), geometry=collapsed)
        field = build_field_from_knots(collapsed, ())
        pts = generate_collocation_points(field.kvs, CollocationScheme("greville", (4,)))
        with pytest.raises(AssemblyError, match="point"):
            assemble(prob, field, pts)

    def test_component_interleaving(self):
        prob = example_beam()
        field = build_field(prob.geometry, (7, 7), components=2)
        pts = generate_collocation_points(field.kvs, CollocationScheme("greville", (9, 9)))
        system = assemble(prob, field, pts)
        comps = [m.component for m in system.row_meta[: 2 * pts.n_interior]]
        assert comps[:6] == [0, 1, 0, 1, 0, 1]
