"""Dense solvers and the closed-form flop model."""

import numpy as np
import pytest

from oracles import householder_qr_solve
from splinecol.errors import RankDeficientError, SingularSystemError
from splinecol.solvers import flop_cost_model, solve_normal_equations, solve_square


class TestSolveSquare:
    def test_identity(self):
        b = np.array([3.0, -1.0, 2.0])
        report = solve_square(np.eye(3), b)
        assert np.allclose(report.coefficients, b)
        assert report.method == "gauss"

    def test_diagonal(self):
        report = solve_square(np.array([[2.0, 0.0], [0.0, 4.0]]), np.array([2.0, 8.0]))
        assert np.allclose(report.coefficients, [1.0, 2.0])

    def test_random_well_conditioned(self):
        rng = np.random.default_rng(0)
        A = rng.normal(size=(50, 50)) + 10 * np.eye(50)
        b = rng.normal(size=50)
        report = solve_square(A, b)
        assert report.residual_norm < 1e-10 * np.linalg.norm(b)
        assert report.flop_estimate == pytest.approx(2 * 50**3 / 3)
        assert report.condition_estimate is not None

    def test_singular_raises(self):
        A = np.array([[1.0, 2.0], [2.0, 4.0]])
        with pytest.raises(SingularSystemError):
            solve_square(A, np.array([1.0, 2.0]))

    def test_rectangular_rejected(self):
        with pytest.raises(ValueError):
            solve_square(np.ones((3, 2)), np.ones(3))


class TestNormalEquations:
    def test_square_consistent_matches_gauss(self):
        rng = np.random.default_rng(1)
        A = rng.normal(size=(20, 20)) + 5 * np.eye(20)
        b = rng.normal(size=20)
        x_gauss = solve_square(A, b).coefficients
        x_ls = solve_normal_equations(A, b).coefficients
        assert np.linalg.norm(x_ls - x_gauss) < 1e-8 * np.linalg.norm(x_gauss)

    def test_mean_of_observations(self):
        report = solve_normal_equations(np.array([[1.0], [1.0]]), np.array([0.0, 2.0]))
        assert np.isclose(report.coefficients[0], 1.0)
        assert np.isclose(report.residual_norm, np.sqrt(2.0))

    def test_against_householder_oracle(self):
        rng = np.random.default_rng(2)
        A = rng.normal(size=(60, 20))
        b = rng.normal(size=60)
        x = solve_normal_equations(A, b).coefficients
        x_qr = householder_qr_solve(A, b)
        assert np.linalg.norm(x - x_qr) < 1e-8 * np.linalg.norm(x_qr)

    def test_flop_estimate(self):
        rng = np.random.default_rng(3)
        report = solve_normal_equations(rng.normal(size=(16, 10)), rng.normal(size=16))
        assert report.flop_estimate == pytest.approx(16 * 100 + 1000 / 3)

    def test_normal_residual_optimality(self):
        rng = np.random.default_rng(4)
        A = rng.normal(size=(80, 25))
        b = rng.normal(size=80)
        report = solve_normal_equations(A, b)
        assert report.normal_residual_norm <= 1e-8 * np.linalg.norm(A.T @ b)

    def test_least_squares_optimality_under_perturbation(self):
        rng = np.random.default_rng(5)
        A = rng.normal(size=(40, 12))
        b = rng.normal(size=40)
        x = solve_normal_equations(A, b).coefficients
        base = np.linalg.norm(A @ x - b) ** 2
        for _ in range(20):
            d = rng.normal(size=12)
            d *= 1e-4 / np.linalg.norm(d)
            assert np.linalg.norm(A @ (x + d) - b) ** 2 >= base - 1e-12

    def test_consistent_rows_keep_the_solution(self):
        rng = np.random.default_rng(6)
        x_star = rng.normal(size=15)
        A1 = rng.normal(size=(40, 15))
        sol1 = solve_normal_equations(A1, A1 @ x_star).coefficients
        A2 = np.vstack([A1, rng.normal(size=(20, 15))])
        sol2 = solve_normal_equations(A2, A2 @ x_star).coefficients
        assert np.linalg.norm(sol1 - x_star) < 1e-8 * np.linalg.norm(x_star)
        assert np.linalg.norm(sol2 - x_star) < 1e-8 * np.linalg.norm(x_star)

    def test_rank_deficient_reports_pivot(self):
        A = np.ones((6, 3))
        A[:, 2] = A[:, 0]  # duplicate column
        with pytest.raises(RankDeficientError) as err:
            solve_normal_equations(A, np.ones(6))
        assert err.value.pivot_index is not None

    def test_underdetermined_rejected(self):
        with pytest.raises(ValueError):
            solve_normal_equations(np.ones((2, 3)), np.ones(2))


class TestCostModel:
    """Golden values for the closed-form operation counts."""

    @pytest.mark.parametrize("p", [2, 3, 4])
    def test_scalar_tables(self, p):
        s = p + 1
        for d, first, second, basis, total in [
            (1, s, 3 * s, 35 * s + 1, 35 * s + 1),
            (2, 5 * s**2 + 4, 24 * s**2 + 16, 124 * s**2 + 33, 125 * s**2 + 33),
            (3, 12 * s**3 + 16, 87 * s**3 + 140, 302 * s**3 + 219, 304 * s**3 + 219),
        ]:
            model = flop_cost_model(d, p, 10, 12, "scalar")
            assert model.first_derivs == first
            assert model.second_derivs == second
            assert model.basis_total == basis
            assert model.point_total == total
            assert model.navier_global is None

    @pytest.mark.parametrize("p", [2, 3, 4])
    def test_vector_tables(self, p):
        s = p + 1
        for d, navier, total in [
            (1, s, 36 * s + 1),
            (2, 12 * s**2, 134 * s**2 + 33),
            (3, 21 * s**3, 323 * s**3 + 219),
        ]:
            model = flop_cost_model(d, p, 10, 12, "vector")
            assert model.navier_global == navier
            assert model.point_total == total

    def test_bracketed_variants(self):
        s = 4
        m1 = flop_cost_model(1, 3, 10, 12, "scalar", bracketed=True)
        assert m1.basis_total == 35 * s + 2
        m2 = flop_cost_model(2, 3, 10, 12, "vector", bracketed=True)
        assert m2.point_total == 136 * s**2 + 37
        assert m2.second_derivs == 24 * s**2 + 20
        m3 = flop_cost_model(3, 3, 10, 12, "scalar", bracketed=True)
        assert m3.first_derivs == 12 * s**3 + 20
        assert m3.basis_total == 302 * s**3 + 223

    def test_reference_examples(self):
        assert flop_cost_model(1, 3, 10, 16, "scalar").point_total == 141
        assert flop_cost_model(2, 3, 10, 16, "vector").point_total == 2177
        model = flop_cost_model(1, 3, 10, 16, "scalar")
        assert model.solve_igal == pytest.approx(16 * 100 + 1000 / 3)
        assert model.solve_igac == pytest.approx(2 * 1000 / 3)

    def test_solve_costs_scale_with_dimension(self):
        model = flop_cost_model(2, 3, 5, 7, "scalar")
        assert model.solve_igac == pytest.approx(2 * 5**6 / 3)
        assert model.solve_igal == pytest.approx(7**2 * 5**4 + 5**6 / 3)
        model = flop_cost_model(3, 3, 5, 7, "scalar")
        assert model.solve_igac == pytest.approx(2 * 5**9 / 3)
        assert model.solve_igal == pytest.approx(7**3 * 5**6 + 5**9 / 3)

    def test_invalid_inputs(self):
        with pytest.raises(ValueError):
            flop_cost_model(4, 3, 5, 7)
        with pytest.raises(ValueError):
            flop_cost_model(2, 3, 5, 7, "tensor")
