import numpy as np
import pytest
from scipy.optimize import minimize_scalar

from sosperturb.parsing import parse
from sosperturb.polynomials import Polynomial, theta_big
from sosperturb.sdp import (ConstraintRow, SdpProblem, SolveStatus,
                            SolverSettings, dump_problem, eigendecompose,
                            min_eigenvalue, solve)
from sosperturb.sos import build_gram_system, build_moment_system


def scalar_problem(rhs=3.0):
    return SdpProblem.from_rows(
        [1], 0,
        [ConstraintRow({0: np.array([[1.0]])}, None, rhs)],
        {0: np.array([[1.0]])})


def completion_problem():
    # min trace(X) over 2x2 PSD X with X_12 = 1
    off = np.array([[0.0, 0.5], [0.5, 0.0]])
    return SdpProblem.from_rows(
        [2], 0, [ConstraintRow({0: off}, None, 1.0)], {0: np.eye(2)})


def random_feasible_problem(seed, sizes=(3, 2), m=4, n_free=0):
    """Problem with a known strictly feasible primal-dual pair, so the
    solver must report Optimal."""
    rng = np.random.default_rng(seed)
    mats = []
    for _ in range(m):
        row = []
        for nb in sizes:
            raw = rng.standard_normal((nb, nb))
            row.append(0.5 * (raw + raw.T))
        mats.append(row)
    X0 = []
    S0 = []
    for nb in sizes:
        raw = rng.standard_normal((nb, nb))
        X0.append(raw @ raw.T + 0.1 * np.eye(nb))
        raw = rng.standard_normal((nb, nb))
        S0.append(raw @ raw.T + 0.1 * np.eye(nb))
    y0 = rng.standard_normal(m)
    u0 = rng.standard_normal(n_free)
    F = rng.standard_normal((m, n_free)) if n_free else np.zeros((m, 0))
    rows = []
    for i in range(m):
        rhs = sum(float(np.tensordot(mats[i][b], X0[b])) for b in range(len(sizes)))
        rhs += float(F[i] @ u0)
        rows.append(ConstraintRow(
            {b: mats[i][b] for b in range(len(sizes))},
            F[i] if n_free else None, rhs))
    objective = {
        b: sum(y0[i] * mats[i][b] for i in range(m)) + S0[b]
        for b in range(len(sizes))
    }
    d = F.T @ y0 if n_free else None
    return SdpProblem.from_rows(sizes, n_free, rows, objective, d)


class TestSolve:
    def test_scalar_equality(self):
        sol = solve(scalar_problem())
        assert sol.status is SolveStatus.OPTIMAL
        assert sol.primal_objective == pytest.approx(3.0, abs=1e-7)
        assert sol.primal_blocks[0][0, 0] == pytest.approx(3.0, abs=1e-7)

    def test_psd_completion_matches_scalar_oracle(self):
        # min x + y s.t. xy >= 1, x,y >= 0 reduces to min_x x + 1/x
        oracle = minimize_scalar(lambda x: x + 1.0 / x, bounds=(0.01, 100),
                                 method="bounded")
        sol = solve(completion_problem())
        assert sol.status is SolveStatus.OPTIMAL
        assert sol.primal_objective == pytest.approx(oracle.fun, abs=1e-6)
        assert sol.primal_blocks[0] == pytest.approx(np.ones((2, 2)), abs=1e-5)

    def test_constant_negative_target_infeasible(self):
        f = parse("-1", 1)
        problem = build_gram_system(f, Polynomial.zero(1), 0)
        sol = solve(problem)
        assert sol.status is SolveStatus.PRIMAL_LIKELY_INFEASIBLE

    def test_free_variables_native(self):
        rows = [
            ConstraintRow({0: np.array([[1.0]])}, np.array([1.0]), 3.0),
            ConstraintRow({}, np.array([1.0]), 1.0),
        ]
        problem = SdpProblem.from_rows([1], 1, rows, {0: np.array([[1.0]])})
        sol = solve(problem)
        assert sol.status is SolveStatus.OPTIMAL
        assert sol.free_values[0] == pytest.approx(1.0, abs=1e-7)
        assert sol.primal_blocks[0][0, 0] == pytest.approx(2.0, abs=1e-6)

    @pytest.mark.parametrize("seed", range(8))
    def test_random_feasible_always_optimal(self, seed):
        problem = random_feasible_problem(seed)
        sol = solve(problem)
        assert sol.status is SolveStatus.OPTIMAL
        residual = problem.b - sum(
            np.einsum("ijk,jk->i", Ab, Xb)
            for Ab, Xb in zip(problem.A, sol.primal_blocks))
        assert np.max(np.abs(residual)) <= 1e-8 * (1 + np.max(np.abs(problem.b)))
        for block in sol.primal_blocks:
            assert min_eigenvalue(block) >= -1e-8

    @pytest.mark.parametrize("seed", range(3))
    def test_random_feasible_with_free_vars(self, seed):
        sol = solve(random_feasible_problem(seed, n_free=2))
        assert sol.status is SolveStatus.OPTIMAL

    def test_gap_within_tolerance_when_optimal(self):
        sol = solve(completion_problem())
        assert sol.gap <= SolverSettings().gap_tolerance

    def test_determinism(self):
        problem = random_feasible_problem(11)
        a = solve(problem)
        b = solve(problem)
        assert a.status is b.status
        assert a.primal_objective == b.primal_objective
        assert a.dual_objective == b.dual_objective
        assert a.iterations == b.iterations

    def test_block_size_cap(self):
        problem = scalar_problem()
        with pytest.raises(ValueError):
            solve(problem, SolverSettings(max_block_size=0))

    def test_weak_duality_at_every_iterate(self):
        fixtures = [
            scalar_problem(),
            completion_problem(),
            build_gram_system(parse("1 - x1^2", 1), theta_big(1, 3), 3),
            build_moment_system(parse("1 - x1^2", 1), Polynomial.monomial(1, (4,)), 2),
            random_feasible_problem(3),
        ]
        settings = SolverSettings(collect_trace=True)
        for problem in fixtures:
            sol = solve(problem, settings)
            for pobj, dobj in sol.trace:
                assert pobj >= dobj - 1e-7


class TestSettings:
    def test_tolerances_must_be_positive(self):
        with pytest.raises(ValueError):
            SolverSettings(gap_tolerance=0.0)
        with pytest.raises(ValueError):
            SolverSettings(feas_tolerance=-1.0)


class TestProblemConstruction:
    def test_duplicate_rows_removed(self):
        row = ConstraintRow({0: np.array([[1.0]])}, None, 3.0)
        dup = ConstraintRow({0: np.array([[1.0]])}, None, 3.0)
        problem = SdpProblem.from_rows([1], 0, [row, dup], {0: np.array([[1.0]])})
        assert problem.n_constraints == 1

    def test_contradictory_rows_kept(self):
        rows = [
            ConstraintRow({0: np.array([[1.0]])}, None, 3.0),
            ConstraintRow({0: np.array([[1.0]])}, None, 4.0),
        ]
        problem = SdpProblem.from_rows([1], 0, rows, {0: np.array([[1.0]])})
        assert problem.n_constraints == 2
        assert solve(problem).status is not SolveStatus.OPTIMAL

    def test_asymmetric_matrix_rejected(self):
        with pytest.raises(ValueError):
            SdpProblem.from_rows(
                [2], 0,
                [ConstraintRow({0: np.array([[0.0, 1.0], [0.0, 0.0]])}, None, 1.0)],
                {})

    def test_empty_rows_rejected(self):
        with pytest.raises(ValueError):
            SdpProblem.from_rows([1], 0, [], {})


class TestEigen:
    def test_identity(self):
        assert min_eigenvalue(np.eye(3)) == pytest.approx(1.0)
        w, _ = eigendecompose(np.eye(3))
        assert w == pytest.approx([1.0, 1.0, 1.0])

    def test_diagonal(self):
        w, _ = eigendecompose(np.diag([-1.0, 2.0]))
        assert w == pytest.approx([-1.0, 2.0])

    def test_two_by_two_characteristic_roots(self):
        # det([[2-t, 1], [1, 2-t]]) = t^2 - 4t + 3, roots via the quadratic
        # formula
        roots = sorted(np.roots([1.0, -4.0, 3.0]).real)
        w, _ = eigendecompose(np.array([[2.0, 1.0], [1.0, 2.0]]))
        assert w == pytest.approx(roots)

    def test_reconstruction(self):
        rng = np.random.default_rng(5)
        raw = rng.standard_normal((6, 6))
        mat = 0.5 * (raw + raw.T)
        w, Q = eigendecompose(mat)
        err = np.max(np.abs(Q @ np.diag(w) @ Q.T - mat))
        assert err <= 1e-9 * np.max(np.abs(mat))
        assert list(w) == sorted(w)

    def test_asymmetric_rejected(self):
        with pytest.raises(ValueError):
            min_eigenvalue(np.array([[0.0, 1.0], [0.0, 0.0]]))


class TestDump:
    def test_format_lines(self):
        problem = build_gram_system(parse("1 - x1^2", 1),
                                    Polynomial.monomial(1, (4,)), 2)
        text = dump_problem(problem)
        lines = text.splitlines()
        assert lines[0] == "blocks 3 1"
        assert lines[1] == "free 0"
        body = [ln for ln in lines[2:] if not ln.startswith("rhs")]
        for ln in body:
            parts = ln.split()
            assert len(parts) == 5
            float(parts[4])
        rhs = [ln for ln in lines if ln.startswith("rhs")]
        assert len(rhs) == problem.n_constraints

    def test_deterministic(self):
        problem = random_feasible_problem(2)
        assert dump_problem(problem) == dump_problem(problem)
