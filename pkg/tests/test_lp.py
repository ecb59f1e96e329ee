import itertools

import numpy as np
import pytest
from scipy.optimize import linprog

from placeeval.errors import ArgumentError
from placeeval.lp import LinearProgram, LPStatus, solve_lp


def vertex_enumeration(c, A, b):
    """Minimum of c@x over all basic feasible solutions (bounded programs only)."""
    m, n = A.shape
    best = None
    for cols in itertools.combinations(range(n), m):
        B = A[:, cols]
        if abs(np.linalg.det(B)) < 1e-10:
            continue
        xb = np.linalg.solve(B, b)
        if np.all(xb >= -1e-10):
            val = float(c[list(cols)] @ xb)
            best = val if best is None else min(best, val)
    return best


def random_bounded_lp(seed, m=4, n=20):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(m, n))
    x0 = rng.uniform(0, 2, n) * (rng.uniform(size=n) < 0.5)
    b = A @ x0
    c = rng.uniform(0.1, 1.0, n)
    return c, A, b


def check_certificates(problem, sol):
    A, b = problem.A, problem.b
    assert np.all(sol.x >= 0)
    assert np.abs(A @ sol.x - b).max() <= 1e-9 * (1 + np.abs(b).max())
    # Reduced costs at the returned basis must be nonnegative.
    B = A[:, list(sol.basis)]
    duals = np.linalg.lstsq(B.T, problem.objective[list(sol.basis)], rcond=None)[0]
    reduced = problem.objective - A.T @ duals
    assert reduced.min() >= -1e-9


def test_single_equality():
    sol = solve_lp(LinearProgram([1.0], [[1.0]], [1.0]))
    assert sol.status is LPStatus.OPTIMAL
    assert sol.objective_value == pytest.approx(1.0)


def test_infeasible():
    sol = solve_lp(LinearProgram([0.0, 0.0], [[1.0, 1.0]], [-1.0]))
    assert sol.status is LPStatus.INFEASIBLE


def test_unbounded():
    # min -x1 s.t. x1 - x2 = 0
    sol = solve_lp(LinearProgram([-1.0, 0.0], [[1.0, -1.0]], [0.0]))
    assert sol.status is LPStatus.UNBOUNDED


def test_dimension_mismatch():
    with pytest.raises(ArgumentError):
        LinearProgram([1.0, 2.0], [[1.0, 1.0, 1.0]], [1.0])


def test_redundant_rows():
    A = np.array([[1.0, 1.0, 0.0], [2.0, 2.0, 0.0], [0.0, 1.0, 1.0]])
    b = np.array([1.0, 2.0, 1.0])
    c = np.array([1.0, 2.0, 0.5])
    sol = solve_lp(LinearProgram(c, A, b))
    assert sol.optimal
    ref = linprog(c, A_eq=A, b_eq=b, bounds=(0, None), method="highs")
    assert sol.objective_value == pytest.approx(ref.fun, abs=1e-9)


def test_degenerate_cycling_example():
    # Beale's example, which cycles under the textbook largest-coefficient rule.
    A = np.array([
        [0.25, -8, -1, 9, 1, 0, 0],
        [0.5, -12, -0.5, 3, 0, 1, 0],
        [0, 0, 1, 0, 0, 0, 1],
    ])
    b = np.array([0.0, 0.0, 1.0])
    c = np.array([-0.75, 20, -0.5, 6, 0, 0, 0])
    sol = solve_lp(LinearProgram(c, A, b))
    assert sol.optimal
    assert sol.objective_value == pytest.approx(-1.25, abs=1e-12)
    ref = linprog(c, A_eq=A, b_eq=b, bounds=(0, None), method="highs")
    assert ref.fun == pytest.approx(-1.25, abs=1e-9)


@pytest.mark.parametrize("seed", range(25))
def test_random_against_vertex_enumeration(seed):
    c, A, b = random_bounded_lp(seed)
    problem = LinearProgram(c, A, b)
    sol = solve_lp(problem)
    assert sol.optimal
    expected = vertex_enumeration(c, A, b)
    assert sol.objective_value == pytest.approx(expected, abs=1e-7)
    check_certificates(problem, sol)


@pytest.mark.parametrize("seed", range(10))
def test_random_against_highs(seed):
    rng = np.random.default_rng(100 + seed)
    m, n = 8, 30
    A = rng.uniform(-1, 1, (m, n))
    b = A @ rng.uniform(0, 1, n)
    c = rng.uniform(-0.2, 1.0, n)
    sol = solve_lp(LinearProgram(c, A, b))
    ref = linprog(c, A_eq=A, b_eq=b, bounds=(0, None), method="highs")
    if ref.status == 3:
        assert sol.status is LPStatus.UNBOUNDED
    else:
        assert sol.optimal
        assert sol.objective_value == pytest.approx(ref.fun, abs=1e-7)


def test_deterministic():
    c, A, b = random_bounded_lp(7)
    s1 = solve_lp(LinearProgram(c, A, b))
    s2 = solve_lp(LinearProgram(c, A, b))
    assert np.array_equal(s1.x, s2.x)
