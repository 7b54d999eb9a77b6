import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

from nwidths import InfeasibleError, LpProblem, UnboundedError, lp_solve


def test_textbook_maximum():
    p = LpProblem([3, 5], A_ub=[[1, 0], [0, 2], [3, 2]], b_ub=[4, 12, 18])
    res = lp_solve(p)
    assert res.value == pytest.approx(36.0)
    np.testing.assert_allclose(res.x, [2, 6], atol=1e-10)


def test_minimisation_with_equalities_and_free_variables():
    p = LpProblem([1, 1], A_eq=[[1, -1]], b_eq=[1], sense="min",
                  bounds=[(None, None), (-2, None)])
    res = lp_solve(p)
    assert res.value == pytest.approx(-3.0)
    np.testing.assert_allclose(res.x, [-1, -2], atol=1e-10)


def test_infeasible_and_unbounded():
    with pytest.raises(InfeasibleError):
        lp_solve(LpProblem([1], A_ub=[[1]], b_ub=[-1]))
    with pytest.raises(UnboundedError):
        lp_solve(LpProblem([1, 0], A_ub=[[-1, 1]], b_ub=[1]))


def test_degenerate_problem_terminates():
    # Beale's cycling example; Bland's rule must still finish
    c = [0.75, -20, 0.5, -6]
    A = [[0.25, -8, -1, 9], [0.5, -12, -0.5, 3], [0, 0, 1, 0]]
    res = lp_solve(LpProblem(c, A_ub=A, b_ub=[0, 0, 1]))
    assert res.value == pytest.approx(1.25)


def test_bad_arguments():
    with pytest.raises(ValueError):
        LpProblem([1, 2], sense="maximise")
    with pytest.raises(ValueError):
        LpProblem([1, 2], bounds=[(0, None)])


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(2, 5), st.integers(1, 6))
def test_agrees_with_scipy_on_random_bounded_problems(seed, n, m):
    rng = np.random.default_rng(seed)
    c = rng.standard_normal(n)
    A = rng.standard_normal((m, n))
    b = rng.uniform(0.1, 2.0, m)
    bounds = [(-1.0, 1.0)] * n
    ref = linprog(-c, A_ub=A, b_ub=b, bounds=bounds)
    assert ref.status == 0
    res = lp_solve(LpProblem(c, A_ub=A, b_ub=b, bounds=bounds))
    assert res.value == pytest.approx(-ref.fun, abs=1e-8)
    assert np.all(A @ res.x <= b + 1e-8)
    assert np.all(np.abs(res.x) <= 1 + 1e-9)
