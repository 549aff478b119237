"""Standalone checks of the two-phase simplex solver."""

import numpy as np
import pytest

from bssched import SimplexError, solve_standard_form

from oracles import bfs_minimum

scipy_opt = pytest.importorskip("scipy.optimize")


def to_standard_with_slack(c, a_ub, b_ub):
    """min c@x, a_ub@x <= b_ub, x >= 0 in equality form."""
    m, n = a_ub.shape
    a = np.hstack([a_ub, np.eye(m)])
    c_full = np.concatenate([c, np.zeros(m)])
    return c_full, a, np.asarray(b_ub, dtype=float)


def test_simple_known_optimum():
    # max x + y over the unit simplex-ish box: x + y <= 1, x,y >= 0
    c, a, b = to_standard_with_slack(
        np.array([-1.0, -1.0]), np.array([[1.0, 1.0]]), np.array([1.0])
    )
    res = solve_standard_form(c, a, b)
    assert res.status == "optimal"
    assert res.objective == pytest.approx(-1.0, abs=1e-12)


def test_two_constraint_lp():
    # classic: min -3x - 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18
    c, a, b = to_standard_with_slack(
        np.array([-3.0, -5.0]),
        np.array([[1.0, 0.0], [0.0, 2.0], [3.0, 2.0]]),
        np.array([4.0, 12.0, 18.0]),
    )
    res = solve_standard_form(c, a, b)
    assert res.status == "optimal"
    assert res.objective == pytest.approx(-36.0, abs=1e-9)
    assert res.x[:2] == pytest.approx([2.0, 6.0], abs=1e-9)


def test_infeasible_detection():
    # x1 + x2 = 1 and x1 + x2 = 3 cannot both hold
    a = np.array([[1.0, 1.0], [1.0, 1.0]])
    b = np.array([1.0, 3.0])
    res = solve_standard_form(np.zeros(2), a, b)
    assert res.status == "infeasible"


def test_unbounded_detection():
    # min -x with only x - y = 0: x can grow without limit
    a = np.array([[1.0, -1.0]])
    b = np.array([0.0])
    res = solve_standard_form(np.array([-1.0, 0.0]), a, b)
    assert res.status == "unbounded"


def test_negative_rhs_is_normalized():
    # -x1 = -2 means x1 = 2
    a = np.array([[-1.0, 0.0]])
    b = np.array([-2.0])
    res = solve_standard_form(np.array([1.0, 0.0]), a, b)
    assert res.status == "optimal"
    assert res.x[0] == pytest.approx(2.0, abs=1e-12)


def test_redundant_rows_are_dropped():
    # duplicate equality rows leave a leftover artificial variable
    a = np.array([[1.0, 1.0], [1.0, 1.0], [1.0, -1.0]])
    b = np.array([1.0, 1.0, 0.0])
    res = solve_standard_form(np.array([1.0, 2.0]), a, b)
    assert res.status == "optimal"
    assert res.x == pytest.approx([0.5, 0.5], abs=1e-9)


def test_degenerate_problem_is_deterministic():
    a = np.array([[1.0, 1.0, 1.0], [1.0, 1.0, 0.0]])
    b = np.array([1.0, 1.0])
    c = np.array([1.0, 1.0, 1.0])
    first = solve_standard_form(c, a, b)
    second = solve_standard_form(c, a, b)
    assert first.status == second.status == "optimal"
    assert np.array_equal(first.x, second.x)
    assert np.array_equal(first.basis, second.basis)


def test_dimension_mismatch_raises():
    with pytest.raises(ValueError):
        solve_standard_form(np.zeros(2), np.zeros((1, 3)), np.zeros(1))


def test_pivot_cap_raises_rather_than_lying():
    a = np.array([[1.0, 1.0]])
    b = np.array([1.0])
    with pytest.raises(SimplexError):
        solve_standard_form(np.array([-1.0, 0.0]), a, b, max_iter=0)


def test_matches_bfs_enumeration_on_random_instances():
    rng = np.random.default_rng(7)
    for _ in range(40):
        m, n = int(rng.integers(1, 4)), int(rng.integers(2, 6))
        a_ub = rng.uniform(0.1, 2.0, size=(m, n))
        b_ub = rng.uniform(0.5, 3.0, size=m)
        c = rng.uniform(-2.0, 2.0, size=n)
        c_full, a, b = to_standard_with_slack(c, a_ub, b_ub)
        res = solve_standard_form(c_full, a, b)
        assert res.status == "optimal"  # box is bounded and nonempty
        best, _ = bfs_minimum(c_full, a, b)
        assert res.objective == pytest.approx(best, abs=1e-9)


def test_matches_scipy_on_random_instances_with_equalities():
    rng = np.random.default_rng(11)
    for _ in range(30):
        m, n = int(rng.integers(1, 4)), int(rng.integers(2, 7))
        a = rng.uniform(-1.0, 2.0, size=(m, n))
        x_feas = rng.uniform(0.0, 2.0, size=n)
        b = a @ x_feas  # feasible by construction
        c = rng.uniform(0.1, 2.0, size=n)  # positive costs keep it bounded
        res = solve_standard_form(c, a, b)
        ref = scipy_opt.linprog(c, A_eq=a, b_eq=b, bounds=(0, None), method="highs")
        assert res.status == "optimal" and ref.status == 0
        assert res.objective == pytest.approx(ref.fun, abs=1e-8)
        assert np.max(np.abs(a @ res.x - b)) < 1e-8
        assert np.all(res.x >= -1e-12)
