import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cloudassoc.gap import InstanceTooLargeError, InvalidInputError
from cloudassoc.knapsack import (GAMMA, SUBROUTINES, KnapsackProblem, select_top_k, solve_exact,
                                 solve_greedy)
from oracles import enumerate_knapsack


def kp(profits, weights, capacity):
    return KnapsackProblem(np.array(profits, float), np.array(weights), capacity)


@pytest.mark.parametrize("profits, weights, cap, selected, value", [
    ([5, 3, 2], [1, 1, 1], 1, (0,), 5),
    ([6, 5, 5], [3, 2, 2], 4, (1, 2), 10),
    ([-1, -2], [1, 4], 5, (), 0),
    ([], [], 3, (), 0),
    ([4, 4], [1, 1], 1, (0,), 4),
])
def test_exact_examples(profits, weights, cap, selected, value):
    assert enumerate_knapsack(profits, weights, cap) == (value, selected)
    sol = solve_exact(kp(profits, weights, cap))
    assert sol.selected == selected
    assert sol.value == value


def test_greedy_best_single_item_correction():
    assert enumerate_knapsack([10, 9], [5, 4], 5) == (10, (0,))
    sol = solve_greedy(kp([10, 9], [5, 4], 5))
    assert sol.selected == (0,) and sol.value == 10


def test_greedy_everything_fits():
    sol = solve_greedy(kp([5, 3, 2], [1, 1, 1], 3))
    assert sol.selected == (0, 1, 2) and sol.value == 10


def test_greedy_half_bound_example():
    assert solve_greedy(kp([6, 5, 5], [3, 2, 2], 4)).value >= 0.5 * 10


def test_greedy_ignores_nonpositive_and_oversize():
    assert solve_greedy(kp([0, -3, 8], [1, 1, 9], 4)).selected == ()


@pytest.mark.parametrize("profits, k, selected, value", [
    ([4, -1, 6, 1], 2, (0, 2), 10),
    ([-4, -1, -6], 3, (), 0),
    ([5, 5, 2], 1, (0,), 5),
    ([0, 3], 2, (1,), 3),
])
def test_top_k_examples(profits, k, selected, value):
    sol = select_top_k(profits, k)
    assert sol.selected == selected and sol.value == value


def test_dp_cap():
    with pytest.raises(InstanceTooLargeError):
        solve_exact(kp([1.0] * 10, [1] * 10, 100), cap=999)


@pytest.mark.parametrize("args", [
    ([1, 2], [1], 3), ([1], [0], 3), ([1], [1.5], 3), ([1], [1], 0),
])
def test_problem_validation(args):
    with pytest.raises(InvalidInputError):
        kp(*args)


def test_gamma_table():
    assert GAMMA == {"exact": 1.0, "greedy": 2.0}
    assert set(SUBROUTINES) == set(GAMMA)


problems = st.integers(0, 10).flatmap(lambda n: st.tuples(
    st.lists(st.integers(-5, 20), min_size=n, max_size=n),
    st.lists(st.integers(1, 6), min_size=n, max_size=n),
    st.integers(1, 15)))


@settings(max_examples=300, deadline=None)
@given(problems)
def test_exact_matches_enumeration_integer_profits(problem):
    profits, weights, cap = problem
    sol = solve_exact(kp(profits, weights, cap))
    value, selected = enumerate_knapsack(profits, weights, cap)
    # integer profits make ties exact, so the tie-break is checked too
    assert (sol.value, sol.selected) == (value, selected)


@settings(max_examples=300, deadline=None)
@given(problems)
def test_greedy_half_and_contracts(problem):
    profits, weights, cap = problem
    exact = solve_exact(kp(profits, weights, cap))
    for sol in (exact, solve_greedy(kp(profits, weights, cap))):
        assert all(profits[i] > 0 for i in sol.selected)
        assert sum(weights[i] for i in sol.selected) <= cap
        assert sol.value == pytest.approx(sum(profits[i] for i in sol.selected))
    assert 2 * solve_greedy(kp(profits, weights, cap)).value >= exact.value


@settings(max_examples=300, deadline=None)
@given(st.lists(st.integers(-10, 10), max_size=10), st.integers(1, 12))
def test_top_k_equals_unit_weight_exact(profits, k):
    a = select_top_k(profits, k)
    b = solve_exact(kp(profits, [1] * len(profits), k))
    assert a == b
