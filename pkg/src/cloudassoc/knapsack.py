"""0/1 knapsack subroutines for one cloud's bidding step.

Only items with strictly positive profit are ever selected. Among optimal
selections the lexicographically smallest sorted index list wins, so that
auction traces are reproducible.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .gap import InstanceTooLargeError, InvalidInputError

__all__ = [
    "KnapsackProblem",
    "KnapsackSolution",
    "solve_exact",
    "solve_greedy",
    "select_top_k",
    "SUBROUTINES",
    "GAMMA",
]

DEFAULT_DP_CAP = 10**8


@dataclass(frozen=True, eq=False)
class KnapsackProblem:
    profits: np.ndarray
    weights: np.ndarray
    capacity: int

    def __post_init__(self):
        p = np.array(self.profits, dtype=np.float64).reshape(-1)
        w = np.array(self.weights).reshape(-1)
        if p.shape != w.shape:
            raise InvalidInputError("profits and weights differ in length")
        if w.size and (np.any(np.mod(w, 1) != 0) or np.any(w < 1)):
            raise InvalidInputError("weights must be integers >= 1")
        if int(self.capacity) != self.capacity or self.capacity < 1:
            raise InvalidInputError("capacity must be an integer >= 1")
        p.setflags(write=False)
        w = w.astype(np.int64)
        w.setflags(write=False)
        object.__setattr__(self, "profits", p)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "capacity", int(self.capacity))

    @property
    def size(self) -> int:
        return self.profits.size


@dataclass(frozen=True)
class KnapsackSolution:
    selected: tuple  # sorted item indices
    value: float


def _solution(profits: np.ndarray, chosen) -> KnapsackSolution:
    chosen = tuple(sorted(int(i) for i in chosen))
    return KnapsackSolution(chosen, float(sum(profits[i] for i in chosen)))


def solve_exact(problem: KnapsackProblem, cap: int = DEFAULT_DP_CAP) -> KnapsackSolution:
    """Capacity-indexed dynamic program (pseudo-polynomial, exact)."""
    p, w, K = problem.profits, problem.weights, problem.capacity
    n = problem.size
    if n * K > cap:
        raise InstanceTooLargeError(f"DP table {n} x {K} exceeds cap {cap}")
    if n == 0:
        return KnapsackSolution((), 0.0)

    # best[i, k]: optimum over items i..n-1 with budget k. Filled backwards so
    # the forward reconstruction can prefer the lowest index on ties.
    best = np.zeros((n + 1, K + 1))
    for i in range(n - 1, -1, -1):
        best[i] = best[i + 1]
        if p[i] > 0 and w[i] <= K:
            take = p[i] + best[i + 1, : K + 1 - w[i]]
            best[i, w[i]:] = np.maximum(best[i + 1, w[i]:], take)

    chosen = []
    k = K
    for i in range(n):
        if p[i] > 0 and w[i] <= k and p[i] + best[i + 1, k - w[i]] >= best[i + 1, k]:
            chosen.append(i)
            k -= w[i]
    return _solution(p, chosen)


def solve_greedy(problem: KnapsackProblem) -> KnapsackSolution:
    """Greedy by profit/weight ratio, then the better of that and the best single item.

    Guarantees at least half the exact optimum.
    """
    p, w, K = problem.profits, problem.weights, problem.capacity
    items = [i for i in range(problem.size) if p[i] > 0 and w[i] <= K]
    if not items:
        return KnapsackSolution((), 0.0)

    order = sorted(items, key=lambda i: (-p[i] / w[i], i))
    chosen, room = [], K
    for i in order:
        if w[i] <= room:
            chosen.append(i)
            room -= w[i]
    packed = _solution(p, chosen)

    single = min(items, key=lambda i: (-p[i], i))
    if p[single] > packed.value:
        return KnapsackSolution((single,), float(p[single]))
    return packed


def select_top_k(profits: Sequence[float], k: int) -> KnapsackSolution:
    """Unit-weight fast path: the k largest strictly positive profits."""
    p = np.asarray(profits, dtype=np.float64).reshape(-1)
    if k < 1:
        raise InvalidInputError("k must be >= 1")
    positive = np.flatnonzero(p > 0)
    # stable sort on -p keeps lower indices first among equal profits
    ranked = positive[np.argsort(-p[positive], kind="stable")]
    return _solution(p, ranked[:k])


def _exact_dispatch(problem: KnapsackProblem) -> KnapsackSolution:
    if problem.size and np.all(problem.weights == 1):
        return select_top_k(problem.profits, problem.capacity)
    return solve_exact(problem)


SUBROUTINES = {"exact": _exact_dispatch, "greedy": solve_greedy}

# approximation ratio of each subroutine, as used in the (1 + gamma) bound
GAMMA = {"exact": 1.0, "greedy": 2.0}
