"""Greedy largest-reward-first association over the reward matrix."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gap import Assignment, GapInstance

__all__ = ["GreedyWorkset", "solve_chcaa"]


@dataclass
class GreedyWorkset:
    live_entries: set
    remaining_capacity: list

    @classmethod
    def from_instance(cls, instance: GapInstance) -> "GreedyWorkset":
        # zero rewards add nothing and would only burn capacity
        cs, us = np.nonzero(instance.rewards > 0)
        return cls({(int(c), int(u)) for c, u in zip(cs, us)},
                   [int(k) for k in instance.capacities])

    def delete_user(self, u: int) -> None:
        self.live_entries = {(c, v) for c, v in self.live_entries if v != u}


def solve_chcaa(instance: GapInstance) -> tuple:
    """Pick the largest live entry of R until none is left.

    An entry whose cloud lacks room is dropped on its own, leaving the user
    free to join another cloud. Ties: smallest cloud, then smallest user.
    Returns ``(assignment, value)``.
    """
    R, W = instance.rewards, instance.weights
    work = GreedyWorkset.from_instance(instance)
    owner: list = [None] * instance.num_users
    # a single descending pass is equivalent to repeatedly taking the max,
    # since entries only ever leave the live set
    for c, u in sorted(work.live_entries, key=lambda e: (-R[e], e[0], e[1])):
        if (c, u) not in work.live_entries:
            continue
        if W[c, u] <= work.remaining_capacity[c]:
            owner[u] = c
            work.remaining_capacity[c] -= int(W[c, u])
            work.delete_user(u)
        else:
            work.live_entries.discard((c, u))
    assignment: Assignment = tuple(owner)
    value = sum(float(R[c, u]) for u, c in enumerate(assignment) if c is not None)
    return assignment, value
