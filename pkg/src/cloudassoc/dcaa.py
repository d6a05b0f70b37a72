"""Round-robin auction for user-to-cloud association.

Clouds act one at a time, in the order ``(t - 1) mod C``. The acting cloud
first releases the users it still holds (their price still equals its own
standing bid), then solves a knapsack over the net benefits
``r_cu - price_u`` and posts a bid ``r_cu`` on every user it selects. That
bid becomes the user's new price.

The run stops once C consecutive iterations leave every assigned set and
every price as it was before the iteration. A reset followed by a re-bid at
the same value counts as no change.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, TextIO

import numpy as np

from .gap import Assignment, GapInstance, InvalidInputError
from .knapsack import GAMMA, SUBROUTINES, KnapsackProblem, KnapsackSolution

__all__ = [
    "active_cloud",
    "AuctionState",
    "AuctionResult",
    "StepRecord",
    "step",
    "bid",
    "run",
    "certificate",
    "extract_assignment",
    "format_trace",
]

DEFAULT_MAX_ROUNDS = 100


def active_cloud(t: int, num_clouds: int) -> int:
    """0-based index of the cloud acting at iteration ``t`` (t >= 1)."""
    if t < 1:
        raise InvalidInputError("iterations start at t = 1")
    return (t - 1) % num_clouds


@dataclass
class StepRecord:
    t: int
    cloud: int
    resets: tuple          # users whose price was reset to 0 before bidding
    selected: tuple        # the cloud's new assigned set U_c(t)
    prices: tuple          # prices after the step
    changed: bool


@dataclass
class AuctionState:
    instance: GapInstance
    t: int = 1
    prices: np.ndarray = None
    # most recent bidding event per cloud: {user: bid}; an empty dict is an
    # event that selected nobody
    bids: list = None
    assigned_sets: list = None
    stamps: list = None          # iteration of each cloud's last bidding event
    quiet: int = 0               # consecutive iterations without change

    def __post_init__(self):
        C, U = self.instance.num_clouds, self.instance.num_users
        if self.prices is None:
            self.prices = np.zeros(U)
        if self.bids is None:
            self.bids = [{} for _ in range(C)]
        if self.assigned_sets is None:
            self.assigned_sets = [() for _ in range(C)]
        if self.stamps is None:
            self.stamps = [0] * C

    @property
    def converged(self) -> bool:
        return self.quiet >= self.instance.num_clouds


@dataclass(frozen=True)
class AuctionResult:
    assignment: Assignment
    value: float
    iterations: int
    converged: bool
    gamma: float
    prices: tuple = ()
    trace: tuple = field(default=(), repr=False)


def bid(rewards_row: np.ndarray, weights_row: np.ndarray, capacity: int,
        prices: np.ndarray, held: tuple, held_bids: dict, t: int, num_clouds: int,
        solver: Callable[[KnapsackProblem], KnapsackSolution]):
    """One cloud's bidding event, computed from that cloud's local data only.

    Returns ``(new_prices, selected, new_bids, resets)``. ``prices`` is not
    modified.
    """
    prices = prices.copy()
    resets = []
    if t > num_clouds:
        for u in held:
            if prices[u] == held_bids[u]:
                prices[u] = 0.0
                resets.append(u)
    net = rewards_row - prices
    chosen = solver(KnapsackProblem(net, weights_row, capacity)).selected
    new_bids = {}
    for u in chosen:
        new_bids[u] = float(rewards_row[u])
        prices[u] = new_bids[u]
    return prices, tuple(chosen), new_bids, tuple(resets)


def step(state: AuctionState, subroutine: str = "exact") -> StepRecord:
    """Advance the auction by one iteration, mutating ``state`` in place."""
    inst = state.instance
    c = active_cloud(state.t, inst.num_clouds)
    before = state.prices
    prices, chosen, new_bids, resets = bid(
        inst.rewards[c], inst.weights[c], int(inst.capacities[c]),
        before, state.assigned_sets[c], state.bids[c], state.t, inst.num_clouds,
        SUBROUTINES[subroutine])

    changed = chosen != state.assigned_sets[c] or not np.array_equal(prices, before)
    state.prices = prices
    state.assigned_sets[c] = chosen
    state.bids[c] = new_bids
    state.stamps[c] = state.t
    state.quiet = 0 if changed else state.quiet + 1
    record = StepRecord(state.t, c, resets, chosen, tuple(prices.tolist()), changed)
    state.t += 1
    return record


def extract_assignment(prices, assigned_sets, bids, stamps, num_users: int) -> Assignment:
    """Grant each user to the most recent cloud that holds it at its current price."""
    owner: list = [None] * num_users
    latest = [-1] * num_users
    for c, chosen in enumerate(assigned_sets):
        for u in chosen:
            if bids[c][u] == prices[u] and stamps[c] > latest[u]:
                owner[u] = c
                latest[u] = stamps[c]
    return tuple(owner)


def run(instance: GapInstance, subroutine: str = "exact",
        max_rounds: int = DEFAULT_MAX_ROUNDS, keep_trace: bool = False) -> AuctionResult:
    if subroutine not in SUBROUTINES:
        raise InvalidInputError(f"unknown knapsack subroutine {subroutine!r}")
    if max_rounds < 1:
        raise InvalidInputError("max_rounds must be >= 1")
    state = AuctionState(instance)
    trace = []
    limit = max_rounds * instance.num_clouds
    while not state.converged and state.t <= limit:
        record = step(state, subroutine)
        if keep_trace:
            trace.append(record)
    assignment = extract_assignment(state.prices, state.assigned_sets, state.bids,
                                    state.stamps, instance.num_users)
    value = sum(float(instance.rewards[c, u]) for u, c in enumerate(assignment) if c is not None)
    return AuctionResult(assignment, value, state.t - 1, state.converged,
                         GAMMA[subroutine], tuple(state.prices.tolist()), tuple(trace))


def certificate(result: AuctionResult, oracle_value: float) -> float:
    """Ratio f*/f_DCAA; the auction guarantees it is at most 1 + gamma."""
    if result.value == 0:
        return 1.0 if oracle_value == 0 else math.inf
    return oracle_value / result.value


def format_trace(trace, out: Optional[TextIO] = None) -> str:
    """Render a trace, one iteration per line.

    Format (tab separated, clouds and users 1-based)::

        t  cloud  resets=u,u  set=u,u  prices=p,p,...
    """
    def ids(xs):
        return ",".join(str(x + 1) for x in xs) or "-"

    lines = [f"{r.t}\t{r.cloud + 1}\tresets={ids(r.resets)}\tset={ids(r.selected)}\t"
             f"prices={','.join(repr(p) for p in r.prices)}" for r in trace]
    text = "\n".join(lines) + ("\n" if lines else "")
    if out is not None:
        out.write(text)
    return text
