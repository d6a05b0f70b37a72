"""Auction-based and greedy user-to-cloud association for multicloud radio access networks."""
from .chcaa import solve_chcaa
from .dcaa import AuctionResult, certificate, run
from .distributed import message_volume, run_distributed
from .gap import (GapInstance, InstanceTooLargeError, InvalidInputError, brute_force_optimum,
                  evaluate, read_instance, write_instance)
from .knapsack import KnapsackProblem, select_top_k, solve_exact, solve_greedy

__version__ = "0.1.0"
