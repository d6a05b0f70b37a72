"""Monte-Carlo sum-rate experiments over simulated multicloud networks.

Seeding: a master seed ``s`` and a stream key (the user count for sweeps)
feed ``numpy.random.SeedSequence([s, key])``; its i-th spawned child yields
realization i's 64-bit ``rng_seed``. A realization therefore depends only on
(master seed, key, index), so rows can be computed in any order or in
parallel.
"""
from __future__ import annotations

import csv
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from . import dcaa, distributed
from .chcaa import solve_chcaa
from .gap import GapInstance
from .sim import SimConfig, baseline_bs_association, compute_rewards, generate_layout, sample_channels

__all__ = [
    "realization_seeds",
    "Realization",
    "simulate",
    "RealizationResult",
    "evaluate_realization",
    "fig1_rows",
    "fig2_rows",
    "write_csv",
]

DEFAULT_USER_SWEEP = (7, 14, 21, 28)


def realization_seeds(master_seed: int, count: int, key: int = 0) -> list:
    children = np.random.SeedSequence([master_seed, key]).spawn(count)
    return [int(ch.generate_state(1, np.uint64)[0]) for ch in children]


@dataclass(frozen=True, eq=False)
class Realization:
    config: SimConfig
    instance: GapInstance
    channels: object
    layout: object


def simulate(config: SimConfig) -> Realization:
    layout = generate_layout(config)
    channels = sample_channels(layout, config)
    return Realization(config, compute_rewards(channels, config), channels, layout)


@dataclass(frozen=True)
class RealizationResult:
    index: int
    num_users: int
    dcaa_rate: float
    chcaa_rate: float
    baseline_rate: float
    dcaa_iterations: int
    dcaa_converged: bool
    distributed_match: Optional[bool] = None

    @property
    def gain_percent(self) -> float:
        return 100.0 * (self.dcaa_rate - self.baseline_rate) / self.baseline_rate


def evaluate_realization(config: SimConfig, index: int = 0, subroutine: str = "exact",
                         check_distributed: bool = False) -> RealizationResult:
    real = simulate(config)
    auction = dcaa.run(real.instance, subroutine)
    _, chcaa_value = solve_chcaa(real.instance)
    _, base_value = baseline_bs_association(real.channels, config)
    match = None
    if check_distributed:
        dist = distributed.run_distributed(real.instance, subroutine)
        match = dist.assignment == auction.assignment and dist.value == auction.value
    return RealizationResult(index, config.num_users, auction.value, chcaa_value, base_value,
                             auction.iterations, auction.converged, match)


def _evaluate_star(args):
    return evaluate_realization(*args)


def _map(tasks: list, jobs: int) -> list:
    if jobs <= 1 or len(tasks) <= 1:
        return [_evaluate_star(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_evaluate_star, tasks))


def fig1_rows(base: SimConfig, realizations: int, seed: int, jobs: int = 1,
              subroutine: str = "exact", check_distributed: bool = False) -> list:
    seeds = realization_seeds(seed, realizations, key=base.num_users)
    tasks = [(base.replace(rng_seed=s), i, subroutine, check_distributed)
             for i, s in enumerate(seeds)]
    return _map(tasks, jobs)


@dataclass(frozen=True)
class GainRow:
    num_users: int
    mean_gain_percent: float
    realizations: int
    dropped: int


def fig2_rows(base: SimConfig, realizations: int, seed: int,
              user_counts: Sequence[int] = DEFAULT_USER_SWEEP, jobs: int = 1) -> tuple:
    """Mean DCAA gain over the cloud-less baseline per user count.

    Returns ``(gain_rows, per_realization_results)``. Realizations whose
    baseline rate is zero are dropped and counted.
    """
    tasks = []
    for U in user_counts:
        for i, s in enumerate(realization_seeds(seed, realizations, key=U)):
            tasks.append((base.replace(num_users=U, rng_seed=s), i, "exact", False))
    results = _map(tasks, jobs)
    rows = []
    for U in user_counts:
        mine = [r for r in results if r.num_users == U]
        kept = [r.gain_percent for r in mine if r.baseline_rate > 0]
        mean = float(np.mean(kept)) if kept else float("nan")
        rows.append(GainRow(U, mean, len(kept), len(mine) - len(kept)))
    return rows, results


def write_csv(path, header: Iterable[str], rows: Iterable[Sequence], tag: str = "") -> None:
    """CSV with an optional leading ``# ...`` provenance line, then a column header."""
    with open(path, "w", newline="") as fh:
        if tag:
            fh.write(f"# {tag}\n")
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(list(header))
        for row in rows:
            out.writerow([repr(x) if isinstance(x, float) else x for x in row])
