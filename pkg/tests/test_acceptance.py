"""Exit criteria. Each test records one PASS/FAIL line for the terminal summary.

Artifacts (iteration-count CSVs) go to ``$CLOUDASSOC_ARTIFACTS`` or
``acceptance_artifacts/`` under the project root.
"""
import functools
import os
import time
from pathlib import Path

import numpy as np
import pytest
from scipy.stats import spearmanr

from cloudassoc import dcaa
from cloudassoc.chcaa import solve_chcaa
from cloudassoc.distributed import run_distributed
from cloudassoc.experiments import fig1_rows, fig2_rows, simulate, write_csv
from cloudassoc.gap import brute_force_optimum, evaluate, random_instance
from cloudassoc.knapsack import KnapsackProblem, solve_exact, solve_greedy
from cloudassoc.sim import SimConfig
from conftest import record_criterion
from oracles import enumerate_knapsack
from test_dcaa import I1_TRACE, P1_TRACE, as_tuples

pytestmark = pytest.mark.acceptance

SEED = 0
ARTIFACTS = Path(os.environ.get("CLOUDASSOC_ARTIFACTS",
                                Path(__file__).resolve().parents[1] / "acceptance_artifacts"))
FIG1 = SimConfig(num_clouds=7, bs_per_cloud=3, num_users=28, intercell_distance=500.0)


def timed(fn):
    start = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - start


@functools.lru_cache(maxsize=None)
def oracle_sweep():
    """500 random small instances, both subroutines, against brute force."""
    def go():
        rng = np.random.default_rng(SEED)
        rows = []
        for i in range(500):
            inst = random_instance(rng, int(rng.choice([2, 3])), int(rng.integers(3, 8)),
                                   capacity_range=(1, 3), weight_range=(1, 2),
                                   reward_range=(0.0, 10.0))
            _, best = brute_force_optimum(inst)
            for sub in ("exact", "greedy"):
                res = dcaa.run(inst, sub)
                rows.append((i, sub, res, best, evaluate(inst, res.assignment).feasible,
                             inst.num_clouds))
        return rows
    return timed(go)


@functools.lru_cache(maxsize=None)
def fig1_sweep():
    return timed(lambda: fig1_rows(FIG1, 100, SEED, check_distributed=True))


@functools.lru_cache(maxsize=None)
def fig2_sweep():
    return timed(lambda: fig2_rows(FIG1, 200, SEED, (7, 14, 21, 28)))


@functools.lru_cache(maxsize=None)
def distributed_sweep():
    rng = np.random.default_rng(SEED + 1)
    out = []
    for i in range(100):
        inst = random_instance(rng, int(rng.integers(2, 8)), int(rng.integers(3, 30)),
                               capacity_range=(1, 4), weight_range=(1, 3))
        sub = "exact" if i % 2 == 0 else "greedy"
        out.append((dcaa.run(inst, sub, keep_trace=True), run_distributed(inst, sub, keep_trace=True),
                    inst.num_clouds))
    return out


def test_criterion_1_oracle_bound():
    rows, seconds = oracle_sweep()
    violations = [r for r in rows
                  if (1 + r[2].gamma) * r[2].value < r[3] - 1e-9 or not r[4]]
    worst = {sub: max(dcaa.certificate(r[2], r[3]) for r in rows if r[1] == sub)
             for sub in ("exact", "greedy")}
    ok = len(rows) == 1000 and not violations and seconds < 60
    record_criterion(1, ok, f"500 instances x 2 subroutines, violations={len(violations)}, "
                     f"worst f*/f exact={worst['exact']:.4f} (<=2) greedy={worst['greedy']:.4f} (<=3), "
                     f"{seconds:.1f}s (<60s)")
    assert not violations
    assert seconds < 60


def test_criterion_2_knapsack_exactness():
    rng = np.random.default_rng(SEED + 2)
    mismatches = half_violations = 0
    for _ in range(200):
        n = int(rng.integers(0, 13))
        profits = np.round(rng.uniform(-5, 20, n), 3)
        weights = rng.integers(1, 8, n)
        cap = int(rng.integers(1, 25))
        best, chosen = enumerate_knapsack(profits.tolist(), weights.tolist(), cap)
        problem = KnapsackProblem(profits, weights, cap)
        exact = solve_exact(problem)
        if exact.value != pytest.approx(best, abs=1e-9) or exact.selected != chosen:
            mismatches += 1
        if 2 * solve_greedy(problem).value < exact.value - 1e-9:
            half_violations += 1
    ok = mismatches == 0 and half_violations == 0
    record_criterion(2, ok, f"200 problems n<=12: DP mismatches={mismatches}, greedy<1/2 cases={half_violations}")
    assert ok


def test_criterion_3_hand_traces(i1, p1):
    i1_run = dcaa.run(i1, keep_trace=True)
    p1_run = dcaa.run(p1, keep_trace=True)
    ok = (as_tuples(i1_run.trace) == I1_TRACE and i1_run.value == 12
          and as_tuples(p1_run.trace) == P1_TRACE and p1_run.value == 7
          and p1_run.assignment == (1,))
    record_criterion(3, ok, f"I1 {len(i1_run.trace)} iterations value={i1_run.value}; "
                     f"P1 {len(p1_run.trace)} iterations value={p1_run.value}")
    assert ok


def test_criterion_4_distributed_equivalence():
    pairs = distributed_sweep()
    random_ok = sum(c.assignment == d.assignment and c.value == d.value and c.trace == d.trace
                    for c, d, _ in pairs)
    fig1, _ = fig1_sweep()
    fig1_ok = sum(bool(r.distributed_match) for r in fig1)
    ok = random_ok == 100 and fig1_ok == len(fig1) == 100
    record_criterion(4, ok, f"random instances identical {random_ok}/100, "
                     f"Fig-1 realizations identical {fig1_ok}/{len(fig1)}")
    assert ok


def test_criterion_5_fig1_qualitative():
    rows, seconds = fig1_sweep()
    d = np.array([r.dcaa_rate for r in rows])
    c = np.array([r.chcaa_rate for r in rows])
    b = np.array([r.baseline_rate for r in rows])
    rel_gap = float(np.mean(np.abs(d - c) / d))
    beat = float(np.mean(d >= b))
    ok = len(rows) == 100 and rel_gap <= 0.10 and beat >= 0.95 and d.mean() >= b.mean() and seconds < 300
    record_criterion(5, ok, f"mean |DCAA-CHCAA|/DCAA={rel_gap:.4%} (<=10%), DCAA>=baseline in "
                     f"{beat:.0%} (>=95%), means {d.mean():.1f} vs {c.mean():.1f} vs {b.mean():.1f} bps/Hz, "
                     f"{seconds:.1f}s (<300s)")
    assert ok


def test_criterion_6_fig2_qualitative():
    (rows, _), _ = fig2_sweep()
    gains = [r.mean_gain_percent for r in rows]
    rho = spearmanr([r.num_users for r in rows], gains).statistic
    ok = all(r.realizations >= 200 for r in rows) and gains[-1] > gains[0] and rho > 0
    record_criterion(6, ok, "mean gain % at U=7,14,21,28: " + ", ".join(f"{g:.1f}" for g in gains)
                     + f"; U=28 > U=7: {gains[-1] > gains[0]}; Spearman rho={rho:.2f} (>0); "
                     f"reference peak of 60% not asserted")
    assert ok


def test_criterion_7_convergence():
    # (suite, run id, clouds, iterations, converged)
    runs = [("oracle_sweep", f"{i}:{sub}", C, res.iterations, res.converged)
            for i, sub, res, _, _, C in oracle_sweep()[0]]
    runs += [("distributed", i, C, c.iterations, c.converged and d.converged)
             for i, (c, d, C) in enumerate(distributed_sweep())]
    runs += [("fig1", r.index, 7, r.dcaa_iterations, r.dcaa_converged) for r in fig1_sweep()[0]]
    runs += [(f"fig2_U{r.num_users}", r.index, 7, r.dcaa_iterations, r.dcaa_converged)
             for r in fig2_sweep()[0][1]]
    ARTIFACTS.mkdir(parents=True, exist_ok=True)
    path = ARTIFACTS / "iterations.csv"
    write_csv(path, ["suite", "run", "clouds", "iterations", "converged"], runs, f"seed={SEED}")
    bad = [r for r in runs if not r[4] or r[3] >= 100 * r[2]]
    iters = np.array([r[3] for r in runs])
    ok = not bad
    record_criterion(7, ok, f"{len(runs)} DCAA runs, unconverged or at cap={len(bad)}, iterations "
                     f"min={iters.min()} median={int(np.median(iters))} max={iters.max()}; wrote {path}")
    assert ok


def test_criterion_8_property_suite():
    rng = np.random.default_rng(SEED + 8)
    cases = failures = 0
    for _ in range(10_000):
        inst = random_instance(rng, int(rng.integers(1, 5)), int(rng.integers(1, 9)),
                               capacity_range=(1, 4), weight_range=(1, 3))
        for sub in ("exact", "greedy"):
            res = dcaa.run(inst, sub)
            failures += not evaluate(inst, res.assignment).feasible
            failures += not all(p >= 0 for p in res.prices)
            failures += not res.converged
        failures += not evaluate(inst, solve_chcaa(inst)[0]).feasible
        row = inst.rewards[0] - rng.uniform(0, 10, inst.num_users)
        problem = KnapsackProblem(row, inst.weights[0], int(inst.capacities[0]))
        for sol in (solve_exact(problem), solve_greedy(problem)):
            failures += not all(row[i] > 0 for i in sol.selected)
        cases += 1
    for s in range(200):
        cfg = SimConfig(num_users=int(rng.integers(1, 40)), rng_seed=s)
        a, b = simulate(cfg), simulate(cfg)
        failures += not (np.all(a.instance.rewards >= 0) and np.all(np.isfinite(a.instance.rewards)))
        failures += a.instance.rewards.tobytes() != b.instance.rewards.tobytes()
        cases += 1
    ok = cases >= 10_000 and failures == 0
    record_criterion(8, ok, f"{cases} randomized cases (feasibility, price >= 0, positive-profit "
                     f"selections, reward >= 0, seed determinism), failures={failures}")
    assert ok
