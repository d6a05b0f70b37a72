"""Command-line entry point: ``cloudassoc <command> [options]``.

Exit codes: 0 success, 2 input error, 3 internal assertion failure.
"""
from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from . import dcaa, distributed
from .chcaa import solve_chcaa
from .experiments import DEFAULT_USER_SWEEP, fig1_rows, fig2_rows, simulate, write_csv
from .gap import (InstanceTooLargeError, InvalidInputError, brute_force_optimum, evaluate,
                  random_instance, read_instance, write_instance)
from .sim import SimConfig, baseline_bs_association, load_config, write_rewards_csv

EXIT_OK, EXIT_INPUT, EXIT_ASSERT = 0, 2, 3

SOLVERS = ("dcaa-exact", "dcaa-greedy", "dcaa-distributed", "chcaa", "oracle")


class CheckFailed(AssertionError):
    pass


def _sim_config(args) -> SimConfig:
    overrides = {"num_users": args.users, "intercell_distance": args.intercell_distance}
    if args.config:
        return load_config(args.config, **overrides)
    return SimConfig(**{k: v for k, v in overrides.items() if v is not None})


def _emit(args, header, rows, tag=""):
    if args.out:
        write_csv(args.out, header, rows, tag)
    else:
        out = csv.writer(sys.stdout, lineterminator="\n")
        if tag:
            sys.stdout.write(f"# {tag}\n")
        out.writerow(header)
        out.writerows(rows)


def _solve(instance, solver: str, trace_path=None):
    """Returns (assignment, value, iterations or '', converged or '', gamma or None)."""
    if solver == "chcaa":
        assignment, value = solve_chcaa(instance)
        return assignment, value, "", "", None
    if solver == "oracle":
        assignment, value = brute_force_optimum(instance)
        return assignment, value, "", "", None
    if solver == "dcaa-distributed":
        result = distributed.run_distributed(instance, "exact", keep_trace=bool(trace_path))
    else:
        result = dcaa.run(instance, solver.split("-", 1)[1], keep_trace=bool(trace_path))
    if trace_path:
        with open(trace_path, "w") as fh:
            dcaa.format_trace(result.trace, fh)
    return result.assignment, result.value, result.iterations, result.converged, result.gamma


def cmd_solve(args) -> int:
    instance = read_instance(args.instance)
    assignment, value, iterations, converged, gamma = _solve(instance, args.solver, args.trace)
    report = evaluate(instance, assignment)
    if not report.feasible:
        raise CheckFailed(f"{args.solver} returned an infeasible assignment")
    ratio = ""
    if args.oracle:
        _, best = brute_force_optimum(instance)
        if gamma is not None:
            ratio = dcaa.certificate(
                dcaa.AuctionResult(assignment, value, 0, True, gamma), best)
            if ratio > 1 + gamma:
                raise CheckFailed(f"bound violated: f*/f = {ratio} > 1 + gamma = {1 + gamma}")
        elif value > best:
            raise CheckFailed(f"{args.solver} value {value} exceeds oracle {best}")
    users = " ".join("-" if c is None else str(c + 1) for c in assignment)
    _emit(args, ["solver", "value", "feasible", "iterations", "converged", "certificate", "assignment"],
          [[args.solver, value, report.feasible, iterations, converged, ratio, users]])
    return EXIT_OK


def cmd_simulate(args) -> int:
    config = _sim_config(args)
    if args.seed is not None:
        config = config.replace(rng_seed=args.seed)
    real = simulate(config)
    if args.instance_out:
        write_instance(real.instance, args.instance_out)
    if args.out:
        write_rewards_csv(real.instance, args.out)
    else:
        write_instance(real.instance, sys.stdout)
    return EXIT_OK


def cmd_compare(args) -> int:
    config = _sim_config(args)
    if args.seed is not None:
        config = config.replace(rng_seed=args.seed)
    real = simulate(config)
    rows = []
    for name in ("dcaa-exact", "dcaa-greedy", "dcaa-distributed", "chcaa"):
        assignment, value, iterations, converged, _ = _solve(real.instance, name)
        rows.append([name, value, evaluate(real.instance, assignment).feasible, iterations, converged])
    _, base = baseline_bs_association(real.channels, config)
    rows.append(["baseline", base, True, "", ""])
    _emit(args, ["solver", "sum_rate", "feasible", "iterations", "converged"], rows,
          f"config={config.digest()}")
    return EXIT_OK


def cmd_oracle_check(args) -> int:
    rng = np.random.default_rng(args.seed or 0)
    rows, violations = [], 0
    for i in range(args.realizations):
        inst = random_instance(rng, int(rng.integers(2, 4)), int(rng.integers(3, 8)))
        _, best = brute_force_optimum(inst)
        for sub in ("exact", "greedy"):
            result = dcaa.run(inst, sub)
            ratio = dcaa.certificate(result, best)
            ok = ratio <= 1 + result.gamma and result.converged
            violations += not ok
            rows.append([i, sub, result.value, best, ratio, result.iterations, ok])
    _emit(args, ["instance", "subroutine", "dcaa_value", "oracle_value", "ratio", "iterations", "ok"],
          rows, f"seed={args.seed or 0}")
    if violations:
        raise CheckFailed(f"{violations} bound or convergence violations")
    return EXIT_OK


def _seed(args) -> int:
    return 0 if args.seed is None else args.seed


def cmd_fig1(args) -> int:
    config = _sim_config(args)
    seed = _seed(args)
    results = fig1_rows(config, args.realizations, seed, jobs=args.jobs)
    tag = f"config={config.digest()} seed={seed} realizations={args.realizations}"
    _emit(args, ["realization", "dcaa_rate", "chcaa_rate", "baseline_rate"],
          [[r.index + 1, r.dcaa_rate, r.chcaa_rate, r.baseline_rate] for r in results], tag)
    if args.out:
        out = Path(args.out)
        write_csv(out.with_name(out.stem + "_iterations.csv"), ["realization", "iterations", "converged"],
                  [[r.index + 1, r.dcaa_iterations, r.dcaa_converged] for r in results], tag)
        if not args.no_plot:
            from .plotting import plot_fig1, plot_iterations
            plot_fig1(results, out.with_suffix(".png"))
            plot_iterations([r.dcaa_iterations for r in results],
                            out.with_name(out.stem + "_iterations.png"))
    if not all(r.dcaa_converged for r in results):
        raise CheckFailed("DCAA hit the round cap")
    return EXIT_OK


def cmd_fig2(args) -> int:
    config = _sim_config(args)
    seed = _seed(args)
    counts = tuple(args.user_counts)
    rows, results = fig2_rows(config, args.realizations, seed, counts, jobs=args.jobs)
    tag = (f"config={config.digest()} seed={seed} realizations={args.realizations} "
           f"users={','.join(map(str, counts))}")
    _emit(args, ["num_users", "mean_gain_percent", "dropped"],
          [[r.num_users, r.mean_gain_percent, r.dropped] for r in rows], tag)
    if args.out:
        out = Path(args.out)
        write_csv(out.with_name(out.stem + "_iterations.csv"),
                  ["num_users", "realization", "iterations", "converged"],
                  [[r.num_users, r.index + 1, r.dcaa_iterations, r.dcaa_converged] for r in results],
                  tag)
        if not args.no_plot:
            from .plotting import plot_fig2
            plot_fig2(rows, out.with_suffix(".png"))
    if not all(r.dcaa_converged for r in results):
        raise CheckFailed("DCAA hit the round cap")
    return EXIT_OK


def _user_counts(text: str) -> list:
    try:
        counts = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not counts or min(counts) < 1:
        raise argparse.ArgumentTypeError("user counts must be positive")
    return counts


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cloudassoc",
                                     description="User-to-cloud association solvers and experiments.")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--out", default=None, help="output CSV (default: stdout)")

    simargs = argparse.ArgumentParser(add_help=False)
    simargs.add_argument("--config", default=None, help="key = value simulation config file")
    simargs.add_argument("--users", type=_positive, default=None)
    simargs.add_argument("--intercell-distance", type=float, default=None, metavar="METERS")

    p = sub.add_parser("solve", parents=[common], help="solve an instance file")
    p.add_argument("instance")
    p.add_argument("--solver", choices=SOLVERS, default="dcaa-exact")
    p.add_argument("--oracle", action="store_true", help="also run the brute-force oracle and check the bound")
    p.add_argument("--trace", default=None, help="write the auction trace here")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("simulate", parents=[common, simargs], help="draw one network realization")
    p.add_argument("--instance-out", default=None, help="also write the reward instance file")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compare", parents=[common, simargs], help="all solvers on one realization")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("oracle-check", parents=[common], help="random small instances against the oracle")
    p.add_argument("--realizations", type=_positive, default=500)
    p.set_defaults(func=cmd_oracle_check)

    for name, func, n in (("fig1", cmd_fig1, 100), ("fig2", cmd_fig2, 200)):
        p = sub.add_parser(name, parents=[common, simargs])
        p.add_argument("--realizations", type=_positive, default=n)
        p.add_argument("--jobs", type=_positive, default=1)
        p.add_argument("--no-plot", action="store_true")
        if name == "fig2":
            p.add_argument("--user-counts", type=_user_counts, default=list(DEFAULT_USER_SWEEP))
        p.set_defaults(func=func)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InvalidInputError, InstanceTooLargeError, OSError) as exc:
        print(f"cloudassoc: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except AssertionError as exc:
        print(f"cloudassoc: check failed: {exc}", file=sys.stderr)
        return EXIT_ASSERT


if __name__ == "__main__":
    sys.exit(main())
