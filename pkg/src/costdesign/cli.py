"""Command-line interface.

Exit codes: 0 on success, 1 on input or modeling errors, 2 when a solver
stops at its iteration cap (``solve``, ``bench``) or a design fails the
optimality test (``check``).
"""
from __future__ import annotations

import argparse
import csv
import logging
import statistics
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import Optional, Sequence

from .barycentric import (EmptyStratumError, SolverOptions, Status, certify,
                          solve_cost_only, solve_equality, solve_inequality,
                          solve_size_only)
from .instances import (RandomSpec, quadratic_grid_coordinates,
                        quadratic_grid_instance, random_instance)
from .io import (ProblemFile, ProblemFileError, read_design, read_problem,
                 write_problem, write_report, write_trace)
from .model import InvalidInstanceError, SingularDesignError

log = logging.getLogger(__name__)

EXIT_OK, EXIT_INPUT, EXIT_SOLVER = 0, 1, 2

BENCH_LEVELS = {
    "p0": (0.0, 0.25, 0.5, 0.75, 1.0),
    "ppm": (0.1, 0.3, 0.5, 0.7, 0.9),
    "l": (1, 4, 16, 64, None),
}

BENCH_FIELDS = ("param_value", "rep", "seed", "iterations", "elapsed_s",
                "phi", "status")

DEMO_LEVELS = (0.99, 0.999, 0.9999)


class UsageError(Exception):
    """Bad flag value detected after argument parsing."""


def _interval(text: str) -> Optional[int]:
    if text.lower() in ("none", "inf"):
        return None
    try:
        k = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer or "
                                         f"'none', got {text!r}") from None
    if k < 1:
        raise argparse.ArgumentTypeError("deletion interval must be positive")
    return k


def _proportion(text: str) -> float:
    try:
        x = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0.0 <= x <= 1.0:
        raise argparse.ArgumentTypeError(f"proportion {x} outside [0, 1]")
    return x


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--target-eff", type=float, default=0.99999)
    p.add_argument("--deletion-interval", type=_interval, default=16,
                   metavar="K|none")
    p.add_argument("--max-iters", type=int, default=200_000)
    p.add_argument("--tol-one", type=float, default=0.0)
    p.add_argument("--cost-bump", type=float, default=0.0)


def _solver_options(args, **extra) -> SolverOptions:
    try:
        return SolverOptions(target_eff=args.target_eff,
                             deletion_interval=args.deletion_interval,
                             max_iters=args.max_iters, tol_one=args.tol_one,
                             cost_bump=args.cost_bump, **extra)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _status_exit(status: Status) -> int:
    return EXIT_OK if status.ok else EXIT_SOLVER


# ---------------------------------------------------------------------------
# solve


def cmd_solve(args) -> int:
    problem = read_problem(args.input)
    instance, back = problem.to_instance()
    opts = _solver_options(args, fallback=True)
    solver = {"auto": solve_inequality, "equality": solve_equality,
              "size": solve_size_only, "cost": solve_cost_only}[args.mode]
    report = solver(instance, opts)
    for msg in report.warnings:
        log.warning("%s", msg)
    if args.output:
        write_report(report, instance, args.output, back)
    if args.trace:
        write_trace(report, args.trace)
    print(f"status {report.status.value}  phi {report.phi!r}  "
          f"eff_lb {report.eff_lb!r}  iterations {report.iterations}  "
          f"deleted {len(report.deleted)}")
    return _status_exit(report.status)


# ---------------------------------------------------------------------------
# gen


def cmd_gen(args) -> int:
    if args.kind == "quad":
        instance = quadratic_grid_instance(args.grid_size)
    else:
        try:
            spec = RandomSpec(n=args.n, m=args.m, p0=args.p0, ppm=args.ppm,
                              seed=args.seed)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        instance = random_instance(spec)
    problem = ProblemFile.from_instance(instance)
    if args.output:
        write_problem(problem, args.output)
    else:
        sys.stdout.write(problem.dumps())
    return EXIT_OK


# ---------------------------------------------------------------------------
# check


def cmd_check(args) -> int:
    problem = read_problem(args.input)
    instance, back = problem.to_instance()
    w = back.forward(read_design(args.design, instance.ids))
    try:
        cert = certify(instance, w, tol=args.tol, tol_one=args.tol_one)
    except SingularDesignError as exc:
        print(f"singular design: {exc}")
        return EXIT_INPUT
    print(f"size_residual {cert.size_residual!r}")
    print(f"cost_residual {cert.cost_residual!r}")
    print(f"slack_zero {cert.slack_zero!r}")
    print(f"slack_pm {cert.slack_pm!r}")
    print(f"epsilon {cert.epsilon!r}")
    print(f"eff_lb {cert.eff_lb!r}")
    print(f"feasible {'yes' if cert.feasible else 'no'}")
    print(f"optimal {'yes' if cert.optimal else 'no'}")
    if not cert.feasible:
        return EXIT_INPUT
    return EXIT_OK if cert.optimal else EXIT_SOLVER


# ---------------------------------------------------------------------------
# bench


def _bench_one(task):
    level_index, value, rep, seed, vary, fixed = task
    params = dict(fixed)
    params[vary] = value
    spec = RandomSpec(n=params["n"], m=params["m"], p0=params["p0"],
                      ppm=params["ppm"], seed=seed)
    opts = SolverOptions(target_eff=params["target_eff"],
                         deletion_interval=params["l"],
                         max_iters=params["max_iters"], fallback=True)
    report = solve_equality(random_instance(spec), opts)
    return (level_index, rep, value, seed, report.iterations, report.elapsed,
            report.phi, report.status.value)


def bench_converged(status: str) -> bool:
    """Runs that certify the target efficiency count as converged."""
    return status in (Status.CONVERGED.value, Status.COLLAPSED.value)


def run_bench(vary: str, reps: int, levels=None, seed: int = 0, jobs: int = 1,
              n: int = 600, m: int = 4, p0: float = 0.5, ppm: float = 0.5,
              l: Optional[int] = 16, target_eff: float = 0.99999,
              max_iters: int = 200_000) -> list:
    """Solve ``reps`` seeded random instances per level of ``vary``.

    Replicate ``r`` uses instance seed ``seed + r`` at every level, so the
    levels are compared on the same regressors wherever the counts agree.
    Rows come back sorted by ``(level, rep)``.
    """
    if vary not in BENCH_LEVELS:
        raise ValueError(f"cannot vary {vary!r}")
    levels = BENCH_LEVELS[vary] if levels is None else tuple(levels)
    fixed = dict(n=n, m=m, p0=p0, ppm=ppm, l=l, target_eff=target_eff,
                 max_iters=max_iters)
    tasks = [(k, v, r, seed + r, vary, fixed)
             for k, v in enumerate(levels) for r in range(reps)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_bench_one, tasks))
    else:
        rows = [_bench_one(t) for t in tasks]
    rows.sort(key=lambda row: (row[0], row[1]))
    return [row[2:3] + (row[1],) + row[3:] for row in rows]


def _level_label(value) -> str:
    return "none" if value is None else repr(value)


def cmd_bench(args) -> int:
    levels = None
    if args.levels:
        parse = {"l": _interval, "p0": _proportion, "ppm": _proportion}[args.vary]
        try:
            levels = [parse(x.strip()) for x in args.levels.split(",")]
        except argparse.ArgumentTypeError as exc:
            raise UsageError(str(exc)) from None
    try:
        rows = run_bench(args.vary, args.reps, levels, seed=args.seed,
                         jobs=args.jobs, n=args.n, m=args.m, p0=args.p0,
                         ppm=args.ppm, l=args.l, target_eff=args.target_eff,
                         max_iters=args.max_iters)
    except (ValueError, EmptyStratumError) as exc:
        raise UsageError(str(exc)) from None
    out = open(args.output, "w", newline="") if args.output else sys.stdout
    try:
        writer = csv.writer(out)
        writer.writerow(BENCH_FIELDS)
        for value, rep, seed, iters, elapsed, phi, status in rows:
            writer.writerow([_level_label(value), rep, seed, iters,
                             f"{elapsed:.6f}", repr(phi), status])
    finally:
        if out is not sys.stdout:
            out.close()
    by_level = {}
    for value, _, _, _, elapsed, _, _ in rows:
        by_level.setdefault(_level_label(value), []).append(elapsed)
    for label, times in by_level.items():
        print(f"{args.vary}={label}: median elapsed "
              f"{statistics.median(times):.4f} s", file=sys.stderr)
    failed = [r for r in rows if not bench_converged(r[6])]
    if failed:
        print(f"{len(failed)} run(s) did not converge", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


# ---------------------------------------------------------------------------
# demo-quad

DEMO_FIELDS = ("milestone", "r1", "r2", "weight", "deleted")


def cmd_demo_quad(args) -> int:
    instance = quadratic_grid_instance(args.grid_size)
    levels = tuple(x for x in DEMO_LEVELS if x <= args.target_eff)
    opts = _solver_options(args, milestones=levels)
    report = solve_equality(instance, opts)
    r1, r2 = quadratic_grid_coordinates(args.grid_size)
    with open(args.points, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(DEMO_FIELDS)
        for snap in report.snapshots:
            for k in range(instance.n):
                writer.writerow([repr(snap.level), repr(float(r1[k])),
                                 repr(float(r2[k])), repr(float(snap.w[k])),
                                 int(not snap.active_mask[k])])
    for snap in report.snapshots:
        print(f"eff {snap.level}: iteration {snap.iteration}, "
              f"active {snap.active}, elapsed {snap.elapsed:.2f} s")
    if args.output:
        write_report(report, instance, args.output)
    if args.trace:
        write_trace(report, args.trace)
    return _status_exit(report.status)


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="costdesign",
        description="D-optimal designs under size and cost constraints.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve a problem file")
    p.add_argument("--input", required=True)
    p.add_argument("--mode", choices=("auto", "equality", "size", "cost"),
                   default="auto")
    _add_solver_flags(p)
    p.add_argument("--output", help="report JSON")
    p.add_argument("--trace", help="trace CSV")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("gen", help="write a generated problem file")
    p.add_argument("kind", nargs="?", choices=("random", "quad"),
                   default="random")
    p.add_argument("--n", type=int, default=600)
    p.add_argument("--m", type=int, default=4)
    p.add_argument("--p0", type=_proportion, default=0.5)
    p.add_argument("--ppm", type=_proportion, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--grid-size", type=int, default=101)
    p.add_argument("--output")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("check", help="test a design for optimality")
    p.add_argument("--input", required=True)
    p.add_argument("--design", required=True,
                   help="report JSON or 'id,w' CSV")
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--tol-one", type=float, default=0.0)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("bench", help="timing study on random problems")
    p.add_argument("--reps", type=int, default=10)
    p.add_argument("--vary", choices=tuple(BENCH_LEVELS), required=True)
    p.add_argument("--levels", help="comma-separated levels to override the "
                                    "defaults")
    p.add_argument("--n", type=int, default=600)
    p.add_argument("--m", type=int, default=4)
    p.add_argument("--p0", type=_proportion, default=0.5)
    p.add_argument("--ppm", type=_proportion, default=0.5)
    p.add_argument("--l", type=_interval, default=16, metavar="K|none")
    p.add_argument("--target-eff", type=float, default=0.99999)
    p.add_argument("--max-iters", type=int, default=200_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--output")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("demo-quad", help="quadratic-grid study")
    p.add_argument("--grid-size", type=int, default=101)
    _add_solver_flags(p)
    p.set_defaults(target_eff=0.9999)
    p.add_argument("--points", required=True,
                   help="CSV of weights and deletions at each milestone")
    p.add_argument("--output", help="report JSON")
    p.add_argument("--trace", help="trace CSV")
    p.set_defaults(func=cmd_demo_quad)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except (ProblemFileError, UsageError, InvalidInstanceError,
            EmptyStratumError, SingularDesignError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
