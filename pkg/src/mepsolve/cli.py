"""Command-line front end: single solves, sweeps, frontier searches,
oracle cross-checks, and problem generation, with CSV reporting.

Every attempted solve becomes one RunRecord and one CSV row; the schema is
fixed (see CSV_COLUMNS) so downstream plotting consumes only CSV.  Sweeps
run targets concurrently when --threads (or MEPSOLVE_THREADS) is set, but
rows are always written in deterministic target order.
"""

import csv
import itertools
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import click
import numpy as np

from . import delta as delta_mod
from . import gallery, newton
from .problem import (
    SignedMultiindex,
    SolverConfig,
    SolverError,
    read_problem,
    write_problem,
)

CSV_COLUMNS = [
    "problem_id", "family", "n", "m", "target_index", "sign", "status",
    "iterations", "residual", "wall_time_s", "solve_order",
]

MAX_ATTEMPTS = 3

SWEEP_GUARD = 10**6


@dataclass
class RunRecord:
    """One attempted solve, ready for CSV serialization."""

    problem_id: str
    family: str
    n: int
    m: int
    target_index: tuple
    sign: int | None
    status: str
    iterations: int
    residual: float | None
    lam: np.ndarray | None
    wall_time: float
    solve_order: int | None = None

    def row(self):
        base = {
            "problem_id": self.problem_id,
            "family": self.family,
            "n": self.n,
            "m": self.m,
            "target_index": "-".join(str(i) for i in self.target_index),
            "sign": {1: "+", -1: "-", None: ""}[self.sign],
            "status": self.status,
            "iterations": self.iterations,
            "residual": "" if self.residual is None else f"{self.residual:.16e}",
            "wall_time_s": f"{self.wall_time:.6f}",
            "solve_order": "" if self.solve_order is None else self.solve_order,
        }
        lam = {f"lambda_{ell}": "" for ell in range(self.m + 1)}
        if self.lam is not None:
            vals = np.asarray(self.lam, dtype=np.float64).reshape(-1)
            offset = self.m + 1 - vals.size
            for ell, x in enumerate(vals):
                lam[f"lambda_{offset + ell}"] = f"{x:.16e}"
        base.update(lam)
        return base


def _columns(m):
    cols = CSV_COLUMNS[:9] + [f"lambda_{ell}" for ell in range(m + 1)]
    return cols + CSV_COLUMNS[9:]


def _write_csv(path, records, m):
    cols = _columns(m)
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.DictWriter(handle, fieldnames=cols, lineterminator="\n")
        writer.writeheader()
        for rec in records:
            writer.writerow(rec.row())


def _problem_id(path):
    return os.path.splitext(os.path.basename(path))[0]


def _load(path):
    try:
        return read_problem(path)
    except Exception as exc:
        raise click.ClickException(f"{type(exc).__name__}: {exc}")


def _parse_multiindex(text, dims):
    try:
        index = tuple(int(part) for part in text.replace("-", ",").split(","))
    except ValueError:
        raise click.BadParameter(f"cannot parse multiindex {text!r}")
    if len(index) != len(dims):
        raise click.BadParameter(
            f"multiindex {text!r} has {len(index)} entries, expected "
            f"{len(dims)}")
    for k, (entry, size) in enumerate(zip(index, dims)):
        if not 1 <= entry <= size:
            raise click.BadParameter(
                f"multiindex entry {entry} out of range 1..{size} "
                f"for equation {k}")
    return index


def _parse_sign(text):
    if text is None:
        return None
    if text in ("+", "+1", "1"):
        return 1
    if text in ("-", "-1"):
        return -1
    raise click.BadParameter(f"sign must be + or -, got {text!r}")


def _resolve_threads(threads):
    if threads is not None:
        return max(1, threads)
    env = os.environ.get("MEPSOLVE_THREADS", "")
    if env.strip():
        try:
            return max(1, int(env))
        except ValueError:
            raise click.ClickException(
                f"MEPSOLVE_THREADS={env!r} is not an integer")
    return 1


def _build_config(problem, tol, max_iter, tau, seed, globalize):
    if globalize is None:
        globalize = problem.meta.get("family") == "laguerre"
    return SolverConfig(
        tol=tol, max_iter=max_iter, tau=tau, seed=seed, globalize=globalize)


def _attempt_seed(config, index, sign, attempt):
    key = tuple(index) + ((1 if sign == 1 else 0,) if sign else ()) + (attempt,)
    seq = np.random.SeedSequence(entropy=config.seed, spawn_key=key)
    return int(seq.generate_state(1)[0])


def _solve_with_retries(problem, index, sign, config, warm=None):
    """Run one target, warm-started when vectors are supplied, retrying
    with reseeded random initial vectors on failure.

    Returns (status, report-or-None, error-name) with status taken from the
    last attempt.
    """
    target = SignedMultiindex(index, sign) if sign is not None else index
    last_status, last_report, last_error = "max-iter", None, ""
    attempts = [warm] if warm is not None else []
    attempts += [None] * MAX_ATTEMPTS
    for attempt, vectors in enumerate(attempts):
        cfg = replace(config, seed=_attempt_seed(config, index, sign, attempt))
        try:
            report = newton.solve(problem, target, cfg,
                                  initial_vectors=vectors)
        except SolverError as exc:
            last_status = "breakdown"
            last_report = exc.report
            last_error = type(exc).__name__
            continue
        if report.converged:
            return "converged", report, ""
        last_status, last_report, last_error = report.status, report, ""
    return last_status, last_report, last_error


def _warm_vectors(report):
    pair = report.pair
    if pair.left_vectors is not None:
        return (pair.right_vectors, pair.left_vectors)
    return pair.right_vectors


def _sweep_all(problem, sign, config, workers):
    """Solve every multiindex, warm-starting each target from an already
    solved neighbor one index step below.

    Targets are processed in waves of constant index sum, so members of a
    wave only depend on the previous wave and can run concurrently.  The
    returned list follows sorted target order.
    """
    targets = sorted(itertools.product(
        *[range(1, n + 1) for n in problem.dims]))
    waves = {}
    for index in targets:
        waves.setdefault(sum(index), []).append(index)

    vectors = {}
    outcomes = {}

    def work(index):
        warm = None
        for k in reversed(range(problem.m)):
            if index[k] > 1:
                below = list(index)
                below[k] -= 1
                warm = vectors.get(tuple(below))
                if warm is not None:
                    break
        return index, _solve_with_retries(problem, index, sign, config, warm)

    for level in sorted(waves):
        wave = waves[level]
        if workers == 1 or len(wave) == 1:
            done = [work(index) for index in wave]
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                done = list(pool.map(work, wave))
        for index, (status, report, error) in done:
            outcomes[index] = (status, report, error)
            if status == "converged":
                vectors[index] = _warm_vectors(report)

    return [(index, *outcomes[index]) for index in targets]


def _record(problem, problem_id, index, sign, status, report, error,
            solve_order=None):
    family = str(problem.meta.get("family", ""))
    if report is not None and report.pair is not None:
        residual = report.residuals[-1] if report.residuals else None
        lam = report.pair.lam
        iterations = report.iterations
        wall = report.wall_time
    else:
        residual, lam, iterations, wall = None, None, 0, 0.0
    return RunRecord(
        problem_id=problem_id,
        family=family,
        n=max(problem.dims),
        m=problem.m,
        target_index=index,
        sign=sign,
        status=error or status,
        iterations=iterations,
        residual=residual,
        lam=lam,
        wall_time=wall,
        solve_order=solve_order,
    )


def _solver_options(f):
    f = click.option("--tol", type=float, default=1e-11, show_default=True,
                     help="Convergence tolerance on the Newton function.")(f)
    f = click.option("--max-iter", type=int, default=40, show_default=True,
                     help="Iteration cap per solve.")(f)
    f = click.option("--tau", type=float, default=0.5, show_default=True,
                     help="Damping factor of the globalized iteration.")(f)
    f = click.option("--seed", type=int, default=0, show_default=True,
                     help="Base seed for initial vectors.")(f)
    f = click.option("--globalize/--no-globalize", default=None,
                     help="Damp non-decreasing steps (default: on for the "
                          "laguerre family, off otherwise).")(f)
    return f


@click.group()
@click.version_option()
def main():
    """Compute eigenvalues of multiparameter eigenvalue problems by
    multiindex."""


@main.command("solve")
@click.argument("problem_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--multiindex", required=True,
              help="Target multiindex, comma separated (e.g. 1,1,4).")
@click.option("--sign", default=None,
              help="Orientation + or - for homogeneous targets.")
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="Optional CSV path for the run record.")
@_solver_options
def cmd_solve(problem_file, multiindex, sign, out, tol, max_iter, tau, seed,
              globalize):
    """Solve for a single eigenvalue by multiindex."""
    problem = _load(problem_file)
    index = _parse_multiindex(multiindex, problem.dims)
    sign_value = _parse_sign(sign)
    config = _build_config(problem, tol, max_iter, tau, seed, globalize)
    target = (SignedMultiindex(index, sign_value)
              if sign_value is not None else index)
    error_name = ""
    try:
        report = newton.solve(problem, target, config)
    except SolverError as exc:
        error_name = type(exc).__name__
        report = exc.report
        click.echo(f"error: {error_name}: {exc}", err=True)

    if report is not None and report.pair is not None:
        lam = report.pair.lam
        click.echo("lambda: " + "  ".join(f"{x:+.12e}" for x in lam))
        if report.residuals:
            click.echo(f"residual: {report.residuals[-1]:.3e}")
        click.echo(f"iterations: {report.iterations}")
        click.echo(f"status: {error_name or report.status}")
    if out:
        rec = _record(problem, _problem_id(problem_file), index, sign_value,
                      report.status if report else "breakdown", report,
                      error_name)
        _write_csv(out, [rec], problem.m)
    if error_name:
        sys.exit(2)
    if not report.converged:
        sys.exit(1)


@main.command("sweep")
@click.argument("problem_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--sign", default=None,
              help="Orientation + or - to sweep homogeneous targets.")
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="CSV path for all run records.")
@click.option("--threads", type=int, default=None,
              help="Worker threads (default: MEPSOLVE_THREADS or 1).")
@click.option("--force", is_flag=True,
              help="Sweep even when the index grid is very large.")
@_solver_options
def cmd_sweep(problem_file, sign, out, threads, force, tol, max_iter, tau,
              seed, globalize):
    """Solve every multiindex of the problem."""
    problem = _load(problem_file)
    total = int(np.prod(problem.dims))
    if total > SWEEP_GUARD and not force:
        raise click.ClickException(
            f"index grid has {total} entries; pass --force to sweep anyway")
    sign_value = _parse_sign(sign)
    config = _build_config(problem, tol, max_iter, tau, seed, globalize)
    problem_id = _problem_id(problem_file)
    workers = _resolve_threads(threads)

    outcomes = _sweep_all(problem, sign_value, config, workers)
    records = [
        _record(problem, problem_id, index, sign_value, status, report, error)
        for index, status, report, error in outcomes
    ]
    found = sum(1 for r in records if r.status == "converged")
    residuals = [r.residual for r in records if r.residual is not None]
    worst = max(residuals) if residuals else float("nan")
    click.echo(f"found {found}/{total} eigenvalues, max residual {worst:.3e}")
    if out:
        _write_csv(out, records, problem.m)
    if found < total:
        sys.exit(1)


@main.command("frontier")
@click.argument("problem_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--count", type=int, required=True,
              help="How many eigenvalues to enumerate.")
@click.option("--objective", default=None,
              help="Parameter component (1-based) or comma-separated weight "
                   "vector; default: the last component.")
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="CSV path, rows in pop order.")
@_solver_options
def cmd_frontier(problem_file, count, objective, out, tol, max_iter, tau,
                 seed, globalize):
    """Enumerate eigenvalues in increasing objective order."""
    problem = _load(problem_file)
    if objective is None:
        target_objective = problem.m
    elif "," in objective:
        target_objective = [float(x) for x in objective.split(",")]
    else:
        target_objective = int(objective)
    config = _build_config(problem, tol, max_iter, tau, seed, globalize)
    problem_id = _problem_id(problem_file)

    result = newton.frontier_smallest(problem, count, target_objective, config)

    records = []
    for index, report, value in result.pops:
        rec = _record(problem, problem_id, index, None, report.status, report,
                      "", solve_order=result.solve_order[index])
        records.append(rec)
        click.echo(
            f"index {'-'.join(str(i) for i in index)}  objective "
            f"{value:+.12e}  order {result.solve_order[index]}")
    for index, error in result.failures:
        records.append(_record(
            problem, problem_id, index, None, "breakdown", None, error,
            solve_order=result.solve_order[index]))
    click.echo(
        f"popped {len(result.pops)} eigenvalues with {result.solve_count} "
        f"solves ({len(result.failures)} failures)")
    if out:
        _write_csv(out, sorted(records, key=lambda r: r.solve_order), problem.m)
    if result.partial:
        sys.exit(1)


@main.command("oracle-check")
@click.argument("problem_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--sign", default="+",
              help="Orientation for the Newton sweep on homogeneous targets "
                   "of Hermitian problems.")
@_solver_options
def cmd_oracle_check(problem_file, sign, tol, max_iter, tau, seed, globalize):
    """Cross-check the Newton sweep against the tensor-space spectrum."""
    problem = _load(problem_file)
    config = _build_config(problem, tol, max_iter, tau, seed, globalize)
    sign_value = _parse_sign(sign)

    try:
        oracle = delta_mod.solve_all(problem, seed=config.seed)
    except Exception as exc:
        raise click.ClickException(f"{type(exc).__name__}: {exc}")

    grid = sorted(itertools.product(
        *[range(1, n + 1) for n in problem.dims]))
    labels = sorted(entry.index for entry in oracle)
    bijection = labels == grid
    click.echo(f"oracle eigenvalues: {len(oracle)}")
    click.echo(f"multiindex bijection: {'ok' if bijection else 'FAILED'}")

    e0 = np.zeros(problem.m + 1)
    e0[0] = 1.0
    deltas = delta_mod.build_delta(problem, mu=e0)
    if problem.hermitian:
        bottom = float(np.linalg.eigvalsh(deltas.weighted)[0])
        definite = bottom > 0
        click.echo(
            f"weighted operator positive definite: "
            f"{'yes' if definite else 'no'} (smallest eigenvalue "
            f"{bottom:.3e})")

    newton_points = []
    sweep_sign = sign_value if problem.hermitian else None
    for index, status, report, error in _sweep_all(problem, sweep_sign,
                                                   config, 1):
        if status != "converged":
            click.echo(f"sweep failed at {index}: {error or status}")
            sys.exit(1)
        lam = report.pair.lam
        if lam.size == problem.m:
            lam = np.concatenate(([1.0], lam))
            lam = lam / np.linalg.norm(lam)
        newton_points.append(lam)

    oracle_points = np.array([entry.lam for entry in oracle])
    sweep_points = np.array(newton_points)
    dist = delta_mod.hausdorff_distance(sweep_points, oracle_points,
                                        mod_sign=True)
    click.echo(f"hausdorff distance: {dist:.3e}")
    if not bijection or dist > 1e-8:
        sys.exit(1)


@main.command("generate")
@click.option("--family", required=True,
              type=click.Choice(["laguerre", "well-conditioned",
                                 "left-right-definite", "volkmer",
                                 "ellipsoid"]),
              help="Problem family.")
@click.option("--n", type=int, default=4, show_default=True,
              help="Matrix size (collocation size for ellipsoid).")
@click.option("--m", type=int, default=3, show_default=True,
              help="Number of parameters (random families).")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), required=True,
              help="Output problem file.")
def cmd_generate(family, n, m, seed, out):
    """Generate a problem instance and write it to a file."""
    if family == "volkmer":
        problem = gallery.volkmer_example()
    elif family == "ellipsoid":
        problem = gallery.ellipsoidal_wave(gallery.EllipsoidConfig(n=n))
    else:
        problem = gallery.generate_random(
            gallery.RandomSpec(n=n, m=m, seed=seed, family=family))
    write_problem(problem, out)
    click.echo(f"wrote {out}")


if __name__ == "__main__":
    main()
