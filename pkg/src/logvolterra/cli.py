"""Command-line front end: solve, converge, validate-weights, bench."""

from __future__ import annotations

import argparse
import csv
import logging
import math
import os
import re
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from logvolterra.mesh import build_partition, collocation_fractions
from logvolterra.problems import (
    ProblemError,
    UnknownProblemError,
    get_config,
    load_problem,
)
from logvolterra.quadweights import b_vector, c_matrix, i_vector, node_eta
from logvolterra.reference import exact_i_value, omega_value
from logvolterra.solver import SolverError, error_report, order_estimates, solve

log = logging.getLogger("logvolterra")

CSV_COLUMNS = ("h", "N", "nu", "maerr", "err_at_X", "eoc", "e_over_h_nu", "newton_max")

#: Endpoint errors of an alternative published method on example-4.1, nu = 3.
COMPARISON_EXAMPLE_41 = {0.1: 1.26e-3, 0.05: 3.65e-4, 0.025: 1.03e-4}

WEIGHT_TOL = 1e-11
HISTORY_TOL = 1e-12


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


@dataclass(frozen=True)
class ConvergenceRow:
    h: float
    N: int
    nu: int
    maerr: float
    err_at_X: float
    eoc: Optional[float]
    e_over_h_nu: float
    newton_max: int
    mesh_maerr: float = math.nan

    def csv_fields(self):
        eoc = "" if self.eoc is None else f"{self.eoc:.10e}"
        return [f"{self.h:.10e}", str(self.N), str(self.nu), f"{self.maerr:.10e}",
                f"{self.err_at_X:.10e}", eoc, f"{self.e_over_h_nu:.10e}",
                str(self.newton_max)]


_POWER = re.compile(r"^\s*(\d+(?:\.\d*)?)\s*\^\s*([-+]?\d+)\s*$")


def _parse_value(text):
    m = _POWER.match(text)
    if m:
        return float(m.group(1)) ** int(m.group(2))
    try:
        value = float(text)
    except ValueError:
        raise UsageError(f"cannot read step {text!r}") from None
    return value


def parse_h_list(text: str) -> list:
    """Parse ``2^-1..2^-10``, ``2^-3``, ``0.1,0.05`` and mixtures thereof."""
    values = []
    for item in text.split(","):
        item = item.strip()
        if ".." in item and "^" in item:
            lo, hi = item.split("..", 1)
            m0, m1 = _POWER.match(lo), _POWER.match(hi)
            if not (m0 and m1) or m0.group(1) != m1.group(1):
                raise UsageError(f"malformed range {item!r}")
            base = float(m0.group(1))
            e0, e1 = int(m0.group(2)), int(m1.group(2))
            step = 1 if e1 >= e0 else -1
            values.extend(base ** e for e in range(e0, e1 + step, step))
        else:
            values.append(_parse_value(item))
    if not values or not all(v > 0 and math.isfinite(v) for v in values):
        raise UsageError(f"step list {text!r} must contain positive numbers")
    return values


def parse_int_list(text: str) -> list:
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"cannot read integer list {text!r}") from None
    if not values:
        raise UsageError("empty list")
    return values


def parse_mesh(text: str):
    if text == "uniform":
        return ("uniform", 1.0)
    m = re.fullmatch(r"graded:(.+)", text)
    if m:
        try:
            q = float(m.group(1))
        except ValueError:
            raise UsageError(f"bad grading exponent in {text!r}") from None
        if q < 1:
            raise UsageError("grading exponent must be >= 1")
        return ("graded", q)
    raise UsageError(f"mesh must be 'uniform' or 'graded:<q>', got {text!r}")


def _intervals(X, h):
    N = X / h
    if abs(N - round(N)) > 1e-9 * max(N, 1.0) or round(N) < 1:
        raise UsageError(f"h = {h!r} does not divide X = {X!r} into whole steps")
    return int(round(N))


def _check_nu(nu):
    if nu < 2:
        raise UsageError(f"nu must be >= 2, got {nu}")


def run_cell(config, nu, h, mesh):
    """Solve one (nu, h) cell of a sweep; returns (nu, h, report, newton_max)."""
    problem = load_problem(config)
    N = _intervals(problem.X, h)
    partition = build_partition(problem.X, N, mesh[0], q=mesh[1])
    sol = solve(problem, partition, collocation_fractions(nu))
    report = error_report(sol, problem.exact)
    return nu, h, N, report, int(sol.iterations.max())


def convergence_rows(config, nus, hs, mesh=("uniform", 1.0), jobs=1) -> list:
    """One ConvergenceRow per (nu, h); rows grouped by nu, decreasing h."""
    if config.exact is None:
        raise UsageError(f"{config.name} has no exact solution; "
                         "a convergence study needs one")
    cells = [(nu, h) for nu in nus for h in hs]
    if jobs > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(run_cell, config, nu, h, mesh) for nu, h in cells]
            results = [f.result() for f in futures]
    else:
        results = [run_cell(config, nu, h, mesh) for nu, h in cells]
    results.sort(key=lambda r: (r[0], -r[1]))
    rows = []
    for nu in sorted(set(nus)):
        group = [r for r in results if r[0] == nu]
        hs_nu = [r[1] for r in group]
        eocs = order_estimates(hs_nu, [r[3].maerr for r in group])
        for (_, h, N, rep, newton), eoc in zip(group, eocs):
            rows.append(ConvergenceRow(h, N, nu, rep.maerr, rep.err_at_X, eoc,
                                       rep.err_at_X / h ** nu, newton, rep.mesh_maerr))
    return rows


def write_csv(rows, stream):
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        writer.writerow(row.csv_fields())


def format_table(rows, comparison=None) -> str:
    head = f"{'h':>12} {'N':>6} {'nu':>3} {'MAERR':>12} {'max|e(x_i)|':>12} {'err(X)':>12} {'EOC':>7} {'E/h^nu':>12} {'newton':>6}"
    if comparison:
        head += f" {'comparison':>12}"
    lines = [head]
    for r in rows:
        eoc = "" if r.eoc is None else f"{r.eoc:.3f}"
        line = (f"{r.h:12.5e} {r.N:6d} {r.nu:3d} {r.maerr:12.5e} {r.mesh_maerr:12.5e} {r.err_at_X:12.5e} "
                f"{eoc:>7} {r.e_over_h_nu:12.5e} {r.newton_max:6d}")
        if comparison:
            ref = next((v for k, v in comparison.items() if math.isclose(k, r.h)), None)
            line += f" {ref:12.5e}" if ref is not None else f" {'':>12}"
        lines.append(line)
    return "\n".join(lines)


def cmd_solve(args, out):
    _check_nu(args.nu)
    config = get_config(args.problem)
    if args.dump:
        out.write(config.dump())
    problem = load_problem(config)
    mesh = parse_mesh(args.mesh)
    if args.h is not None:
        N = _intervals(problem.X, _parse_value(args.h))
    else:
        N = args.n
    if N is None or N < 1:
        raise UsageError("give --n or --h")
    partition = build_partition(problem.X, N, mesh[0], q=mesh[1])
    sol = solve(problem, partition, collocation_fractions(args.nu))
    out.write(f"problem     {problem.name}\n")
    out.write(f"nu          {args.nu}\n")
    out.write(f"N           {N}\n")
    out.write(f"h           {partition.diameter:.10e}\n")
    out.write(f"u(X)        {sol.endpoint_value:.10f}\n")
    out.write(f"newton max  {int(sol.iterations.max())}\n")
    if problem.exact is not None:
        rep = error_report(sol, problem.exact)
        out.write(f"MAERR       {rep.maerr:.10e}\n")
        out.write(f"err at X    {rep.err_at_X:.10e}\n")
    out.write(f"{'x_i':>18} {'u(x_i)':>18}\n")
    stride = max(1, N // 16)
    for i in range(0, N, stride):
        out.write(f"{sol.nodes[i, -1]:18.10e} {sol.values[i, -1]:18.10e}\n")
    if (N - 1) % stride:
        out.write(f"{sol.nodes[-1, -1]:18.10e} {sol.values[-1, -1]:18.10e}\n")
    if args.out:
        with open(args.out, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            cols = ["i", "j", "x", "u"] + (["exact", "abs_err"] if problem.exact else [])
            writer.writerow(cols)
            exact = (np.broadcast_to(problem.exact(sol.nodes), sol.nodes.shape)
                     if problem.exact else None)
            for i in range(N):
                for j in range(args.nu + 1):
                    row = [str(i), str(j), f"{sol.nodes[i, j]:.10e}", f"{sol.values[i, j]:.10e}"]
                    if exact is not None:
                        row += [f"{exact[i, j]:.10e}",
                                f"{abs(exact[i, j] - sol.values[i, j]):.10e}"]
                    writer.writerow(row)
    return 0


def cmd_converge(args, out):
    config = get_config(args.problem)
    nus = parse_int_list(args.nu_list)
    for nu in nus:
        _check_nu(nu)
    hs = parse_h_list(args.h_list)
    rows = convergence_rows(config, nus, hs, parse_mesh(args.mesh), args.jobs)
    comparison = COMPARISON_EXAMPLE_41 if config.name == "example-4.1" else None
    out.write(f"problem {config.name}\n")
    out.write(format_table(rows, comparison) + "\n")
    if comparison:
        out.write("comparison: published endpoint errors of an alternative method\n")
    if args.out:
        with open(args.out, "w", newline="") as fh:
            write_csv(rows, fh)
    return 0


def validate_weights(nu_max, hs, out):
    """Compare recurrence moments with the closed-form oracle; True if all pass."""
    ok = True
    worst = 0.0
    out.write(f"{'nu':>3} {'j':>3} {'h':>12} {'max |I - I_exact|':>18}\n")
    for nu in range(2, nu_max + 1):
        for j in range(nu + 1):
            for h in hs:
                dev = max(abs(v - exact_i_value(r, node_eta(nu, j), h))
                          for r, v in enumerate(i_vector(nu, j, h)))
                worst = max(worst, dev)
                out.write(f"{nu:3d} {j:3d} {h:12.5e} {dev:18.3e}\n")
    status = "ok" if worst <= WEIGHT_TOL else "FAIL"
    ok &= worst <= WEIGHT_TOL
    out.write(f"max moment deviation {worst:.3e} (tol {WEIGHT_TOL:.0e}) {status}\n")

    out.write(f"{'nu':>3} {'C exact n<=nu-2':>16} {'C defect n=nu-1':>16} {'b exact n<=nu-2':>16}\n")
    for nu in range(2, nu_max + 1):
        beta = collocation_fractions(nu).fractions
        c_err = 0.0
        for h in hs:
            C = c_matrix(nu, h).entries
            for j in range(1, nu + 1):
                for n in range(nu - 1):
                    c_err = max(c_err, abs(C[j] @ beta ** n - omega_value(n, beta[j], h)))
        C1 = c_matrix(nu, 1.0).entries
        defect = max(abs(C1[j] @ beta ** (nu - 1) - omega_value(nu - 1, beta[j], 1.0))
                     for j in range(1, nu + 1))
        b = b_vector(nu).weights
        b_err = max(abs(b @ beta ** n - 1.0 / (n + 1)) for n in range(nu - 1))
        row_ok = c_err <= WEIGHT_TOL and defect > 1e-8 and b_err <= HISTORY_TOL
        ok &= row_ok
        out.write(f"{nu:3d} {c_err:16.3e} {defect:16.3e} {b_err:16.3e} "
                  f"{'ok' if row_ok else 'FAIL'}\n")
        if nu == 2:
            first = float(b @ beta)
            confirmed = abs(first - 7.0 / 12.0) <= HISTORY_TOL and abs(first - 0.5) > 1e-8
            ok &= confirmed
            out.write(f"nu=2 history weights on s: {first:.15f} vs exact 0.5 -> "
                      f"{'cutoff confirmed' if confirmed else 'UNEXPECTED'}\n")
    return ok


def cmd_validate(args, out):
    if args.nu_max < 2:
        raise UsageError("--nu-max must be >= 2")
    hs = parse_h_list(args.h_list)
    return 0 if validate_weights(args.nu_max, hs, out) else 3


def cmd_bench(args, out):
    nus = parse_int_list(args.nu_list)
    for nu in nus:
        _check_nu(nu)
    config = get_config("example-4.2")
    problem = load_problem(config)
    partition = build_partition(problem.X, args.n)
    times = []
    out.write(f"{'nu':>4} {'s/step':>12}\n")
    for nu in nus:
        grid = collocation_fractions(nu)
        best = math.inf
        for _ in range(args.repeat):
            t0 = time.perf_counter()
            solve(problem, partition, grid)
            best = min(best, time.perf_counter() - t0)
        times.append(best / args.n)
        out.write(f"{nu:4d} {times[-1]:12.4e}\n")
    if len(nus) > 1:
        slope = np.polyfit(np.log(np.array(nus) + 1.0), np.log(times), 1)[0]
        out.write(f"log-log slope of time vs nu+1: {slope:.2f}\n")
    return 0


def build_parser():
    parser = _Parser(prog="logvolterra", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="solve one problem on one mesh")
    p.add_argument("--problem", required=True, help="built-in name or problem file")
    p.add_argument("--nu", type=int, default=4, help="nodes per subinterval (default 4)")
    p.add_argument("--mesh", default="uniform", help="uniform or graded:q")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--n", type=int, help="number of subintervals")
    group.add_argument("--h", help="uniform step, must divide X")
    p.add_argument("--out", help="write nodal values as CSV")
    p.add_argument("--dump", action="store_true", help="echo the parsed problem")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("converge", help="error table over nu and h")
    p.add_argument("--problem", required=True, help="built-in name or problem file")
    p.add_argument("--nu-list", default="3,4,5", help="comma-separated nu values")
    p.add_argument("--h-list", default="2^-1..2^-10",
                   help="steps, e.g. 0.1,0.05 or 2^-1..2^-10")
    p.add_argument("--mesh", default="uniform", help="uniform or graded:q")
    p.add_argument("--out", help="write the table as CSV")
    p.add_argument("--jobs", type=int, default=min(4, os.cpu_count() or 1),
                   help="worker processes for the sweep")
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("validate-weights", help="check weights against the oracle")
    p.add_argument("--nu-max", type=int, default=8, help="largest nu to check")
    p.add_argument("--h-list", default="2^0..2^-10", help="step sizes to check")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("bench", help="time per subinterval against nu")
    p.add_argument("--nu-list", default="4,8,16", help="nu values to time")
    p.add_argument("--n", type=int, default=64, help="subintervals per run")
    p.add_argument("--repeat", type=int, default=3, help="runs per nu, best is kept")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        return args.func(args, out)
    except (UsageError, UnknownProblemError, ProblemError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SolverError as exc:
        print(f"solver failed: {exc}", file=sys.stderr)
        return 2
