"""Step-by-step collocation solver.

On subinterval i the unknowns u_{i+1,1..nu} satisfy

    u_j = f(x_ij) + H_j + h_i * sum_k c_jk kappa(x_ij, x_ik, u_k)

where H_j is the history sum over completed subintervals and u_{i+1,0} is
inherited from the previous step.  Linear kernels are solved directly,
everything else by Newton's method.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from logvolterra.chebpoly import ChebSeries3, discrete_transform, eval_expansion
from logvolterra.mesh import CollocationGrid, Partition, grid_points
from logvolterra.quadweights import HistoryWeights, b_vector, c_matrix

log = logging.getLogger(__name__)

NEWTON_MAX_ITER = 50
NEWTON_TOL = 1e-13


class SolverError(RuntimeError):
    pass


def _broadcast(fn, *args):
    with np.errstate(all="ignore"):
        out = fn(*args)
    shape = np.broadcast_shapes(*(np.shape(a) for a in args))
    return np.broadcast_to(np.asarray(out, dtype=float), shape)


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    """y(x) = f(x) + int_0^x ln(x - s) kernel(x, s, y(s)) ds on [0, X].

    All callables must broadcast over numpy arrays.  `linear_kernel`, when
    given, is K(x, s) with kernel(x, s, y) = K(x, s) * y.
    """

    name: str
    X: float
    f: Callable
    kernel: Callable
    kernel_dy: Optional[Callable] = None
    linear_kernel: Optional[Callable] = None
    exact: Optional[Callable] = None
    y0: Optional[float] = None

    def __post_init__(self):
        if not self.X > 0:
            raise ValueError(f"X must be positive, got {self.X}")
        if self.linear_kernel is not None:
            rng = np.random.default_rng(20240101)
            x = rng.uniform(0.0, self.X, 10) + 1e-3 * self.X
            s = x * rng.uniform(0.0, 1.0, 10)
            y = rng.uniform(-2.0, 2.0, 10)
            lhs = _broadcast(self.kernel, x, s, y)
            rhs = _broadcast(self.linear_kernel, x, s) * y
            if not np.all(np.abs(lhs - rhs) <= 1e-12 * np.maximum(np.abs(rhs), 1e-300)):
                raise ValueError(f"{self.name}: kernel is not K(x, s) * y")

    @property
    def is_linear(self) -> bool:
        return self.linear_kernel is not None

    def initial_value(self) -> float:
        if self.y0 is not None:
            return float(self.y0)
        with np.errstate(all="ignore"):
            value = float(self.f(0.0))
        if not math.isfinite(value):
            raise SolverError(
                f"{self.name}: f(0) = {value} is not finite; supply y0"
            )
        return value

    def dkernel_dy(self, x, s, y):
        """Analytic derivative when available, else a central difference."""
        if self.kernel_dy is not None:
            return _broadcast(self.kernel_dy, x, s, y)
        y = np.asarray(y, dtype=float)
        delta = np.finfo(float).eps ** (1.0 / 3.0) * (1.0 + np.abs(y))
        up = _broadcast(self.kernel, x, s, y + delta)
        down = _broadcast(self.kernel, x, s, y - delta)
        return (up - down) / (2.0 * delta)


@dataclass(frozen=True, eq=False)
class Solution:
    """Nodal values ``values[i, j]`` = u_{i+1,j} at ``nodes[i, j]`` = x_ij."""

    partition: Partition
    grid: CollocationGrid
    nodes: np.ndarray
    values: np.ndarray
    coefficients: np.ndarray
    iterations: np.ndarray
    residuals: np.ndarray

    @property
    def nu(self) -> int:
        return self.grid.nu

    @property
    def endpoint_value(self) -> float:
        return float(self.values[-1, -1])

    def series(self, i: int) -> ChebSeries3:
        pts = self.partition.points
        return ChebSeries3(tuple(self.coefficients[i]), pts[i], pts[i + 1])

    def __call__(self, x, mode="interpolation"):
        return eval_solution(self, x, mode)


@dataclass(frozen=True)
class ErrorReport:
    """Errors against an exact solution.

    `maerr` is the maximum over every collocation point x_ij, `mesh_maerr`
    the maximum over the breakpoints x_0..x_N only.
    """

    h: float
    N: int
    nu: int
    maerr: float
    err_at_X: float
    e_over_h_nu: float
    mesh_maerr: float = float("nan")
    eoc: Optional[float] = None


def history_term(nodes, values, steps, problem: ProblemSpec, x_target,
                 b: HistoryWeights):
    """Sum over completed subintervals of h_l sum_k b_k ln(x - x_lk) kappa(x, x_lk, u_lk).

    `nodes` and `values` hold the completed subintervals row by row; the
    result has the shape of `x_target`.  b_0 vanishes, so the left endpoint
    of each past subinterval is never evaluated.
    """
    x_target = np.asarray(x_target, dtype=float)
    nodes = np.asarray(nodes, dtype=float)
    if nodes.size == 0:
        return np.zeros_like(x_target)
    x = x_target[..., None, None]
    s = nodes[None, :, 1:]
    u = np.asarray(values, dtype=float)[None, :, 1:]
    with np.errstate(all="ignore"):
        terms = np.log(x - s) * _broadcast(problem.kernel, x, s, u)
        out = np.einsum("...lk,k,l->...", terms, b.weights[1:], np.asarray(steps))
    if not np.all(np.isfinite(out)):
        raise SolverError(f"{problem.name}: non-finite history term")
    return out.reshape(x_target.shape)


def _local_terms(problem, C, h, x, u):
    return h * np.sum(C[1:] * _broadcast(problem.kernel, x[1:, None], x[None, :], u[None, :]),
                      axis=1)


def step_subinterval(problem: ProblemSpec, x, h, C, known, u0, method="auto",
                     max_iter=NEWTON_MAX_ITER, tol=NEWTON_TOL):
    """Solve one subinterval for u_1..u_nu.

    Parameters
    ----------
    x : ndarray
        The nu + 1 collocation points of the subinterval.
    h : float
        Step length.
    C : ndarray
        Local weight matrix for `h`.
    known : ndarray
        f(x_j) plus the history term, for j = 1..nu.
    u0 : float
        The value inherited at the left endpoint.

    Returns
    -------
    values, iterations, residual
        All nu + 1 nodal values, the Newton iteration count (0 for a direct
        solve) and the max-norm residual of the collocation equations.
    """
    nu = x.size - 1
    u = np.full(nu + 1, float(u0))
    direct = method == "direct" or (method == "auto" and problem.is_linear)
    if direct and not problem.is_linear:
        raise ValueError("direct elimination needs a linear kernel")
    iterations = 0
    try:
        if direct:
            M = h * C[1:] * _broadcast(problem.linear_kernel, x[1:, None], x[None, :])
            A = np.eye(nu) - M[:, 1:]
            u[1:] = np.linalg.solve(A, known + M[:, 0] * u0)
        else:
            for iterations in range(1, max_iter + 1):
                F = u[1:] - known - _local_terms(problem, C, h, x, u)
                J = np.eye(nu) - h * C[1:, 1:] * problem.dkernel_dy(
                    x[1:, None], x[None, 1:], u[None, 1:])
                du = np.linalg.solve(J, -F)
                u[1:] += du
                if not np.all(np.isfinite(u)):
                    raise SolverError("Newton iterate is not finite")
                if np.max(np.abs(du)) <= tol * (1.0 + np.max(np.abs(u))):
                    break
            else:
                raise SolverError(f"Newton did not converge in {max_iter} iterations")
    except np.linalg.LinAlgError as exc:
        raise SolverError(f"singular local system: {exc}") from exc
    residual = np.max(np.abs(u[1:] - known - _local_terms(problem, C, h, x, u)))
    if not np.isfinite(residual):
        raise SolverError("non-finite kernel or forcing value")
    return u, iterations, float(residual)


def solve(problem: ProblemSpec, partition: Partition, grid: CollocationGrid,
          method="auto") -> Solution:
    """March across the partition, one subinterval at a time.

    `method` is ``"auto"`` (direct for linear kernels, Newton otherwise),
    ``"direct"`` or ``"newton"``.
    """
    if not math.isclose(partition.X, problem.X, rel_tol=1e-12):
        raise ValueError(
            f"partition ends at {partition.X} but the problem is posed on [0, {problem.X}]"
        )
    nu, N = grid.nu, partition.N
    b = b_vector(nu)
    nodes = grid_points(partition, grid)
    steps = partition.steps
    values = np.zeros((N, nu + 1))
    iterations = np.zeros(N, dtype=int)
    residuals = np.zeros(N)
    u0 = problem.initial_value()
    for i in range(N):
        h = float(steps[i])
        C = c_matrix(nu, h).entries
        x = nodes[i]
        known = _broadcast(problem.f, x[1:]) + history_term(
            nodes[:i], values[:i], steps[:i], problem, x[1:], b)
        if not np.all(np.isfinite(known)):
            raise SolverError(f"{problem.name}: non-finite forcing on subinterval {i}")
        values[i], iterations[i], residuals[i] = step_subinterval(
            problem, x, h, C, known, u0, method)
        u0 = values[i, -1]
    coefficients = discrete_transform(values, nu)
    for arr in (nodes, values, coefficients, iterations, residuals):
        arr.setflags(write=False)
    log.debug("%s: solved N=%d nu=%d, max Newton iterations %d",
              problem.name, N, nu, iterations.max())
    return Solution(partition, grid, nodes, values, coefficients, iterations, residuals)


def _interval_index(points, x):
    i = np.searchsorted(points, x, side="right") - 1
    return np.clip(i, 0, points.size - 2)


def eval_solution(sol: Solution, x, mode="interpolation"):
    """Evaluate the computed solution at `x` in [0, X].

    ``mode="interpolation"`` uses the degree-nu polynomial through the nodal
    values of the covering subinterval (barycentric form) and returns stored
    values exactly at the nodes.  ``mode="expansion"`` sums the third-kind
    series, which is only a quasi-interpolant of the nodal values.
    """
    pts = sol.partition.points
    xa = np.asarray(x, dtype=float)
    if np.any(xa < 0) or np.any(xa > pts[-1]):
        raise ValueError(f"x outside [0, {pts[-1]}]")
    flat = xa.ravel()
    idx = _interval_index(pts, flat)
    if mode == "expansion":
        out = np.array([eval_expansion(sol.series(i), xi) for i, xi in zip(idx, flat)])
    elif mode == "interpolation":
        nu = sol.nu
        w = (-1.0) ** np.arange(nu + 1)
        w[[0, -1]] *= 0.5
        nodes, vals = sol.nodes[idx], sol.values[idx]
        diff = flat[:, None] - nodes
        hit = diff == 0
        with np.errstate(all="ignore"):
            q = w / diff
            out = (q * vals).sum(axis=1) / q.sum(axis=1)
        rows = hit.any(axis=1)
        out[rows] = vals[rows][hit[rows]]
    else:
        raise ValueError(f"unknown evaluation mode {mode!r}")
    return out.reshape(xa.shape)[()]


def error_report(sol: Solution, exact: Callable) -> ErrorReport:
    """Maximum nodal error over every x_ij, plus the error at x = X."""
    y = _broadcast(exact, sol.nodes)
    err = np.abs(y - sol.values)
    maerr = float(err.max())
    mesh_maerr = float(max(err[0, 0], err[:, -1].max()))
    err_at_X = float(err[-1, -1])
    h = sol.partition.diameter
    return ErrorReport(h, sol.partition.N, sol.nu, maerr, err_at_X,
                       err_at_X / h ** sol.nu, mesh_maerr)


def order_estimates(hs, errors):
    """Observed orders log(e_m / e_{m+1}) / log(h_m / h_{m+1}); first entry None."""
    out = [None]
    for (h0, e0), (h1, e1) in zip(zip(hs, errors), zip(hs[1:], errors[1:])):
        if e0 > 0 and e1 > 0:
            out.append(math.log(e0 / e1) / math.log(h0 / h1))
        else:
            out.append(float("nan"))
    return out
