"""Closed-form oracles used to check the weights and the solver.

Nothing here shares code with the recurrences in `quadweights`: the I
moments are obtained by expanding W_r(t + eta) in powers of t with exact
rational arithmetic and integrating each power against the logarithm in
closed form.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache, partial

import numpy as np

from logvolterra.chebpoly import MAX_EXACT_DEGREE, fourth_kind_monomials
from logvolterra.solver import ProblemSpec, Solution, SolverError, eval_solution

_GAUSS_POINTS = 24


def _log_moment(m, a, c):
    return a ** (m + 1) * (np.log(c * a) - 1.0 / (m + 1)) / (m + 1)


def log_moment(m: int, a: float, c: float) -> float:
    """int_0^a t^m ln(c t) dt = a^(m+1) (ln(c a) - 1/(m+1)) / (m+1)."""
    if m < 0:
        raise ValueError(f"order must be non-negative, got {m}")
    if not (a > 0 and c > 0):
        raise ValueError(f"need a > 0 and c > 0, got a={a}, c={c}")
    return float(_log_moment(m, a, c))


@lru_cache(maxsize=4096)
def _shifted_sums(r: int, eta: float):
    # W_r(t + eta) = sum_m s_m t^m, then
    # int_0^a ln(c t) t^m dt = ln(c a) a^(m+1)/(m+1) - a^(m+1)/(m+1)^2
    p = fourth_kind_monomials(r).coefficients
    e = Fraction(eta)
    a = 1 - e
    first = second = Fraction(0)
    apow = a
    for m in range(len(p)):
        s_m = sum(p[k] * math.comb(k, m) * e ** (k - m) for k in range(m, len(p)))
        first += s_m * apow / (m + 1)
        second += s_m * apow / (m + 1) ** 2
        apow *= a
    return float(first), float(second), float(a)


def exact_i_value(r: int, eta: float, h: float) -> float:
    """int_0^(1-eta) ln(h t / 2) W_r(t + eta) dt, evaluated in closed form."""
    if r > MAX_EXACT_DEGREE:
        raise OverflowError(f"degree {r} exceeds {MAX_EXACT_DEGREE}")
    if not -1.0 <= eta <= 1.0:
        raise ValueError(f"eta must lie in [-1, 1], got {eta}")
    if not h > 0:
        raise ValueError(f"h must be positive, got {h}")
    if eta == 1.0:
        return 0.0
    first, second, a = _shifted_sums(int(r), float(eta))
    return first * math.log(0.5 * h * a) - second


def omega_value(n: int, beta: float, h: float, form: str = "closed") -> float:
    """int_0^beta ln(h p) (beta - p)^n dp.

    ``form="sum"`` evaluates the alternating binomial sum
    beta^(n+1) sum_l C(n,l) (-1)^l [(l+1) ln(h beta) - 1] / (l+1)^2;
    ``form="closed"`` uses beta^(n+1) (ln(h beta) - H_{n+1}) / (n+1).
    """
    if not beta > 0:
        raise ValueError(f"beta must be positive, got {beta}")
    if not h > 0:
        raise ValueError(f"h must be positive, got {h}")
    L = math.log(h * beta)
    if form == "sum":
        total = sum(math.comb(n, l) * (-1) ** l * ((l + 1) * L - 1.0) / (l + 1) ** 2
                    for l in range(n + 1))
    elif form == "closed":
        harmonic = sum(1.0 / k for k in range(1, n + 2))
        total = (L - harmonic) / (n + 1)
    else:
        raise ValueError(f"unknown form {form!r}")
    return beta ** (n + 1) * total


def log_convolution_power(m: int, x):
    """int_0^x ln(x - s) s^m ds = x^(m+1) (ln x - H_{m+1}) / (m+1) for x > 0."""
    harmonic = sum(1.0 / k for k in range(1, m + 2))
    x = np.asarray(x, dtype=float)
    with np.errstate(all="ignore"):
        return (x ** (m + 1) * (np.log(x) - harmonic) / (m + 1))[()]


def _poly(coeffs, x):
    return np.polynomial.polynomial.polyval(np.asarray(x, dtype=float), coeffs)[()]


def _manufactured_forcing(coeffs, x):
    out = _poly(coeffs, x)
    for m, c in enumerate(coeffs):
        out = out - c * log_convolution_power(m, x)
    return out


def _unit_kernel(x, s, y):
    return y


def _unit_K(x, s):
    return np.ones(np.broadcast_shapes(np.shape(x), np.shape(s)))


def manufactured_problem(coeffs, X: float = 1.0) -> ProblemSpec:
    """Linear problem with K = 1 whose exact solution is the polynomial `coeffs`.

    `coeffs` are power-basis coefficients, lowest degree first.
    """
    coeffs = tuple(float(c) for c in coeffs)
    return ProblemSpec(
        name=f"manufactured{coeffs}",
        X=X,
        f=partial(_manufactured_forcing, coeffs),
        kernel=_unit_kernel,
        linear_kernel=_unit_K,
        exact=partial(_poly, coeffs),
        y0=coeffs[0],
    )


def _near_integral(x, t0, t1, g, degree):
    # int_{t0}^{t1} ln(t) g(x - t) dt with g fitted by a polynomial in v = t/t1
    r0 = t0 / t1
    k = np.arange(degree + 1)
    v = r0 + (1.0 - r0) * 0.5 * (1.0 - np.cos((2 * k + 1) * np.pi / (2 * degree + 2)))
    coeffs = np.linalg.solve(np.vander(v, increasing=True), g(x - v * t1))
    moments = np.array([
        _log_moment(q, 1.0, t1) - (_log_moment(q, r0, t1) if r0 > 0 else 0.0)
        for q in k
    ])
    return t1 * float(coeffs @ moments)


def _kappa_along(sol, problem, x):
    def g(s):
        return problem.kernel(x, s, eval_solution(sol, s))
    return g


def residual_norm(sol: Solution, problem: ProblemSpec, sample_count=None) -> float:
    """Max defect |u(x) - f(x) - int_0^x ln(x - s) kappa(x, s, u(s)) ds|.

    u is the nodal interpolant of `sol`.  The defect is sampled at
    x_i + 0.37 h_i, x_i1 and x_i,nu of every subinterval, or of
    `sample_count` evenly spread subintervals.  The part of the integral
    within one step of the singularity uses closed-form log moments against
    a local polynomial fit of the integrand's smooth factor; farther
    subintervals, where ln(x - s) is smooth, use a fixed Gauss-Legendre rule.
    """
    pts = sol.partition.points
    N, nu = sol.partition.N, sol.nu
    degree = 2 * nu + 1
    gx, gw = np.polynomial.legendre.leggauss(_GAUSS_POINTS)
    rows = range(N) if sample_count is None else np.unique(
        np.linspace(0, N - 1, max(1, int(sample_count))).round().astype(int))
    worst = 0.0
    with np.errstate(all="ignore"):
        for i in rows:
            h = pts[i + 1] - pts[i]
            for x in (pts[i] + 0.37 * h, sol.nodes[i, 1], sol.nodes[i, nu]):
                g = _kappa_along(sol, problem, x)
                total = _near_integral(x, 0.0, x - pts[i], g, degree)
                a, b = pts[:i], pts[1:i + 1]
                far = (x - b) >= (b - a)
                for l in np.flatnonzero(~far):
                    total += _near_integral(x, x - b[l], x - a[l], g, degree)
                if far.any():
                    mid, half = 0.5 * (a[far] + b[far]), 0.5 * (b[far] - a[far])
                    s = mid[:, None] + half[:, None] * gx[None, :]
                    vals = np.log(x - s) * problem.kernel(x, s, eval_solution(sol, s))
                    total += float(np.sum(half * (vals @ gw)))
                defect = float(eval_solution(sol, x)) - float(problem.f(x)) - total
                if not math.isfinite(defect):
                    raise SolverError(f"non-finite defect at x = {x}")
                worst = max(worst, abs(defect))
    return worst
