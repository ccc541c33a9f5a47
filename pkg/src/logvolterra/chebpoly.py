"""Chebyshev polynomials of the third (V) and fourth (W) kinds.

V_0 = 1, V_1 = 2x - 1 and W_0 = 1, W_1 = 2x + 1; both continue with the
usual recurrence P_r = 2x P_{r-1} - P_{r-2}.  They are related by
W_r(x) = (-1)^r V_r(-x).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

#: Largest degree for which exact power-basis coefficients are produced.
MAX_EXACT_DEGREE = 40


def _recurrence(r, x, first):
    x = np.asarray(x, dtype=float)
    prev = np.ones_like(x)
    if r == 0:
        return prev[()]
    cur = 2.0 * x + first
    for _ in range(r - 1):
        prev, cur = cur, 2.0 * x * cur - prev
    return cur[()]


def eval_third_kind(r: int, x):
    """Evaluate V_r at `x` (scalar or array) by the three-term recurrence."""
    if r < 0:
        raise ValueError(f"degree must be non-negative, got {r}")
    return _recurrence(r, x, -1.0)


def eval_fourth_kind(r: int, x):
    """Evaluate W_r at `x` (scalar or array) by the three-term recurrence."""
    if r < 0:
        raise ValueError(f"degree must be non-negative, got {r}")
    return _recurrence(r, x, 1.0)


@dataclass(frozen=True)
class ChebSeries3:
    """Finite third-kind series sum_r a_r V_r[(2/h)(x - lo) - 1] on [lo, hi]."""

    coefficients: tuple
    lo: float
    hi: float

    def __post_init__(self):
        coeffs = tuple(float(c) for c in self.coefficients)
        object.__setattr__(self, "coefficients", coeffs)
        if len(coeffs) < 3:
            raise ValueError("a series needs nu + 1 >= 3 coefficients")
        if not self.hi - self.lo > 0:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @property
    def nu(self) -> int:
        return len(self.coefficients) - 1

    def __call__(self, x):
        return eval_expansion(self, x)


@dataclass(frozen=True)
class MonomialPoly:
    """Exact integer power-basis coefficients p_0 + p_1 x + ... + p_d x^d."""

    coefficients: tuple

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def __call__(self, x):
        result = 0
        for c in reversed(self.coefficients):
            result = result * x + c
        return result


def _transform_matrix(nu: int) -> np.ndarray:
    # T[r, k] = (1/nu) * halving_k * (1 - cos(k pi/nu)) * V_r(-cos(k pi/nu))
    theta = np.pi * np.arange(nu + 1) / nu
    nodes = -np.cos(theta)
    halving = np.ones(nu + 1)
    halving[[0, -1]] = 0.5
    scale = halving * (1.0 - np.cos(theta)) / nu
    return np.array([scale * eval_third_kind(r, nodes) for r in range(nu + 1)])


def discrete_transform(samples, nu: int) -> np.ndarray:
    """Third-kind coefficients a_0..a_nu from samples at the nodes beta_0..beta_nu.

    a_r = (1/nu) sum''_k (1 - cos(k pi/nu)) V_r(-cos(k pi/nu)) u_k, where the
    double prime halves the first and last terms.  The map is a
    quasi-interpolant: evaluating the resulting series at a node does not in
    general return the sample there.
    """
    samples = np.asarray(samples, dtype=float)
    if nu < 2:
        raise ValueError(f"nu must be >= 2, got {nu}")
    if samples.shape[-1] != nu + 1:
        raise ValueError(
            f"expected {nu + 1} samples for nu={nu}, got {samples.shape[-1]}"
        )
    return samples @ _transform_matrix(nu).T


def eval_expansion(series: ChebSeries3, x):
    x = np.asarray(x, dtype=float)
    if np.any(x < series.lo) or np.any(x > series.hi):
        raise ValueError(f"x outside [{series.lo}, {series.hi}]")
    t = 2.0 * (x - series.lo) / (series.hi - series.lo) - 1.0
    total = np.zeros_like(t)
    for r, a in enumerate(series.coefficients):
        total = total + a * eval_third_kind(r, t)
    return total[()]


def fourth_kind_monomials(r: int) -> MonomialPoly:
    """Power-basis coefficients of W_r, computed in exact integer arithmetic.

    >>> fourth_kind_monomials(2).coefficients
    (-1, 2, 4)
    """
    if r < 0:
        raise ValueError(f"degree must be non-negative, got {r}")
    if r > MAX_EXACT_DEGREE:
        raise OverflowError(
            f"W_{r} exceeds the supported exact degree {MAX_EXACT_DEGREE}"
        )
    prev, cur = [1], [1, 2]
    if r == 0:
        return MonomialPoly((1,))
    for _ in range(r - 1):
        nxt = [0] + [2 * c for c in cur]
        for i, c in enumerate(prev):
            nxt[i] -= c
        prev, cur = cur, nxt
    return MonomialPoly(tuple(cur))
