"""Product-integration weights for the logarithmic kernel.

For a step of length h and nodes x_k = x_i + beta_k h, the local matrix C
gives

    int_{x_i}^{x_ij} ln(x_ij - x) u(x) dx  ~=  h * sum_k c_jk u(x_k)

and the history weights b give int_{x_l}^{x_{l+1}} g ~= h_l sum_k b_k g(x_lk).

Both are assembled from the moments

    Q_r(eta) = int_0^{1-eta} W_r(t + eta) dt
    I_r(eta) = int_0^{1-eta} ln(h t / 2) W_r(t + eta) dt

with eta_j = cos(j pi / nu).  I_0..I_3 come from closed forms and higher
orders from a five-term recurrence driven by the Q moments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from logvolterra.chebpoly import eval_fourth_kind, eval_third_kind


def _check_nu(nu):
    if int(nu) != nu or nu < 2:
        raise ValueError(f"nu must be an integer >= 2, got {nu}")


def _check_node(nu, j):
    if not 0 <= j <= nu:
        raise IndexError(f"node index {j} outside 0..{nu}")


def node_eta(nu: int, j: int) -> float:
    return math.cos(j * math.pi / nu)


@dataclass(frozen=True, eq=False)
class LogMomentTable:
    """Q and I moments for every node; ``Q[j, r]`` and ``I[j, r]``."""

    nu: int
    h: float
    eta: np.ndarray
    Q: np.ndarray
    I: np.ndarray


@dataclass(frozen=True, eq=False)
class LocalWeightMatrix:
    nu: int
    h: float
    entries: np.ndarray


@dataclass(frozen=True, eq=False)
class HistoryWeights:
    nu: int
    weights: np.ndarray


def q_moments(eta: float, rmax: int) -> np.ndarray:
    """Q_0..Q_rmax at a given eta."""
    Q = np.zeros(rmax + 1)
    Q[0] = 1.0 - eta
    if rmax >= 1:
        Q[1] = (1.0 - eta) * (2.0 + eta)
    for r in range(2, rmax + 1):
        Q[r] = (2.0 * (2 * r + 1) - r * eval_fourth_kind(r + 1, eta)
                - eval_fourth_kind(r, eta)
                + (r + 1) * eval_fourth_kind(r - 1, eta)) / (2.0 * r * (r + 1))
    return Q


def q_vector(nu: int, j: int) -> np.ndarray:
    _check_nu(nu)
    _check_node(nu, j)
    if j == 0:
        return np.zeros(nu + 1)
    return q_moments(node_eta(nu, j), nu)


def initial_i_values(eta: float, h: float) -> np.ndarray:
    """Closed forms for I_0..I_3 at (eta, h)."""
    beta = 0.5 * (1.0 - eta)
    L = math.log(h * beta)
    e2, e3 = eta * eta, eta ** 3
    return np.array([
        2.0 * beta * (L - 1.0),
        beta * (2.0 * (2.0 + eta) * L - 3.0 * (1.0 + eta)),
        beta * (6.0 * (4.0 * e2 + 7.0 * eta + 4.0) * L
                - (44.0 * e2 + 47.0 * eta - 1.0)) / 9.0,
        beta * (6.0 * (6.0 * e3 + 10.0 * e2 + 4.0 * eta + 1.0) * L
                - (75.0 * e3 + 83.0 * e2 - 13.0 * eta - 19.0)) / 9.0,
    ])


def i_moments(eta: float, h: float, rmax: int) -> np.ndarray:
    """I_0..I_rmax at (eta, h), forward recurrence above degree 3."""
    if not h > 0:
        raise ValueError(f"step must be positive, got {h}")
    I = np.zeros(max(rmax + 1, 4))
    I[:4] = initial_i_values(eta, h)
    Q = q_moments(eta, rmax)
    for r in range(2, rmax - 1):
        rhs = (-r * Q[r + 2] + (2 * r - 1) * Q[r + 1] + 3.0 * Q[r]
               - (2 * r + 3) * Q[r - 1] + (r + 1) * Q[r - 2])
        rhs -= (2.0 * (1.0 - (1.0 + eta) * r * (r + 2)) * I[r + 1]
                + 2.0 * ((1.0 + 2.0 * eta) * r * (r + 1) - eta - 2.0) * I[r]
                + 2.0 * (1.0 - (1.0 + eta) * (r * r - 1)) * I[r - 1]
                + (r + 1) * (r - 2) * I[r - 2])
        I[r + 2] = rhs / (r * (r + 3))
    return I[: rmax + 1]


def i_vector(nu: int, j: int, h: float) -> np.ndarray:
    """I_{0..nu, j} for step h; the j = 0 row is identically zero."""
    _check_nu(nu)
    _check_node(nu, j)
    if not h > 0:
        raise ValueError(f"step must be positive, got {h}")
    if j == 0:
        return np.zeros(nu + 1)
    return i_moments(node_eta(nu, j), h, nu)


def log_moment_table(nu: int, h: float) -> LogMomentTable:
    _check_nu(nu)
    eta = np.array([node_eta(nu, j) for j in range(nu + 1)])
    Q = np.array([q_vector(nu, j) for j in range(nu + 1)])
    I = np.array([i_vector(nu, j, h) for j in range(nu + 1)])
    return LogMomentTable(nu, h, eta, Q, I)


def _node_factors(nu):
    # (1 - cos(k pi/nu)) / (2 nu (1 + delta_k0 + delta_knu)) and V_r(-cos(k pi/nu))
    theta = np.pi * np.arange(nu + 1) / nu
    scale = (1.0 - np.cos(theta)) / (2.0 * nu)
    scale[[0, -1]] /= 2.0
    V = np.array([eval_third_kind(r, -np.cos(theta)) for r in range(nu + 1)])
    return scale, V


@lru_cache(maxsize=256)
def _c_entries(nu: int, h: float) -> np.ndarray:
    scale, V = _node_factors(nu)
    signs = (-1.0) ** np.arange(nu + 1)
    C = np.zeros((nu + 1, nu + 1))
    for j in range(1, nu + 1):
        C[j] = scale * ((signs * i_vector(nu, j, h)) @ V)
    C.setflags(write=False)
    return C


def c_matrix(nu: int, h: float) -> LocalWeightMatrix:
    """Local weight matrix for a step of length `h`.

    Matrices are cached per (nu, h), so a uniform mesh builds C once.
    """
    _check_nu(nu)
    if not h > 0:
        raise ValueError(f"step must be positive, got {h}")
    return LocalWeightMatrix(int(nu), float(h), _c_entries(int(nu), float(h)))


@lru_cache(maxsize=64)
def _b_entries(nu: int) -> np.ndarray:
    scale, V = _node_factors(nu)
    r = np.arange(1, nu + 1)
    factors = ((-1.0) ** r * (2 * r + 1) - 1.0) / (r * (r + 1.0))
    b = scale * (2.0 + factors @ V[1:])
    b.setflags(write=False)
    return b


def b_vector(nu: int) -> HistoryWeights:
    _check_nu(nu)
    return HistoryWeights(int(nu), _b_entries(int(nu)))
