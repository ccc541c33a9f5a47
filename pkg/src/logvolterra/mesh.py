"""Mesh partitions of [0, X] and the collocation fractions inside each step."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Partition:
    """Breakpoints 0 = x_0 < x_1 < ... < x_N = X."""

    points: np.ndarray
    uniform: bool = False

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim != 1 or pts.size < 2:
            raise ValueError("a partition needs at least two breakpoints")
        if pts[0] != 0.0:
            raise ValueError(f"partition must start at 0, got {pts[0]}")
        if not np.all(np.diff(pts) > 0):
            raise ValueError("breakpoints must be strictly increasing")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def N(self) -> int:
        return self.points.size - 1

    @property
    def X(self) -> float:
        return float(self.points[-1])

    @property
    def steps(self) -> np.ndarray:
        """Step lengths h_i; a uniform mesh reports X/N for every step."""
        if self.uniform:
            return np.full(self.N, self.X / self.N)
        return np.diff(self.points)

    @property
    def diameter(self) -> float:
        return float(self.steps.max())


@dataclass(frozen=True, eq=False)
class CollocationGrid:
    nu: int
    fractions: np.ndarray

    @property
    def eta(self) -> np.ndarray:
        """cos(j pi / nu), the shifted node parameter used by the weights."""
        return np.cos(np.pi * np.arange(self.nu + 1) / self.nu)


def collocation_fractions(nu: int) -> CollocationGrid:
    """beta_j = (1 - cos(j pi/nu)) / 2 for j = 0..nu.

    ``nu = 1`` is refused: the history weights degenerate to zero there.
    """
    if int(nu) != nu or nu < 2:
        raise ValueError(f"nu must be an integer >= 2, got {nu}")
    nu = int(nu)
    j = np.arange(nu + 1)
    beta = np.sin(0.5 * np.pi * j / nu) ** 2
    # mirror the upper half so that beta_j + beta_{nu-j} = 1 holds exactly
    upper = j > nu / 2
    beta[upper] = 1.0 - beta[nu - j[upper]]
    if nu % 2 == 0:
        beta[nu // 2] = 0.5
    beta[0] = 0.0
    beta.setflags(write=False)
    return CollocationGrid(nu, beta)


def build_partition(X: float, N: int, scheme="uniform", q: float = 1.0,
                    points=None) -> Partition:
    """Build a mesh on [0, X].

    Parameters
    ----------
    X : float
        Right endpoint, must be positive.
    N : int
        Number of subintervals.
    scheme : {"uniform", "graded", "explicit"}
        Uniform gives ``x_i = i X / N``, graded ``x_i = X (i/N)^q``; explicit
        takes `points` as given.
    """
    if not X > 0:
        raise ValueError(f"X must be positive, got {X}")
    if X > math.e:
        log.warning("X = %g exceeds e; the convergence theory assumes X <= e", X)
    if scheme == "explicit":
        if points is None:
            raise ValueError("explicit scheme requires points")
        pts = np.asarray(points, dtype=float)
        if pts[-1] != X:
            raise ValueError(f"explicit points must end at X = {X}")
        return Partition(pts)
    if int(N) != N or N < 1:
        raise ValueError(f"N must be a positive integer, got {N}")
    i = np.arange(N + 1)
    if scheme == "uniform":
        pts = i * (X / N)
    elif scheme == "graded":
        if q < 1:
            raise ValueError(f"grading exponent must be >= 1, got {q}")
        pts = X * (i / N) ** q
    else:
        raise ValueError(f"unknown mesh scheme {scheme!r}")
    pts[-1] = X
    return Partition(pts, uniform=scheme == "uniform" or q == 1)


def grid_point(p: Partition, g: CollocationGrid, i: int, j: int) -> float:
    if not 0 <= i < p.N:
        raise IndexError(f"interval index {i} outside 0..{p.N - 1}")
    if not 0 <= j <= g.nu:
        raise IndexError(f"node index {j} outside 0..{g.nu}")
    if j == g.nu:
        return float(p.points[i + 1])
    return float(p.points[i] + g.fractions[j] * p.steps[i])


def grid_points(p: Partition, g: CollocationGrid) -> np.ndarray:
    """All x_ij as an (N, nu+1) array; the last column equals x_{i+1} exactly."""
    x = p.points[:-1, None] + g.fractions[None, :] * p.steps[:, None]
    x[:, -1] = p.points[1:]
    x[:, 0] = p.points[:-1]
    return x
