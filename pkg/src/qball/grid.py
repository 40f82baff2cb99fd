"""Uniform radial grids in dimension n >= 2 and second-order operators on them."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "RadialGrid",
    "RadialProfile",
    "make_grid",
    "sphere_area",
    "radial_laplacian",
    "integrate_radial",
    "gradient",
    "gradient_norm_sq",
    "MIN_INTERVALS",
]

MIN_INTERVALS = 64


def sphere_area(n: int) -> float:
    """Surface area of the unit sphere S^{n-1} in R^n (2 pi for n=2, 4 pi for n=3)."""
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


@dataclass(frozen=True)
class RadialGrid:
    """Nodes r_i = i h, i = 0..M, on [0, r_max] in spatial dimension n."""

    n: int
    r_max: float
    M: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ValueError(f"dimension must be an integer >= 2, got {self.n}")
        if not (self.r_max > 0 and math.isfinite(self.r_max)):
            raise ValueError(f"r_max must be positive, got {self.r_max}")
        if int(self.M) != self.M or self.M < MIN_INTERVALS:
            raise ValueError(f"need at least {MIN_INTERVALS} intervals, got {self.M}")
        r = np.arange(self.M + 1) * self.h
        w = sphere_area(self.n) * r ** (self.n - 1) * self.h
        w[0] *= 0.5
        w[-1] *= 0.5
        object.__setattr__(self, "_r", r)
        object.__setattr__(self, "_weights", w)

    @property
    def points(self) -> int:
        return self.M + 1

    @property
    def h(self) -> float:
        return self.r_max / self.M

    @property
    def r(self) -> np.ndarray:
        return self._r

    @property
    def weights(self) -> np.ndarray:
        """Trapezoid weights of S_{n-1} r^{n-1} dr."""
        return self._weights

    def extended(self, factor: float) -> "RadialGrid":
        """Same spacing, domain enlarged by roughly ``factor``."""
        M = int(math.ceil(self.M * factor))
        return RadialGrid(self.n, M * self.h, M)


def make_grid(n: int, r_max: float, M: int) -> RadialGrid:
    return RadialGrid(n, float(r_max), int(M))


@dataclass(frozen=True)
class RadialProfile:
    """A real radial field u(r_i) with u(r_max) = 0."""

    grid: RadialGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.points,):
            raise ValueError(f"expected {self.grid.points} values, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("profile contains non-finite values")
        if v[-1] != 0.0:
            v = v.copy()
            v[-1] = 0.0
        object.__setattr__(self, "values", v)

    @property
    def r(self) -> np.ndarray:
        return self.grid.r

    @property
    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))


def _as_arrays(u, grid=None):
    if isinstance(u, RadialProfile):
        return u.values, u.grid
    if grid is None:
        raise TypeError("raw arrays need an explicit grid")
    return np.asarray(u), grid


def radial_laplacian(u, grid: RadialGrid | None = None) -> np.ndarray:
    """u'' + (n-1)/r u' with centered differences; n u''(0) at the origin.

    Works for real and complex values.  The outer node gets the one-sided
    value 0 (it is pinned by the Dirichlet condition).
    """
    v, g = _as_arrays(u, grid)
    h, n = g.h, g.n
    out = np.zeros_like(v)
    r = g.r[1:-1]
    out[1:-1] = (v[2:] - 2.0 * v[1:-1] + v[:-2]) / h**2 + (n - 1) / r * (v[2:] - v[:-2]) / (2.0 * h)
    out[0] = n * 2.0 * (v[1] - v[0]) / h**2
    return out


def integrate_radial(grid: RadialGrid, f) -> float:
    """S_{n-1} * trapezoid of f(r) r^{n-1} on the grid (integral over the ball)."""
    return float(np.dot(grid.weights, np.asarray(f)))


def gradient(u, grid: RadialGrid | None = None) -> np.ndarray:
    """du/dr: centered inside, one-sided second order at both ends."""
    v, g = _as_arrays(u, grid)
    return np.gradient(v, g.h, edge_order=2)


def gradient_norm_sq(u, grid: RadialGrid | None = None) -> np.ndarray:
    d = gradient(u, grid)
    return np.real(d * np.conj(d))
