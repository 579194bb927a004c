"""Uniform radial mesh on [0, R] and the finite-difference operators on it.

The Laplacian uses the symmetry regularization ``2n (f_1 - f_0) / h^2`` at
the origin and a ghost node ``f_{J+1} = f_{J-1} + 2 h g`` at ``r = R`` so the
prescribed outward flux ``g`` enters with a central stencil.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

MIN_INTERVALS = 8


@dataclass(frozen=True)
class RadialGrid:
    R: float
    J: int
    r: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.R > 0:
            raise ValueError(f"radius must be positive, got R={self.R}")
        if int(self.J) != self.J or self.J < MIN_INTERVALS:
            raise ValueError(f"J must be an integer >= {MIN_INTERVALS}, got {self.J}")
        r = np.arange(self.J + 1, dtype=float) * (self.R / self.J)
        r[-1] = self.R
        r.flags.writeable = False
        object.__setattr__(self, "r", r)

    @property
    def h(self) -> float:
        return self.R / self.J

    @property
    def size(self) -> int:
        return self.J + 1

    def trapezoid_weights(self) -> np.ndarray:
        w = np.full(self.size, self.h)
        w[0] = w[-1] = 0.5 * self.h
        return w

    def refined(self) -> "RadialGrid":
        return RadialGrid(self.R, 2 * self.J)


@dataclass(frozen=True)
class RadialField:
    """Nodal values of one solution component on a :class:`RadialGrid`."""

    values: np.ndarray
    grid: RadialGrid

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.grid.size,):
            raise ValueError(
                f"field has shape {values.shape}, grid needs ({self.grid.size},)")
        if not np.all(np.isfinite(values)):
            raise ValueError("field values must be finite")
        object.__setattr__(self, "values", values)

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)


def _as_values(f) -> np.ndarray:
    return f.values if isinstance(f, RadialField) else np.asarray(f, dtype=float)


def laplacian_values(f: np.ndarray, h: float, r: np.ndarray, n: int,
                     boundary_flux: float, out: np.ndarray | None = None) -> np.ndarray:
    """Array-level radial Laplacian used in the time-stepping hot loop."""
    if out is None:
        out = np.empty_like(f)
    inv_h2 = 1.0 / (h * h)
    fi, fm, fp = f[1:-1], f[:-2], f[2:]
    out[1:-1] = (fp - 2.0 * fi + fm) * inv_h2
    if n != 1:
        out[1:-1] += (n - 1) * (fp - fm) / (2.0 * h * r[1:-1])
    out[0] = 2.0 * n * (f[1] - f[0]) * inv_h2
    # ghost node f_{J+1} = f_{J-1} + 2 h g folded into the central stencil
    R = r[-1]
    out[-1] = 2.0 * (f[-2] - f[-1]) * inv_h2 + 2.0 * boundary_flux / h
    if n != 1:
        out[-1] += (n - 1) * boundary_flux / R
    return out


def radial_laplacian(f, grid: RadialGrid, n: int, boundary_flux: float = 0.0) -> RadialField:
    """Discrete ``f_rr + (n-1)/r f_r`` with outward flux ``boundary_flux`` at r = R."""
    if n < 1:
        raise ValueError(f"dimension must be >= 1, got n={n}")
    return RadialField(laplacian_values(_as_values(f), grid.h, grid.r, n, boundary_flux), grid)


def gradient_values(f: np.ndarray, h: float) -> np.ndarray:
    g = np.empty_like(f)
    g[1:-1] = (f[2:] - f[:-2]) / (2.0 * h)
    g[0] = 0.0
    g[-1] = (3.0 * f[-1] - 4.0 * f[-2] + f[-3]) / (2.0 * h)
    return g


def radial_gradient(f, grid: RadialGrid) -> RadialField:
    """Second-order ``f_r``; zero at the origin by radial symmetry."""
    return RadialField(gradient_values(_as_values(f), grid.h), grid)
