"""Periodic-grid containers: Grid, Field, Spectrum.

All fields live on the 2pi-periodic torus, sampled on a uniform grid with
n points per dimension (n a power of two). Spectra use the numpy FFT
layout with integer wavenumbers in [-n/2, n/2) and "forward" normalization,
so a coefficient c_xi is the amplitude of exp(i xi.x).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * np.pi


def _is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


class Grid:
    """Uniform discretization of the torus [0, 2pi)^dim."""

    def __init__(self, dim: int, n: int):
        if dim not in (2, 3):
            raise ValueError(f"dim must be 2 or 3, got {dim}")
        if n < 8 or not _is_power_of_two(n):
            raise ValueError(f"n must be a power of two >= 8, got {n}")
        self.dim = dim
        self.n = n
        self.length = TWO_PI
        self.spacing = TWO_PI / n
        self.shape = (n,) * dim
        self.cell_volume = self.spacing**dim
        self.volume = TWO_PI**dim

        # Integer wavenumbers in [-n/2, n/2), numpy FFT ordering.
        self.wavenumbers = np.fft.fftfreq(n, d=1.0 / n)
        mesh = np.meshgrid(*([self.wavenumbers] * dim), indexing="ij")
        self.k = np.stack(mesh)  # shape (dim, n, ..., n)
        self.k_sq = np.sum(self.k**2, axis=0)
        self.k_mag = np.sqrt(self.k_sq)
        k_sq_safe = self.k_sq.copy()
        k_sq_safe[self.k_sq == 0] = 1.0
        self.k_sq_safe = k_sq_safe

        # 2/3-rule mask: keep only |k_j| <= n/3 along every axis.
        cutoff = n / 3.0
        keep = np.ones(self.shape, dtype=bool)
        for axis_k in mesh:
            keep &= np.abs(axis_k) <= cutoff
        self.dealias_mask = keep

    def axis_points(self) -> np.ndarray:
        """Sample locations along one axis."""
        return np.arange(self.n) * self.spacing

    def meshes(self) -> tuple[np.ndarray, ...]:
        """Coordinate meshes (X1, X2[, X3]) with 'ij' indexing."""
        x = self.axis_points()
        return tuple(np.meshgrid(*([x] * self.dim), indexing="ij"))

    def __eq__(self, other) -> bool:
        return isinstance(other, Grid) and (self.dim, self.n) == (other.dim, other.n)

    def __hash__(self) -> int:
        return hash((self.dim, self.n))

    def __repr__(self) -> str:
        return f"Grid(dim={self.dim}, n={self.n})"


@dataclass(frozen=True)
class Field:
    """Real samples on a Grid; values has shape (components, *grid.shape).

    Component count is 1 for scalars and grid.dim for vectors; derivative
    tensors may carry more components (one per multi-index).
    """

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim == self.grid.dim:
            v = v[np.newaxis]
        if v.shape[1:] != self.grid.shape or v.ndim != self.grid.dim + 1:
            raise ValueError(f"values shape {v.shape} incompatible with {self.grid}")
        object.__setattr__(self, "values", v)

    @classmethod
    def scalar(cls, grid: Grid, values: np.ndarray) -> "Field":
        values = np.asarray(values)
        if values.shape != grid.shape:
            raise ValueError("scalar field must match grid shape")
        return cls(grid, values[np.newaxis])

    @classmethod
    def vector(cls, grid: Grid, components) -> "Field":
        arrs = [np.asarray(c) for c in components]
        if len(arrs) != grid.dim:
            raise ValueError(f"vector field needs {grid.dim} components")
        return cls(grid, np.stack(arrs))

    @classmethod
    def zeros(cls, grid: Grid, components: int = 1) -> "Field":
        return cls(grid, np.zeros((components,) + grid.shape))

    @property
    def components(self) -> int:
        return self.values.shape[0]

    @property
    def is_scalar(self) -> bool:
        return self.components == 1

    @property
    def is_vector(self) -> bool:
        return self.components == self.grid.dim

    def component(self, i: int) -> np.ndarray:
        return self.values[i]

    def scalar_values(self) -> np.ndarray:
        if not self.is_scalar:
            raise ValueError("not a scalar field")
        return self.values[0]

    def magnitude(self) -> np.ndarray:
        """Pointwise Euclidean magnitude over components."""
        if self.is_scalar:
            return np.abs(self.values[0])
        return np.sqrt(np.sum(self.values**2, axis=0))

    def mean(self) -> np.ndarray:
        return self.values.mean(axis=tuple(range(1, self.values.ndim)))

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.values)))

    # Arithmetic used by the time steppers; fields are treated as immutable.
    def __add__(self, other: "Field") -> "Field":
        return Field(self.grid, self.values + other.values)

    def __sub__(self, other: "Field") -> "Field":
        return Field(self.grid, self.values - other.values)

    def __mul__(self, a: float) -> "Field":
        return Field(self.grid, self.values * a)

    __rmul__ = __mul__

    def __neg__(self) -> "Field":
        return Field(self.grid, -self.values)


@dataclass(frozen=True)
class Spectrum:
    """Fourier coefficients of a Field, same component layout."""

    grid: Grid
    coefficients: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=np.complex128)
        if c.ndim == self.grid.dim:
            c = c[np.newaxis]
        if c.shape[1:] != self.grid.shape or c.ndim != self.grid.dim + 1:
            raise ValueError(f"coefficients shape {c.shape} incompatible with {self.grid}")
        object.__setattr__(self, "coefficients", c)

    @property
    def components(self) -> int:
        return self.coefficients.shape[0]
