"""Initial-condition presets and raw grid-file I/O."""

from __future__ import annotations

import struct

import numpy as np

from . import spectral
from .grid import Field, Grid

_HEADER = struct.Struct("<III")  # dim, n, components (little-endian uint32)


def taylor_green_vorticity(grid: Grid, amplitude: float = 1.0) -> Field:
    """Vorticity -2 A cos(x1) cos(x2) of the steady Taylor-Green velocity."""
    if grid.dim != 2:
        raise ValueError("Taylor-Green preset is 2D")
    x1, x2 = grid.meshes()
    return Field.scalar(grid, -2.0 * amplitude * np.cos(x1) * np.cos(x2))


def taylor_green_velocity(grid: Grid, amplitude: float = 1.0) -> Field:
    """Steady Taylor-Green velocity (A cos x1 sin x2, -A sin x1 cos x2)."""
    if grid.dim != 2:
        raise ValueError("Taylor-Green preset is 2D")
    x1, x2 = grid.meshes()
    return Field.vector(
        grid,
        (amplitude * np.cos(x1) * np.sin(x2), -amplitude * np.sin(x1) * np.cos(x2)),
    )


def sqg_single_mode(grid: Grid, amplitude: float = 1.0) -> Field:
    """Steady single-mode temperature theta = A sin(x1)."""
    if grid.dim != 2:
        raise ValueError("single-mode preset is 2D")
    x1 = grid.meshes()[0]
    return Field.scalar(grid, amplitude * np.sin(x1))


def random_smooth(
    grid: Grid,
    seed: int,
    slope: float = 3.0,
    k_cutoff: float | None = None,
    amplitude: float = 1.0,
) -> Field:
    """Seeded random scalar with |k|^(-slope) spectrum and Gaussian rolloff.

    The field is mean-free, dealiased, and scaled to L2 norm = amplitude.
    """
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal(grid.shape)
    c = np.fft.fftn(noise, norm="forward")
    if k_cutoff is None:
        k_cutoff = grid.n / 12.0
    mag = np.where(grid.k_mag == 0, 1.0, grid.k_mag)
    shaping = mag ** (-slope) * np.exp(-((grid.k_mag / k_cutoff) ** 2))
    shaping[grid.k_mag == 0] = 0.0
    c *= shaping * grid.dealias_mask
    field = Field.scalar(grid, np.real(np.fft.ifftn(c, norm="forward")))
    norm = spectral.lp_norm(field, 2)
    if norm == 0:
        raise ValueError("degenerate random field (zero norm)")
    return (amplitude / norm) * field


def random_divfree_velocity(
    grid: Grid,
    seed: int,
    slope: float = 3.0,
    k_cutoff: float | None = None,
    amplitude: float = 1.0,
) -> Field:
    """Seeded random divergence-free velocity (2D or 3D), L2 norm = amplitude."""
    comps = [
        random_smooth(grid, seed + 1000 * j, slope, k_cutoff).values[0]
        for j in range(grid.dim)
    ]
    v = spectral.leray_project(Field(grid, np.stack(comps)))
    norm = spectral.lp_norm(v, 2)
    if norm == 0:
        raise ValueError("degenerate random field (zero norm)")
    return (amplitude / norm) * v


def write_field(path, field: Field) -> None:
    """Raw little-endian float64 dump with a (dim, n, components) header."""
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(field.grid.dim, field.grid.n, field.components))
        fh.write(np.ascontiguousarray(field.values, dtype="<f8").tobytes())


def read_field(path) -> Field:
    """Read a field written by write_field."""
    with open(path, "rb") as fh:
        header = fh.read(_HEADER.size)
        if len(header) != _HEADER.size:
            raise ValueError(f"truncated grid file {path}")
        dim, n, components = _HEADER.unpack(header)
        grid = Grid(dim, n)
        count = components * n**dim
        data = np.frombuffer(fh.read(count * 8), dtype="<f8")
        if data.size != count:
            raise ValueError(f"truncated grid file {path}")
    return Field(grid, data.reshape((components,) + grid.shape).astype(np.float64))
