"""Spectral transforms, differential and singular-integral operators.

Conventions:
  - transform/inverse use numpy's "forward" normalization, so Plancherel
    reads  integral |f|^2 dx = (2pi)^dim * sum |c_xi|^2.
  - The homogeneous k-th derivative tensor D^k carries multinomial weights
    sqrt(k!/beta!), so |D^k f|^2 = sum_{|beta|=k} (k!/beta!) (d^beta f)^2
    pointwise and the L2 seminorm equals the |xi|^k Fourier multiplier norm.
  - Singular multipliers (Riesz, inverse Laplacians) send the mean mode to 0.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .grid import TWO_PI, Field, Grid, Spectrum

DEFAULT_MAX_DERIVATIVE_ORDER = 6

_SPATIAL = lambda grid: tuple(range(1, grid.dim + 1))  # noqa: E731


def transform(f: Field) -> Spectrum:
    """Forward FFT of every component; rejects non-finite input."""
    if not f.is_finite():
        raise ValueError("non-finite values in field")
    coef = np.fft.fftn(f.values, axes=_SPATIAL(f.grid), norm="forward")
    return Spectrum(f.grid, coef)


def inverse(s: Spectrum) -> Field:
    """Inverse FFT; imaginary round-off is discarded."""
    vals = np.fft.ifftn(s.coefficients, axes=_SPATIAL(s.grid), norm="forward")
    return Field(s.grid, np.real(vals))


def hermitian_symmetry_error(s: Spectrum) -> float:
    """Max |c(-xi) - conj(c(xi))|, zero for spectra of real fields."""
    c = s.coefficients
    rev = c
    for ax in range(1, c.ndim):
        rev = np.roll(np.flip(rev, axis=ax), 1, axis=ax)
    return float(np.max(np.abs(rev - np.conj(c))))


def _derivative_multiplier(grid: Grid, beta: tuple[int, ...]) -> np.ndarray:
    """Multiplier for d^beta; odd orders zero the Nyquist plane."""
    mult = np.ones(grid.shape, dtype=np.complex128)
    for axis, order in enumerate(beta):
        if order == 0:
            continue
        k_axis = grid.k[axis]
        mult = mult * (1j * k_axis) ** order
        if order % 2 == 1:
            mult = np.where(k_axis == -grid.n // 2, 0.0, mult)
    return mult


def derivative(f: Field, beta, max_order: int = DEFAULT_MAX_DERIVATIVE_ORDER) -> Field:
    """Spectral partial derivative d^beta f per component."""
    beta = tuple(int(b) for b in beta)
    if len(beta) != f.grid.dim or any(b < 0 for b in beta):
        raise ValueError(f"bad multi-index {beta} for dim {f.grid.dim}")
    if sum(beta) > max_order:
        raise ValueError(f"derivative order {sum(beta)} exceeds limit {max_order}")
    s = transform(f)
    mult = _derivative_multiplier(f.grid, beta)
    return inverse(Spectrum(f.grid, s.coefficients * mult))


def gradient(f: Field) -> Field:
    """Gradient of a scalar field as a vector field."""
    if not f.is_scalar:
        raise ValueError("gradient expects a scalar field")
    s = transform(f)
    comps = [
        np.real(np.fft.ifftn(1j * f.grid.k[j] * s.coefficients[0], norm="forward"))
        for j in range(f.grid.dim)
    ]
    return Field.vector(f.grid, comps)


def grad_components(v: Field) -> np.ndarray:
    """All partials d_j v_l as an array of shape (dim, components, *grid.shape)."""
    s = transform(v)
    grid = v.grid
    out = np.empty((grid.dim, v.components) + grid.shape)
    for j in range(grid.dim):
        out[j] = np.real(
            np.fft.ifftn(1j * grid.k[j] * s.coefficients, axes=_SPATIAL(grid), norm="forward")
        )
    return out


def divergence(v: Field) -> Field:
    """Spectral divergence of a vector field."""
    if not v.is_vector:
        raise ValueError("divergence expects a vector field")
    s = transform(v)
    acc = np.zeros(v.grid.shape, dtype=np.complex128)
    for j in range(v.grid.dim):
        acc += 1j * v.grid.k[j] * s.coefficients[j]
    return Field.scalar(v.grid, np.real(np.fft.ifftn(acc, norm="forward")))


def curl_2d(v: Field) -> Field:
    """Scalar curl d1 v2 - d2 v1 of a 2D vector field."""
    if v.grid.dim != 2 or not v.is_vector:
        raise ValueError("curl_2d expects a 2D vector field")
    s = transform(v)
    k = v.grid.k
    w = 1j * k[0] * s.coefficients[1] - 1j * k[1] * s.coefficients[0]
    return Field.scalar(v.grid, np.real(np.fft.ifftn(w, norm="forward")))


def curl_3d(v: Field) -> Field:
    """Vector curl of a 3D vector field."""
    if v.grid.dim != 3 or not v.is_vector:
        raise ValueError("curl_3d expects a 3D vector field")
    s = transform(v)
    k = v.grid.k
    c = s.coefficients
    out = np.stack(
        [
            1j * (k[1] * c[2] - k[2] * c[1]),
            1j * (k[2] * c[0] - k[0] * c[2]),
            1j * (k[0] * c[1] - k[1] * c[0]),
        ]
    )
    return Field(v.grid, np.real(np.fft.ifftn(out, axes=_SPATIAL(v.grid), norm="forward")))


def laplacian(f: Field) -> Field:
    s = transform(f)
    return inverse(Spectrum(f.grid, -f.grid.k_sq * s.coefficients))


@lru_cache(maxsize=None)
def multi_indices(dim: int, k: int) -> tuple[tuple[int, ...], ...]:
    """All multi-indices beta with |beta| = k, lexicographic order."""
    if dim == 1:
        return ((k,),)
    out = []
    for first in range(k, -1, -1):
        for rest in multi_indices(dim - 1, k - first):
            out.append((first,) + rest)
    return tuple(out)


def multinomial_weight(k: int, beta: tuple[int, ...]) -> float:
    """k!/beta! weight making sum over |beta|=k of w * xi^(2 beta) = |xi|^(2k)."""
    denom = 1
    for b in beta:
        denom *= math.factorial(b)
    return math.factorial(k) / denom


def dk_seminorm_l2(f: Field, k: int) -> float:
    """L2 norm of the k-th derivative tensor via the |xi|^k multiplier."""
    if k < 0:
        raise ValueError("k must be >= 0")
    s = transform(f)
    weight = f.grid.k_sq**k if k else 1.0
    total = np.sum(weight * np.abs(s.coefficients) ** 2)
    return float(np.sqrt(f.grid.volume * total))


def dk_tensor(f: Field, k: int) -> Field:
    """Weighted k-th derivative tensor, one output component per
    (input component, multi-index) pair."""
    if k < 1:
        raise ValueError("k must be >= 1")
    grid = f.grid
    s = transform(f)
    betas = multi_indices(grid.dim, k)
    out = np.empty((f.components * len(betas),) + grid.shape)
    idx = 0
    for c in range(f.components):
        for beta in betas:
            w = math.sqrt(multinomial_weight(k, beta))
            mult = _derivative_multiplier(grid, beta)
            out[idx] = w * np.real(np.fft.ifftn(mult * s.coefficients[c], norm="forward"))
            idx += 1
    return Field(grid, out)


def lp_norm(f: Field, p: float) -> float:
    """L^p norm of the pointwise magnitude; p = inf gives the max."""
    if p != np.inf and p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    mag = f.magnitude()
    if p == np.inf:
        return float(mag.max())
    return float((np.sum(mag**p) * f.grid.cell_volume) ** (1.0 / p))


def _scalar_multiplier_op(f: Field, mult: np.ndarray) -> Field:
    if not f.is_scalar:
        raise ValueError("expected a scalar field")
    s = transform(f)
    return inverse(Spectrum(f.grid, mult * s.coefficients))


def riesz(f: Field, j: int) -> Field:
    """Riesz transform R_j with multiplier i k_j / |k|; mean mode -> 0."""
    grid = f.grid
    if not 0 <= j < grid.dim:
        raise ValueError(f"direction {j} out of range")
    mag = np.where(grid.k_mag == 0, 1.0, grid.k_mag)
    mult = 1j * grid.k[j] / mag
    mult[grid.k_mag == 0] = 0.0
    return _scalar_multiplier_op(f, mult)


def inv_sqrt_laplacian(f: Field) -> Field:
    """(-Laplacian)^(-1/2) with the mean mode mapped to 0."""
    grid = f.grid
    mag = np.where(grid.k_mag == 0, 1.0, grid.k_mag)
    mult = 1.0 / mag
    mult[grid.k_mag == 0] = 0.0
    return _scalar_multiplier_op(f, mult)


def biot_savart_2d(omega: Field) -> Field:
    """Velocity with curl v = omega and div v = 0 on the 2D torus."""
    grid = omega.grid
    if grid.dim != 2 or not omega.is_scalar:
        raise ValueError("biot_savart_2d expects a 2D scalar field")
    s = transform(omega)
    c = s.coefficients[0]
    mean_mag = abs(c.flat[0])
    scale = max(float(np.max(np.abs(c))), 1.0)
    if mean_mag > 1e-12 * scale:
        raise ValueError("vorticity must be mean-free")
    psi = -c / grid.k_sq_safe  # stream function, Laplacian psi = omega
    psi[grid.k_sq == 0] = 0.0
    vx = np.real(np.fft.ifftn(-1j * grid.k[1] * psi, norm="forward"))
    vy = np.real(np.fft.ifftn(1j * grid.k[0] * psi, norm="forward"))
    return Field.vector(grid, (vx, vy))


def leray_project(u: Field) -> Field:
    """Orthogonal projection onto divergence-free fields; keeps the mean."""
    if not u.is_vector:
        raise ValueError("leray_project expects a vector field")
    grid = u.grid
    s = transform(u)
    c = s.coefficients
    k_dot = np.zeros(grid.shape, dtype=np.complex128)
    for j in range(grid.dim):
        k_dot += grid.k[j] * c[j]
    k_dot /= grid.k_sq_safe
    out = np.stack([c[j] - grid.k[j] * k_dot for j in range(grid.dim)])
    return Field(grid, np.real(np.fft.ifftn(out, axes=_SPATIAL(grid), norm="forward")))


def perp_gradient(f: Field) -> Field:
    """Rotated gradient (-d2 f, d1 f) of a 2D scalar field."""
    if f.grid.dim != 2 or not f.is_scalar:
        raise ValueError("perp_gradient expects a 2D scalar field")
    s = transform(f)
    c = s.coefficients[0]
    k = f.grid.k
    vx = np.real(np.fft.ifftn(-1j * k[1] * c, norm="forward"))
    vy = np.real(np.fft.ifftn(1j * k[0] * c, norm="forward"))
    return Field.vector(f.grid, (vx, vy))


def linf_norm_interpolant(f: Field, refine: int = 8, newton_steps: int = 5) -> float:
    """Sup norm of the trigonometric interpolant of a scalar field.

    The grid max is a biased estimator of the continuum sup (the bias
    moves as extrema drift between sample points); this refines by
    zero-padded resampling and polishes the peak with Newton iterations
    on the interpolant.
    """
    if not f.is_scalar:
        raise ValueError("linf_norm_interpolant expects a scalar field")
    grid = f.grid
    c = transform(f).coefficients[0]
    n_big = grid.n * refine
    big = np.zeros((n_big,) * grid.dim, dtype=np.complex128)
    idx = np.fft.fftfreq(grid.n, 1.0 / grid.n).astype(int) % n_big
    big[np.ix_(*([idx] * grid.dim))] = c
    fine = np.real(np.fft.ifftn(big, norm="forward"))
    flat = int(np.argmax(np.abs(fine)))
    loc = np.unravel_index(flat, fine.shape)
    best = float(np.abs(fine[loc]))
    x = np.array(loc, dtype=float) * (TWO_PI / n_big)

    nz = np.nonzero(c)
    coeffs = c[nz]
    modes = np.stack([grid.k[j][nz] for j in range(grid.dim)], axis=1)
    sign = np.sign(fine[loc]) or 1.0
    max_step = 2.0 * TWO_PI / n_big
    for _ in range(newton_steps):
        phase = coeffs * np.exp(1j * (modes @ x))
        grad_v = np.real(np.sum(1j * modes * phase[:, None], axis=0))
        hess = -np.real(np.einsum("m,mj,ml->jl", phase, modes, modes))
        try:
            step = -np.linalg.solve(hess, grad_v)
        except np.linalg.LinAlgError:
            break
        norm = float(np.linalg.norm(step))
        if norm > max_step:
            step *= max_step / norm
        x = x + step
        value = sign * float(np.real(np.sum(coeffs * np.exp(1j * (modes @ x)))))
        if value > best:
            best = value
        if norm < 1e-14:
            break
    return best


def dealias(s: Spectrum) -> Spectrum:
    """2/3-rule truncation: zero every mode with any |k_j| > n/3."""
    mask = s.grid.dealias_mask
    return Spectrum(s.grid, s.coefficients * mask)


def dealias_field(f: Field) -> Field:
    return inverse(dealias(transform(f)))


def pressure_from_velocity(v: Field) -> Field:
    """Mean-free pressure of a divergence-free velocity field.

    Solves Laplacian pi = -div div (v x v) with the quadratic products
    dealiased, matching the dealiased advection term.
    """
    if not v.is_vector:
        raise ValueError("pressure_from_velocity expects a vector field")
    grid = v.grid
    mask = grid.dealias_mask
    rhs = np.zeros(grid.shape, dtype=np.complex128)
    for j in range(grid.dim):
        for l in range(grid.dim):
            t_hat = np.fft.fftn(v.values[j] * v.values[l], norm="forward") * mask
            rhs += grid.k[j] * grid.k[l] * t_hat
    pi_hat = -rhs / grid.k_sq_safe
    pi_hat[grid.k_sq == 0] = 0.0
    return Field.scalar(grid, np.real(np.fft.ifftn(pi_hat, norm="forward")))
