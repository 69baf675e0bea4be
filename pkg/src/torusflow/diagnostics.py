"""Instantaneous scalar diagnostics and the time-series recorder.

The three growth-rate quantities are logarithmic derivatives of the
monitored norms along exact solutions:

  alpha_k(v)        d/dt log |D^k v|_L2        (inviscid vorticity transport)
  lambda_p(v)       d/dt log |v|_Lp            (viscous momentum balance)
  alpha_kp(theta)   d/dt log |D^k theta|_Lp    (active scalar transport)

Each is computed directly from the field by spectral quadrature; the
time-derivative characterization is what the identity tests check.
"""

from __future__ import annotations

import warnings

import numpy as np
from scipy.integrate import trapezoid

from . import models, scaling, spectral
from .grid import Field
from .models import FlowState, Model
from .series import DiagnosticSample, DiagnosticSeries, SeriesParams

_TINY = 1e-300
_MAG_GUARD = 1e-30


def _warn_low_k(k: int, threshold: float, label: str) -> None:
    if k <= threshold:
        warnings.warn(
            f"k={k} is at or below {label}={threshold}; the derivative-norm "
            f"theory assumes k > {label}",
            stacklevel=3,
        )


def alpha_k(v: Field, k: int) -> float:
    """Log-derivative of |D^k v|_L2 induced by the advection term.

    Evaluated as -<D^k (v.grad v), D^k v> / |D^k v|_L2^2 with the pairing
    done through the |xi|^(2k) multiplier; returns 0 for the zero field.
    """
    _warn_low_k(k, v.grid.dim / 2 + 1, "N/2+1")
    grid = v.grid
    v_hat = spectral.transform(v).coefficients
    w_hat = spectral.transform(models.nonlinear_term(v)).coefficients
    weight = grid.k_sq**k
    denom = float(np.sum(weight * np.abs(v_hat) ** 2))
    if denom < _TINY:
        return 0.0
    num = float(np.sum(weight * np.real(w_hat * np.conj(v_hat))))
    return -num / denom


def _deformation(v: Field) -> tuple[np.ndarray, np.ndarray]:
    """Velocity gradient g[j, l] = d_j v_l and symmetric part S."""
    g = spectral.grad_components(v)
    s = 0.5 * (g + np.swapaxes(g, 0, 1))
    return g, s


def grad_linf(v: Field) -> float:
    """Max over points of the Frobenius norm of the velocity gradient."""
    g = spectral.grad_components(v)
    return float(np.sqrt(np.sum(g**2, axis=(0, 1))).max())


def alpha_local(v: Field) -> Field:
    """Vorticity-direction stretching rate xi.S xi for a 3D velocity.

    Set to 0 wherever the vorticity vanishes; bounded pointwise by the
    Frobenius norm of the velocity gradient.
    """
    if v.grid.dim != 3 or not v.is_vector:
        raise ValueError("alpha_local expects a 3D vector field")
    g, s = _deformation(v)
    omega = np.stack([g[1, 2] - g[2, 1], g[2, 0] - g[0, 2], g[0, 1] - g[1, 0]])
    mag = np.sqrt(np.sum(omega**2, axis=0))
    xi = omega / np.maximum(mag, _MAG_GUARD)
    out = np.einsum("j...,jl...,l...->...", xi, s, xi)
    return Field.scalar(v.grid, out)


def alpha_hat_local(theta: Field) -> Field:
    """Level-line stretching rate xi.S xi for the active scalar, with
    xi the unit rotated gradient of theta; 0 where that gradient vanishes."""
    if theta.grid.dim != 2 or not theta.is_scalar:
        raise ValueError("alpha_hat_local expects a 2D scalar field")
    v = models.sqg_velocity(theta)
    _, s = _deformation(v)
    tangent = spectral.perp_gradient(theta).values
    mag = np.sqrt(np.sum(tangent**2, axis=0))
    xi = tangent / np.maximum(mag, _MAG_GUARD)
    out = np.einsum("j...,jl...,l...->...", xi, s, xi)
    return Field.scalar(theta.grid, out)


def gamma_p(v: Field, p: float) -> float:
    """Pressure contribution to d/dt log |v|_Lp."""
    gp, _, _ = lp_growth_rate(v, p, nu=0.0)
    return gp


def delta_p(v: Field, p: float) -> float:
    """Nonnegative gradient contribution to d/dt log |v|_Lp (unit viscosity)."""
    _, dp, _ = lp_growth_rate(v, p, nu=1.0)
    return dp


def lambda_p(v: Field, p: float, nu: float = 1.0) -> float:
    """d/dt log |v|_Lp = gamma_p - nu * delta_p for viscosity nu."""
    _, _, lam = lp_growth_rate(v, p, nu)
    return lam


def lp_growth_rate(v: Field, p: float, nu: float) -> tuple[float, float, float]:
    """(gamma_p, delta_p, lambda_p) in one pass; zero field gives zeros."""
    if p < 2:
        raise ValueError("p must be >= 2")
    if not v.is_vector:
        raise ValueError("expected a velocity field")
    grid = v.grid
    mag = v.magnitude()
    denom = float(np.sum(mag**p)) * grid.cell_volume
    if denom < _TINY:
        return 0.0, 0.0, 0.0
    weight = np.ones(grid.shape) if p == 2 else np.maximum(mag, _MAG_GUARD) ** (p - 2)

    pi = spectral.pressure_from_velocity(v)
    grad_pi = spectral.gradient(pi).values
    num_gamma = -float(np.sum(np.sum(grad_pi * v.values, axis=0) * weight)) * grid.cell_volume

    g = spectral.grad_components(v)
    fro_sq = np.sum(g**2, axis=(0, 1))
    q = Field.scalar(grid, mag**2)
    grad_q = spectral.gradient(q).values
    grad_mag_sq = np.sum(grad_q**2, axis=0) / (4.0 * np.maximum(mag**2, _MAG_GUARD**2))
    num_delta = float(np.sum((fro_sq + (p - 2) * grad_mag_sq) * weight)) * grid.cell_volume

    gp = num_gamma / denom
    dp = num_delta / denom
    return gp, dp, gp - nu * dp


def dk_norm_lp(f: Field, k: int, p: float) -> float:
    """L^p norm of the pointwise k-th derivative tensor magnitude."""
    if k == 0:
        return spectral.lp_norm(f, p)
    if p == 2:
        return spectral.dk_seminorm_l2(f, k)
    return spectral.lp_norm(spectral.dk_tensor(f, k), p)


def alpha_kp(theta: Field, k: int, p: float) -> float:
    """Log-derivative of |D^k theta|_Lp under transport by v = R-perp theta."""
    if p < 2:
        raise ValueError("p must be >= 2")
    _warn_low_k(k, 2 / p + 1, "2/p+1")
    grid = theta.grid
    v = models.sqg_velocity(theta)
    w = models.advection(v, theta)
    t_theta = spectral.dk_tensor(theta, k).values
    t_w = spectral.dk_tensor(w, k).values
    mag = np.sqrt(np.sum(t_theta**2, axis=0))
    denom = float(np.sum(mag**p)) * grid.cell_volume
    if denom < _TINY:
        return 0.0
    weight = np.ones(grid.shape) if p == 2 else np.maximum(mag, _MAG_GUARD) ** (p - 2)
    dot = np.sum(t_w * t_theta, axis=0)
    num = -float(np.sum(dot * weight)) * grid.cell_volume
    return num / denom


def scale_xy(series: DiagnosticSeries, t_ref: float) -> tuple[np.ndarray, np.ndarray]:
    """Scale variable X(t) and window Y(t) = (t_ref - t)^a X(t)."""
    return scaling.x_values(series), scaling.y_values(series, t_ref)


def bkm_integral(series: DiagnosticSeries) -> float:
    """Trapezoid integral of the recorded max-vorticity magnitude."""
    if len(series) < 2:
        raise ValueError("need at least two samples")
    y = series.column("omega_linf")
    if np.any(np.isnan(y)):
        raise ValueError("series lacks the omega_linf column")
    return float(trapezoid(y, series.t))


def serrin_integral(series: DiagnosticSeries, p: float | None = None) -> float:
    """Trapezoid integral of |v|_Lp^(2p/(p-N)) along the series."""
    if len(series) < 2:
        raise ValueError("need at least two samples")
    if p is None:
        p = series.params.p
    n_dim = series.params.N
    if p <= n_dim:
        raise ValueError("Serrin exponent needs p > N")
    y = series.column("v_lp")
    if np.any(np.isnan(y)):
        raise ValueError("series lacks the v_lp column")
    return float(trapezoid(y ** (2 * p / (p - n_dim)), series.t))


def commutator_ratio(f: Field, g: Field, k: int, p: float) -> float | None:
    """|D^k(fg) - f D^k g|_Lp over the product bound it is controlled by.

    Returns None when the bound degenerates (both fields constant).
    """
    prod = Field.scalar(f.grid, f.values[0] * g.values[0])
    lhs_tensor = spectral.dk_tensor(prod, k).values - f.values[0] * spectral.dk_tensor(g, k).values
    lhs = spectral.lp_norm(Field(f.grid, lhs_tensor), p)
    grad_f_linf = float(spectral.gradient(f).magnitude().max())
    g_linf = float(g.magnitude().max())
    denom = grad_f_linf * dk_norm_lp(g, k - 1, p) + dk_norm_lp(f, k, p) * g_linf
    if denom < 1e-14:
        # constant f: both sides vanish
        return 0.0 if lhs < 1e-12 else None
    return lhs / denom


def gn_ratio(f: Field, k: int, p: float) -> float | None:
    """|grad f|_Linf over the interpolation bound |D^k f|^e |f|^(1-e),
    e = (p+N)/(kp). Returns None for the zero field."""
    n_dim = f.grid.dim
    e = (p + n_dim) / (k * p)
    grad_linf_val = float(np.sqrt(np.sum(spectral.grad_components(f) ** 2, axis=(0, 1))).max())
    hi = dk_norm_lp(f, k, p)
    lo = spectral.lp_norm(f, p)
    if hi < 1e-14 or lo < 1e-14:
        return None
    return grad_linf_val / (hi**e * lo ** (1.0 - e))


class SeriesRecorder:
    """Collects one DiagnosticSample per recorded state of a single run."""

    def __init__(self, k: int = 3, p: float = 2.0, meta: dict | None = None):
        self.params = SeriesParams(k=k, p=float(p), N=2)
        self.meta = dict(meta or {})
        self._series: DiagnosticSeries | None = None
        self._initial_norm: float | None = None

    def record(self, state: FlowState) -> DiagnosticSample:
        if self._series is None:
            self._series = DiagnosticSeries(
                model=state.model.value,
                params=self.params,
                nu=state.nu,
                grid_n=state.field.grid.n,
                meta=self.meta,
            )
        sample = self._sample(state)
        self._series.append(sample)
        return sample

    def mark_blowup_suspected(self, t: float) -> None:
        if self._series is not None:
            self._series.meta["blowup_suspected"] = True
            self._series.meta["abort_time"] = t

    def series(self) -> DiagnosticSeries:
        if self._series is None:
            raise ValueError("nothing recorded yet")
        return self._series

    def _capture_initial_norm(self, value: float) -> float:
        if self._initial_norm is None:
            self._initial_norm = value
            self._series.meta["initial_norm"] = value
        return self._initial_norm

    def _sample(self, state: FlowState) -> DiagnosticSample:
        k, p = self.params.k, self.params.p
        law = scaling.law_for(state.model.value, self.params)
        v = models.velocity_of(state)
        if state.model is Model.SQG:
            theta = state.field
            norm = dk_norm_lp(theta, k, p)
            initial = self._capture_initial_norm(spectral.lp_norm(theta, p))
            return DiagnosticSample(
                t=state.t,
                alpha_kp=alpha_kp(theta, k, p),
                dk_theta_lp=norm,
                grad_v_linf=grad_linf(v),
                alpha_linf=float(alpha_hat_local(theta).magnitude().max()),
                X=float(scaling.scale_x_from_norm(law, norm, initial)),
            )
        omega_max = float(state.field.magnitude().max())
        if state.model is Model.NS_2D:
            gp, dp, lam = lp_growth_rate(v, p, nu=state.nu)
            v_lp = spectral.lp_norm(v, p)
            return DiagnosticSample(
                t=state.t,
                gamma_p=gp,
                delta_p=dp,
                lambda_p=lam,
                v_lp=v_lp,
                grad_v_linf=grad_linf(v),
                omega_linf=omega_max,
                X=v_lp,
            )
        norm = spectral.dk_seminorm_l2(v, k)
        initial = self._capture_initial_norm(spectral.lp_norm(v, 2))
        return DiagnosticSample(
            t=state.t,
            alpha_k=alpha_k(v, k),
            dk_v_l2=norm,
            v_lp=spectral.lp_norm(v, p),
            grad_v_linf=grad_linf(v),
            omega_linf=omega_max,
            X=float(scaling.scale_x_from_norm(law, norm, initial)),
        )
