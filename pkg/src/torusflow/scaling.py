"""Scaling-invariant window shared by diagnostics and criteria.

Every model carries a scale variable X(t) built from one monitored norm
M(t) whose logarithmic time derivative is the model's alpha-quantity:

    euler2d:  M = |D^k v|_L2,      alpha = alpha_k,   X = M^b * |v0|_L2^(1-b)
    ns2d:     M = |v|_Lp,          alpha = lambda_p,  X = M
    sqg:      M = |D^k theta|_Lp,  alpha = alpha_kp,  X = M^b * |theta0|_Lp^(1-b)

With Y(t) = (T - t)^a X(t) for a candidate time T, the chain rule gives

    dY/dt = b * (alpha(t) - c / (T - t)) * Y,      c = a / b,

so Y is constant exactly on the critical self-similar rate c/(T-t).
The integrand alpha - c/(T-t) is called the deficit throughout.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .series import DiagnosticSeries, SeriesParams


@dataclass(frozen=True)
class ScalingLaw:
    model: str
    alpha_column: str
    norm_column: str
    time_exponent: float  # a
    norm_exponent: float  # b
    uses_initial_norm: bool

    @property
    def critical_rate(self) -> float:
        """Deficit rate c = a/b."""
        return self.time_exponent / self.norm_exponent


def law_for(model: str, params: SeriesParams) -> ScalingLaw:
    k, p, n_dim = params.k, params.p, params.N
    if model == "euler2d":
        b = (n_dim + 2) / (2.0 * k)
        return ScalingLaw(model, "alpha_k", "dk_v_l2", 1.0, b, True)
    if model == "ns2d":
        a = (p - n_dim) / (2.0 * p)
        return ScalingLaw(model, "lambda_p", "v_lp", a, 1.0, False)
    if model == "sqg":
        b = (p + 2) / (k * p)
        return ScalingLaw(model, "alpha_kp", "dk_theta_lp", 1.0, b, True)
    raise ValueError(f"no scaling law for model {model!r}")


def scale_x_from_norm(law: ScalingLaw, norm: np.ndarray, initial_norm: float | None) -> np.ndarray:
    """X from the monitored norm (and the fixed initial plain norm)."""
    if not law.uses_initial_norm:
        return np.asarray(norm, dtype=float)
    if initial_norm is None or initial_norm <= 0:
        raise ValueError("scale variable needs a positive initial norm")
    b = law.norm_exponent
    return np.asarray(norm, dtype=float) ** b * initial_norm ** (1.0 - b)


def norm_from_scale_x(law: ScalingLaw, x: np.ndarray, initial_norm: float | None) -> np.ndarray:
    """Inverse of scale_x_from_norm, used by the synthetic generator."""
    if not law.uses_initial_norm:
        return np.asarray(x, dtype=float)
    b = law.norm_exponent
    return (np.asarray(x, dtype=float) / initial_norm ** (1.0 - b)) ** (1.0 / b)


def series_law(series: DiagnosticSeries) -> ScalingLaw:
    return law_for(series.model, series.params)


def x_values(series: DiagnosticSeries) -> np.ndarray:
    x = series.column("X")
    if np.any(np.isnan(x)):
        raise ValueError("series has no scale variable column")
    return x


def y_values(series: DiagnosticSeries, t_star: float) -> np.ndarray:
    """Window Y(t) = (t_star - t)^a X(t); t_star must exceed all times."""
    t = series.t
    if t_star <= t[-1]:
        raise ValueError("t_star must lie beyond the recorded range")
    law = series_law(series)
    return (t_star - t) ** law.time_exponent * x_values(series)


def alpha_values(series: DiagnosticSeries) -> np.ndarray:
    law = series_law(series)
    a = series.column(law.alpha_column)
    if np.any(np.isnan(a)):
        raise ValueError(f"series lacks column {law.alpha_column!r}")
    return a


def deficit_values(series: DiagnosticSeries, t_star: float) -> np.ndarray:
    """alpha(t) - c/(t_star - t) along the series."""
    t = series.t
    if t_star <= t[-1]:
        raise ValueError("t_star must lie beyond the recorded range")
    law = series_law(series)
    return alpha_values(series) - law.critical_rate / (t_star - t)
