"""Synthetic diagnostic series with prescribed tail behavior.

Each profile fixes an analytic deficit d(t) on a grid approaching t_star
and derives the norm column from the discrete (trapezoid) cumulative
integral, so alpha and the norms satisfy the exponential representation
identity exactly as the residual check computes it.

Kinds:
  self_similar       d = 0; the window Y stays at the given level
  decaying           alpha = 0 (regular solution, bounded X, Y -> 0)
  integrable_deficit d = sign * A * (t_star-t)^(-q), q < 1 (finite integral)
  divergent_deficit  d = sign * A * (t_star-t)^(-q), q >= 1 (divergent
                     integral; the negative sign realizes the eliminated
                     window-collapse case)
  log_corrected      d touching the log-corrected threshold exactly at
                     the dyadic times t_star - 2^(-j)
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid

from . import scaling
from .series import DiagnosticSample, DiagnosticSeries, SeriesParams

KINDS = (
    "self_similar",
    "decaying",
    "integrable_deficit",
    "divergent_deficit",
    "log_corrected",
)


@dataclass
class SyntheticProfile:
    """Parameters of one synthetic series.

    amplitude sets the window level Y for self_similar and the scale
    variable X(t0) otherwise; deficit_scale and exponent shape the power
    deficits; sign flips the integrable one. first_gap/final_gap bound
    t_star - t over the sample grid (geometric spacing).
    """

    kind: str
    model: str = "euler2d"
    k: int = 3
    p: float = 2.0
    N: int = 2
    t_star: float = 1.0
    amplitude: float = 1.0
    deficit_scale: float = 1.0
    exponent: float = 0.5
    sign: int = 1
    eps0: float = 2.0
    modulation_depth: float = 0.5
    initial_norm: float = 1.0
    num_samples: int = 1024
    first_gap: float | None = None
    final_gap: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown profile kind {self.kind!r}")
        if self.t_star <= 0:
            raise ValueError("t_star must be positive")
        if self.kind == "integrable_deficit" and not 0 < self.exponent < 1:
            raise ValueError("integrable_deficit needs exponent in (0, 1)")
        if self.kind == "divergent_deficit" and self.exponent < 1:
            raise ValueError("divergent_deficit needs exponent >= 1")
        if self.kind == "log_corrected" and self.eps0 <= 1:
            raise ValueError("log_corrected needs eps0 > 1")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        if self.amplitude <= 0 or self.initial_norm <= 0:
            raise ValueError("amplitude and initial_norm must be positive")

    @property
    def params(self) -> SeriesParams:
        return SeriesParams(k=self.k, p=self.p, N=self.N)


def _time_grid(profile: SyntheticProfile) -> np.ndarray:
    t_star = profile.t_star
    if profile.kind == "log_corrected":
        # Dyadic ladder in u = log2(1/gap): 16 samples per octave so the
        # integer u (the exact touching times) are grid points.
        first = profile.first_gap if profile.first_gap is not None else 0.25
        final = profile.final_gap if profile.final_gap is not None else 2.0**-16
        if not final < first < 1.0:
            raise ValueError("log_corrected needs final_gap < first_gap < 1")
        u0 = math.ceil(math.log2(1.0 / first))
        u1 = math.floor(math.log2(1.0 / final))
        if u1 <= u0:
            raise ValueError("log_corrected gap range too narrow")
        u = np.arange(u0 * 16, u1 * 16 + 1) / 16.0
        return t_star - 2.0**-u
    first = profile.first_gap if profile.first_gap is not None else 0.5 * t_star
    final = profile.final_gap if profile.final_gap is not None else 1e-6 * t_star
    if not 0 < final < first <= t_star:
        raise ValueError("need 0 < final_gap < first_gap <= t_star")
    gaps = np.geomspace(first, final, profile.num_samples)
    return t_star - gaps


def _deficit(profile: SyntheticProfile, t: np.ndarray, rate: float) -> np.ndarray:
    gap = profile.t_star - t
    kind = profile.kind
    if kind == "self_similar":
        return np.zeros_like(t)
    if kind == "decaying":
        return -rate / gap
    if kind in ("integrable_deficit", "divergent_deficit"):
        return profile.sign * profile.deficit_scale * gap**-profile.exponent
    # log_corrected: touch the threshold exactly where the modulation is 1.
    u = np.log2(1.0 / gap)
    modulation = 1.0 + profile.modulation_depth * (1.0 - np.cos(2.0 * np.pi * u))
    return -rate * profile.eps0 * modulation / (gap * np.log(1.0 / gap))


def synth(profile: SyntheticProfile) -> DiagnosticSeries:
    """Generate the series realizing the profile."""
    law = scaling.law_for(profile.model, profile.params)
    rate = law.critical_rate
    t = _time_grid(profile)
    gap = profile.t_star - t
    d = _deficit(profile, t, rate)
    alpha = d + rate / gap

    integral = cumulative_trapezoid(d, t, initial=0.0)
    exponent = law.norm_exponent * integral
    if np.max(np.abs(exponent)) > 680:
        raise ValueError("profile parameters overflow the representation")
    if profile.kind == "self_similar":
        y0 = profile.amplitude
    else:
        y0 = gap[0] ** law.time_exponent * profile.amplitude
    y = y0 * np.exp(exponent)
    x = y / gap**law.time_exponent
    norm = scaling.norm_from_scale_x(law, x, profile.initial_norm)

    meta = {"synthetic": asdict(profile)}
    if law.uses_initial_norm:
        meta["initial_norm"] = profile.initial_norm
    series = DiagnosticSeries(
        model=profile.model, params=profile.params, meta=meta
    )
    sup_alpha = None
    if profile.kind == "log_corrected":
        # Unit-rate analogue touching the sup-norm threshold at the same times.
        u = np.log2(1.0 / gap)
        modulation = 1.0 + profile.modulation_depth * (1.0 - np.cos(2.0 * np.pi * u))
        sup_alpha = (1.0 - profile.eps0 * modulation / np.log(1.0 / gap)) / gap
    for i in range(t.size):
        kwargs = {
            "t": float(t[i]),
            law.alpha_column: float(alpha[i]),
            law.norm_column: float(norm[i]),
            "X": float(x[i]),
        }
        if sup_alpha is not None:
            kwargs["alpha_linf"] = float(sup_alpha[i])
        series.append(DiagnosticSample(**kwargs))
    return series


def intended_outcome(profile: SyntheticProfile) -> str:
    """Trichotomy label (or 'violated') the profile is built to realize."""
    law = scaling.law_for(profile.model, profile.params)
    if profile.kind == "self_similar":
        return "case_i"
    if profile.kind == "decaying":
        # At zero critical rate the decaying profile degenerates to the
        # self-similar one (alpha = deficit = 0 identically).
        return "case_i" if law.critical_rate == 0.0 else "violated"
    if profile.kind == "log_corrected":
        return "violated"
    if profile.kind == "integrable_deficit":
        return "violated" if law.critical_rate == 0.0 else "case_ii"
    return "case_iii" if profile.sign > 0 else "violated"


def draw_profile(
    kind: str,
    rng: np.random.Generator,
    model: str = "euler2d",
    k: int = 3,
    p: float = 2.0,
    N: int = 2,
) -> SyntheticProfile:
    """Randomized profile with parameters kept clear of decision margins."""
    t_star = float(rng.uniform(0.5, 2.0))
    common = dict(model=model, k=k, p=p, N=N, t_star=t_star, num_samples=512)
    if kind == "self_similar":
        return SyntheticProfile(kind, amplitude=float(rng.uniform(0.5, 2.0)), **common)
    if kind == "decaying":
        return SyntheticProfile(kind, amplitude=float(rng.uniform(0.5, 2.0)), **common)
    if kind == "integrable_deficit":
        return SyntheticProfile(
            kind,
            amplitude=float(rng.uniform(0.5, 2.0)),
            deficit_scale=float(rng.uniform(0.3, 1.5)),
            exponent=float(rng.uniform(0.2, 0.7)),
            sign=int(rng.choice([-1, 1])),
            **common,
        )
    if kind == "divergent_deficit":
        return SyntheticProfile(
            kind,
            amplitude=float(rng.uniform(0.5, 2.0)),
            deficit_scale=float(rng.uniform(0.3, 1.2)),
            exponent=float(rng.uniform(1.0, 1.3)),
            final_gap=1e-3 * t_star,
            **common,
        )
    if kind == "log_corrected":
        return SyntheticProfile(
            kind,
            eps0=float(rng.uniform(1.5, 3.0)),
            modulation_depth=float(rng.uniform(0.3, 1.0)),
            **common,
        )
    raise ValueError(f"unknown profile kind {kind!r}")
