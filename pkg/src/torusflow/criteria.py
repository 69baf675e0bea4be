"""Blow-up criterion evaluators over recorded diagnostic series.

Every evaluator takes a DiagnosticSeries plus a candidate time t_star
beyond the recorded range and returns a CriterionVerdict. Asymptotic
statements cannot be decided from finite data, so liminf/limsup behavior
is estimated on a trailing window and 'inconclusive' is a first-class
outcome; each verdict carries the window and the scalars needed to
recompute it.

Criterion ids:
  lower_bound       tail liminf of Y(t) = (t_star-t)^a X(t) vs a threshold
  deficit_integral  boundedness of the cumulative deficit integral
  log_refined       log-corrected crossing sequence of the alpha quantity
  log_refined_sup   same for the pointwise stretching sup norm (unit rate)
  log_refined_sup_scaled   sup-norm variant using the scaling rate c
  trichotomy        three-way classification of the tail deficit
  osgood_weighted   deficit integral weighted by 1/g(log Y)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_trapezoid, simpson, trapezoid

from . import scaling
from .series import DiagnosticSeries

OUTCOME_SATISFIED = "satisfied"
OUTCOME_VIOLATED = "violated"
OUTCOME_INCONCLUSIVE = "inconclusive"
CASE_I = "case_i"
CASE_II = "case_ii"
CASE_III = "case_iii"

CRITERION_IDS = (
    "lower_bound",
    "deficit_integral",
    "log_refined",
    "log_refined_sup",
    "log_refined_sup_scaled",
    "trichotomy",
    "osgood_weighted",
)

_SLOPE_FLAT = 0.05
_FIT_R2 = 0.5


class UnsupportedCriterionError(ValueError):
    """Requested criterion needs a column the series does not carry."""


@dataclass
class CriterionVerdict:
    criterion: str
    t_star: float
    outcome: str
    evidence: dict = field(default_factory=dict)
    window: tuple[int, int] = (0, 0)
    params: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "criterion": self.criterion,
            "t_star": self.t_star,
            "outcome": self.outcome,
            "evidence": _jsonable(self.evidence),
            "window": list(self.window),
            "params": _jsonable(self.params),
        }


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    return obj


def tail_window(n: int, frac: float = 0.2, min_size: int = 16) -> tuple[int, int]:
    """Trailing-window index range used for all tail estimates."""
    size = max(min_size, math.ceil(frac * n))
    return max(0, n - size), n


def _loglog_fit(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    """Least-squares slope of y against x with a crude r^2; flat data
    (zero variance) reports slope 0 with perfect fit."""
    if np.ptp(y) < 1e-13 * (1.0 + np.max(np.abs(y))):
        return 0.0, 1.0
    slope, intercept = np.polyfit(x, y, 1)
    pred = slope * x + intercept
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return float(slope), r2


def _base_params(series: DiagnosticSeries) -> dict:
    return {
        "model": series.model,
        "k": series.params.k,
        "p": series.params.p,
        "N": series.params.N,
    }


def _require_column(series: DiagnosticSeries, criterion: str, column: str) -> None:
    if not series.has_column(column):
        raise UnsupportedCriterionError(
            f"criterion {criterion!r} needs column {column!r}, "
            f"which is absent for model {series.model!r}"
        )


def eval_lower_bound(
    series: DiagnosticSeries,
    t_star: float,
    threshold: float | None = None,
    window_frac: float = 0.2,
) -> CriterionVerdict:
    """Tail liminf of the window Y(t) against a lower-bound threshold.

    The liminf is estimated from the trailing window: the fitted power of
    Y against (t_star - t) extrapolates the trend (a positive power means
    Y -> 0, so t_star cannot be a blow-up time), the window minimum
    estimates the level when the trend is flat.
    """
    _require_column(series, "lower_bound", "X")
    t = series.t
    if t_star <= t[-1]:
        raise ValueError("t_star lies inside the recorded range")
    y = scaling.y_values(series, t_star)
    w0, w1 = tail_window(len(series), window_frac)
    gap = t_star - t[w0:w1]
    yw = y[w0:w1]
    slope, r2 = _loglog_fit(np.log(gap), np.log(np.maximum(yw, 1e-300)))
    tail_min = float(yw.min())
    monotone_down = bool(np.all(np.diff(yw) <= 0) and yw[-1] < yw[0])

    evidence = {
        "tail_liminf_estimate": tail_min,
        "gap_power": slope,
        "fit_r2": r2,
        "threshold": threshold,
        "y_first": float(yw[0]),
        "y_last": float(yw[-1]),
    }
    if slope > _SLOPE_FLAT and r2 >= _FIT_R2:
        outcome = OUTCOME_VIOLATED  # Y ~ gap^slope -> 0 at t_star
    elif threshold is not None and monotone_down and yw[-1] < threshold / 2:
        outcome = OUTCOME_VIOLATED
    elif threshold is not None and tail_min >= threshold:
        outcome = OUTCOME_SATISFIED
    elif slope < -_SLOPE_FLAT and r2 >= _FIT_R2:
        outcome = OUTCOME_SATISFIED  # growing window
    elif abs(slope) <= _SLOPE_FLAT:
        if threshold is None:
            outcome = OUTCOME_SATISFIED
        else:
            outcome = OUTCOME_VIOLATED if tail_min < threshold else OUTCOME_SATISFIED
    else:
        outcome = OUTCOME_INCONCLUSIVE
    return CriterionVerdict(
        "lower_bound", t_star, outcome, evidence, (w0, w1), _base_params(series)
    )


def eval_integral_condition(
    series: DiagnosticSeries, t_star: float, window_frac: float = 0.2
) -> CriterionVerdict:
    """Boundedness (from below) of the cumulative deficit integral.

    The integral is regressed against log(1/(t_star-t)) on the tail: a
    clearly negative slope means logarithmic divergence to -infinity.
    """
    law = scaling.series_law(series)
    _require_column(series, "deficit_integral", law.alpha_column)
    t = series.t
    d = scaling.deficit_values(series, t_star)
    integral = cumulative_trapezoid(d, t, initial=0.0)
    w0, w1 = tail_window(len(series), window_frac)
    log_gap_inv = np.log(1.0 / (t_star - t[w0:w1]))
    slope, r2 = _loglog_fit(log_gap_inv, integral[w0:w1])
    tol = max(0.02, 0.1 * law.critical_rate)
    evidence = {
        "integral_end": float(integral[-1]),
        "log_slope": slope,
        "fit_r2": r2,
        "slope_tolerance": tol,
    }
    if slope >= -tol:
        outcome = OUTCOME_SATISFIED
    elif r2 >= _FIT_R2:
        outcome = OUTCOME_VIOLATED
    else:
        outcome = OUTCOME_INCONCLUSIVE
    return CriterionVerdict(
        "deficit_integral", t_star, outcome, evidence, (w0, w1), _base_params(series)
    )


def eval_log_corrected(
    series: DiagnosticSeries,
    t_star: float,
    eps0: float,
    variant: str = "default",
    window_frac: float = 0.2,
) -> CriterionVerdict:
    """Detects samples reaching the critical rate minus its log correction.

    variant 'default' uses the model's alpha quantity with rate c;
    'sup' uses the pointwise stretching sup norm with unit rate;
    'sup_scaled' uses the sup norm with rate c (both are reported since
    the unit-rate form is not scale-matched to the integral criteria).

    Times are rescaled so every gap is <= 1/e, keeping the log factor
    positive; the statement is asymptotically scale-covariant, so this is
    a presentation choice recorded in the evidence.
    """
    if eps0 <= 1:
        raise ValueError("eps0 must exceed 1")
    law = scaling.series_law(series)
    if variant == "default":
        column, rate = law.alpha_column, law.critical_rate
    elif variant == "sup":
        column, rate = "alpha_linf", 1.0
    elif variant == "sup_scaled":
        column, rate = "alpha_linf", law.critical_rate
    else:
        raise ValueError(f"unknown variant {variant!r}")
    criterion = {"default": "log_refined", "sup": "log_refined_sup", "sup_scaled": "log_refined_sup_scaled"}[variant]
    _require_column(series, criterion, column)

    t = series.t
    if t_star <= t[-1]:
        raise ValueError("t_star lies inside the recorded range")
    gap = t_star - t
    rho = min(1.0, math.exp(-1.0) / gap[0])
    gap_s = rho * gap
    quantity = series.column(column) / rho
    log_inv = np.log(1.0 / gap_s)
    bound = (rate / gap_s) * (1.0 - eps0 / log_inv)
    slack = 1e-9 * np.abs(bound) + 1e-12
    crossing = quantity >= bound - slack
    w0, w1 = tail_window(len(series), window_frac)
    tail_crossings = int(np.count_nonzero(crossing[w0:w1]))
    evidence = {
        "crossing_indices": np.nonzero(crossing)[0].tolist(),
        "n_tail_crossings": tail_crossings,
        "eps0": eps0,
        "rate": rate,
        "time_rescale": rho,
    }
    if variant != "default":
        evidence["note"] = (
            "sup-norm form; 'sup' uses unit rate, 'sup_scaled' the scaling rate c"
        )
    outcome = OUTCOME_SATISFIED if tail_crossings > 0 else OUTCOME_VIOLATED
    return CriterionVerdict(criterion, t_star, outcome, evidence, (w0, w1), _base_params(series))


def classify_trichotomy(
    series: DiagnosticSeries,
    t_star: float,
    tol: float = 1e-3,
    window_frac: float = 0.2,
) -> CriterionVerdict:
    """Classifies the tail deficit into the three blow-up behaviors.

    case_i   the scaled deficit e = d*(t_star-t) repeatedly touches 0
             (or changes sign) within tol;
    case_ii  the deficit keeps its sign and |d| integrates finitely
             (fitted power of |d| in the gap below 1);
    case_iii positive deficit with divergent integral and growing Y.

    A negative deficit with divergent integral forces Y -> 0, which rules
    out blow-up at t_star; that and the excluded case_ii at the critical
    index (zero critical rate) return 'violated' with a non_blow_up flag.
    """
    law = scaling.series_law(series)
    _require_column(series, "trichotomy", law.alpha_column)
    _require_column(series, "trichotomy", "X")
    t = series.t
    d = scaling.deficit_values(series, t_star)
    y = scaling.y_values(series, t_star)
    gap = t_star - t
    e_scaled = d * gap
    w0, w1 = tail_window(len(series), window_frac)
    ew = e_scaled[w0:w1]
    dw = d[w0:w1]

    # A touch must be a genuine zero of the deficit relative to its own
    # window scale; an absolute tolerance would flag every integrable
    # deficit (whose scaled value decays to 0) as an equality sequence.
    e_scale = float(np.max(np.abs(ew))) if ew.size else 0.0
    touches = np.abs(ew) <= tol * e_scale
    n_touches = int(np.count_nonzero(touches))
    signs = np.sign(dw[~touches])
    n_flips = int(np.count_nonzero(np.diff(signs) != 0)) if signs.size > 1 else 0
    n_events = n_touches + n_flips

    # Rescaled log factor (window start pinned to gap 1/e) for the refined
    # smallness flag on the touching sequence.
    log_inv = 1.0 + np.log(gap[w0] / gap[w0:w1])
    min_e_log = float(np.min(np.abs(ew) * log_inv)) if ew.size else float("nan")

    evidence = {
        "n_touches": n_touches,
        "n_sign_flips": n_flips,
        "equality_tol": tol,
        "min_scaled_deficit_times_log": min_e_log,
        "y_first": float(y[w0]),
        "y_last": float(y[-1]),
    }
    params = _base_params(series)

    if n_events >= 2:
        evidence["refined_sequence"] = bool(min_e_log <= tol)
        return CriterionVerdict("trichotomy", t_star, CASE_I, evidence, (w0, w1), params)

    if signs.size and not np.all(signs == signs[0]):
        return CriterionVerdict(
            "trichotomy", t_star, OUTCOME_INCONCLUSIVE, evidence, (w0, w1), params
        )
    sign = float(signs[0]) if signs.size else 0.0
    evidence["deficit_sign"] = sign

    fit_mask = ~touches & (np.abs(dw) > 0)
    if np.count_nonzero(fit_mask) < 4:
        return CriterionVerdict(
            "trichotomy", t_star, OUTCOME_INCONCLUSIVE, evidence, (w0, w1), params
        )
    slope, r2 = _loglog_fit(
        np.log(gap[w0:w1][fit_mask]), np.log(np.abs(dw[fit_mask]))
    )
    q = -slope
    evidence["abs_deficit_gap_power"] = q
    evidence["fit_r2"] = r2
    evidence["abs_deficit_integral_tail"] = float(
        trapezoid(np.abs(dw), t[w0:w1])
    )

    convergent = q < 0.9 and r2 >= _FIT_R2
    divergent = q > 0.98 and r2 >= _FIT_R2
    if convergent:
        if law.critical_rate == 0.0:
            evidence["non_blow_up"] = True
            evidence["note"] = (
                "integrable deficit at the critical index implies regularity; "
                "the middle case is excluded"
            )
            return CriterionVerdict(
                "trichotomy", t_star, OUTCOME_VIOLATED, evidence, (w0, w1), params
            )
        evidence["y_limit_estimate"] = float(y[-1])
        evidence["refined_sequence"] = bool(min_e_log <= tol)
        return CriterionVerdict("trichotomy", t_star, CASE_II, evidence, (w0, w1), params)
    if divergent and sign > 0:
        evidence["y_growth"] = float(y[-1] / y[w0])
        return CriterionVerdict("trichotomy", t_star, CASE_III, evidence, (w0, w1), params)
    if divergent and sign < 0:
        evidence["non_blow_up"] = True
        evidence["y_to_zero"] = True
        return CriterionVerdict(
            "trichotomy", t_star, OUTCOME_VIOLATED, evidence, (w0, w1), params
        )
    return CriterionVerdict(
        "trichotomy", t_star, OUTCOME_INCONCLUSIVE, evidence, (w0, w1), params
    )


OSGOOD = "osgood"
NOT_OSGOOD = "not_osgood"


@dataclass
class OsgoodResult:
    outcome: str
    partial_integral: float
    decade_ratios: list[float]

    def to_dict(self) -> dict:
        return {
            "outcome": self.outcome,
            "partial_integral": self.partial_integral,
            "decade_ratios": self.decade_ratios,
        }


def osgood_check(
    g, s_max: float = 1e12, points_per_decade: int = 96
) -> OsgoodResult:
    """Tests integrability of 1/g on [1, infinity) from samples up to s_max.

    Integrates decade by decade on a geometric grid (Simpson in log s) and
    judges the tail: contributions c_m decaying faster than 1/m mean a
    convergent sum, a flat or growing sequence means divergence, anything
    unsettled at s_max is inconclusive.
    """
    n_decades = int(round(math.log10(s_max)))
    if n_decades < 3 or abs(math.log10(s_max) - n_decades) > 1e-9:
        raise ValueError("s_max must be a power of ten, at least 1e3")
    contributions = []
    for m in range(n_decades):
        s = np.geomspace(10.0**m, 10.0 ** (m + 1), points_per_decade + 1)
        g_vals = np.asarray(g(s), dtype=float)
        if np.any(~np.isfinite(g_vals)) or np.any(g_vals <= 0):
            raise ValueError("g must be positive and finite on [1, s_max]")
        contributions.append(float(simpson(s / g_vals, x=np.log(s))))
    ratios = [c * (m + 1) for m, c in enumerate(contributions)]
    tail = np.array(ratios[-min(5, len(ratios)):])
    nonincreasing = bool(np.all(np.diff(tail) <= 1e-12 + 1e-6 * tail[:-1]))
    nondecreasing = bool(np.all(np.diff(tail) >= -(1e-12 + 1e-6 * tail[:-1])))
    if ratios[-1] < 0.05 and nonincreasing:
        outcome = OSGOOD
    elif (nondecreasing and ratios[-1] > 0.05) or ratios[-1] > 10.0:
        outcome = NOT_OSGOOD
    else:
        outcome = OUTCOME_INCONCLUSIVE
    return OsgoodResult(outcome, float(np.sum(contributions)), ratios)


def osgood_weighted_integral(
    series: DiagnosticSeries,
    t_star: float,
    g,
    start_index: int | None = None,
    min_s: float = 1.0,
) -> float:
    """Trapezoid value of the deficit integral weighted by 1/g(log Y).

    The integrand is s'(t)/g(s(t)) with s = log Y, so by substitution the
    value equals the integral of 1/g over the traversed s range. Requires
    a positive deficit on the integration range (the divergent-growth
    case); by default integration starts where the trailing positive run
    begins and s first exceeds min_s.
    """
    law = scaling.series_law(series)
    t = series.t
    d = scaling.deficit_values(series, t_star)
    y = scaling.y_values(series, t_star)
    s_vals = np.log(y)
    if start_index is None:
        negative = np.nonzero(d < 0)[0]
        start_index = int(negative[-1]) + 1 if negative.size else 0
        above = np.nonzero(s_vals[start_index:] > min_s)[0]
        if above.size == 0:
            raise ValueError("log Y never exceeds min_s on the positive run")
        start_index += int(above[0])
    if np.any(d[start_index:] < 0):
        raise ValueError("deficit must be nonnegative on the integration range")
    if len(t) - start_index < 2:
        raise ValueError("not enough samples beyond start_index")
    g_vals = np.asarray(g(s_vals[start_index:]), dtype=float)
    if np.any(~np.isfinite(g_vals)) or np.any(g_vals <= 0):
        raise ValueError("g must be positive on the traversed range")
    integrand = law.norm_exponent * d[start_index:] / g_vals
    return float(trapezoid(integrand, t[start_index:]))


def representation_residual(series: DiagnosticSeries, t_star: float) -> float:
    """Max relative mismatch between Y(t) and its exponential representation.

    Y(t) = Y(t0) * exp(b * integral of the deficit) holds for any t_star
    beyond the series; the residual measures recording-quadrature and
    integration error (it is 0 by construction on synthetic fixtures).
    """
    law = scaling.series_law(series)
    t = series.t
    d = scaling.deficit_values(series, t_star)
    y = scaling.y_values(series, t_star)
    integral = cumulative_trapezoid(d, t, initial=0.0)
    predicted = y[0] * np.exp(law.norm_exponent * integral)
    return float(np.max(np.abs(y - predicted) / np.abs(predicted)))
