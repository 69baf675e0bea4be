"""Diagnostics tests: growth rates, pointwise stretching, ratios, recorder."""

import math

import numpy as np
import pytest

from torusflow import diagnostics, initial, models, spectral
from torusflow.diagnostics import SeriesRecorder
from torusflow.grid import Field, Grid
from torusflow.models import FlowState, Model, StepperConfig
from torusflow.series import DiagnosticSample, DiagnosticSeries, SeriesParams


@pytest.fixture(scope="module")
def grid():
    return Grid(2, 64)


# ----------------------------------------------------------------------
# alpha_k


def test_alpha_k_taylor_green(grid):
    v = initial.taylor_green_velocity(grid)
    assert abs(diagnostics.alpha_k(v, 3)) < 1e-8


def test_alpha_k_zero_field(grid):
    v = Field.vector(grid, [np.zeros(grid.shape)] * 2)
    assert diagnostics.alpha_k(v, 3) == 0.0


def test_alpha_k_low_k_warns(grid):
    v = initial.taylor_green_velocity(grid)
    with pytest.warns(UserWarning):
        diagnostics.alpha_k(v, 2)


def test_alpha_k_matches_norm_growth(grid):
    omega = initial.random_smooth(grid, 51, slope=3.0, k_cutoff=8.0, amplitude=2.0)
    state = FlowState(Model.EULER_2D, omega)
    v = models.velocity_of(state)
    alpha = diagnostics.alpha_k(v, 3)
    dt = 1e-4
    fwd = models.step_rk4(state, dt)
    bwd = models.step_rk4(state, -dt)

    def norm(s):
        return spectral.dk_seminorm_l2(models.velocity_of(s), 3)

    fd = (math.log(norm(fwd)) - math.log(norm(bwd))) / (2 * dt)
    assert abs(alpha - fd) / abs(fd) < 1e-4


# ----------------------------------------------------------------------
# pointwise stretching rates


def test_alpha_local_planar_rotation_analogue():
    # v = (-sin x2, sin x1, 0): vorticity is (0, 0, cos x1 + cos x2), so the
    # direction is +-e3 and alpha = S_33 = 0 identically
    g = Grid(3, 16)
    x1, x2, _ = g.meshes()
    v = Field.vector(g, (-np.sin(x2), np.sin(x1), np.zeros(g.shape)))
    alpha = diagnostics.alpha_local(v)
    assert np.max(np.abs(alpha.values)) < 1e-12


def test_alpha_local_zero_field():
    g = Grid(3, 16)
    v = Field.vector(g, [np.zeros(g.shape)] * 3)
    assert np.max(np.abs(diagnostics.alpha_local(v).values)) == 0.0


def test_alpha_local_rejects_2d(grid):
    with pytest.raises(ValueError):
        diagnostics.alpha_local(initial.taylor_green_velocity(grid))


def test_alpha_local_bounded_by_gradient():
    g = Grid(3, 16)
    for seed in range(3):
        v = initial.random_divfree_velocity(g, 60 + seed, k_cutoff=3.0)
        sup_alpha = float(diagnostics.alpha_local(v).magnitude().max())
        assert sup_alpha <= diagnostics.grad_linf(v) + 1e-12


def test_alpha_hat_single_mode(grid):
    # theta = sin x1: the level tangent is +-e2 and S_22 = 0 identically
    theta = initial.sqg_single_mode(grid)
    assert np.max(np.abs(diagnostics.alpha_hat_local(theta).values)) < 1e-12


def test_alpha_hat_constant(grid):
    theta = Field.scalar(grid, np.full(grid.shape, 2.0))
    assert np.max(np.abs(diagnostics.alpha_hat_local(theta).values)) == 0.0


def test_alpha_hat_bounded_by_gradient(grid):
    for seed in range(3):
        theta = initial.random_smooth(grid, 70 + seed, slope=3.0)
        v = models.sqg_velocity(theta)
        sup_alpha = float(diagnostics.alpha_hat_local(theta).magnitude().max())
        assert sup_alpha <= diagnostics.grad_linf(v) + 1e-12


# ----------------------------------------------------------------------
# Lp growth rates


def test_gamma_2_vanishes(grid):
    v = spectral.biot_savart_2d(initial.random_smooth(grid, 52, slope=3.0))
    assert abs(diagnostics.gamma_p(v, 2.0)) < 1e-10


def test_delta_2_reduces_to_gradient_ratio(grid):
    v = spectral.biot_savart_2d(initial.random_smooth(grid, 53, slope=3.0))
    expected = (spectral.dk_seminorm_l2(v, 1) / spectral.lp_norm(v, 2)) ** 2
    assert diagnostics.delta_p(v, 2.0) == pytest.approx(expected, rel=1e-10)


def test_delta_p_nonnegative(grid):
    for seed in (54, 55):
        v = spectral.biot_savart_2d(initial.random_smooth(grid, seed, slope=3.0))
        for p in (2.0, 3.0, 4.0):
            assert diagnostics.delta_p(v, p) >= 0.0


@pytest.mark.parametrize("p", [2.0, 4.0])
def test_lambda_p_taylor_green(grid, p):
    nu = 0.01
    v = initial.taylor_green_velocity(grid)
    assert diagnostics.lambda_p(v, p, nu=nu) == pytest.approx(-2 * nu, abs=1e-6)


def test_lambda_p_matches_norm_growth(grid):
    nu = 0.02
    state = FlowState(
        Model.NS_2D, initial.random_smooth(grid, 56, slope=3.0), nu=nu
    )
    v = models.velocity_of(state)
    dt = 1e-4
    fwd = models.step_rk4(state, dt)
    bwd = models.step_rk4(state, -dt)
    for p in (2.0, 4.0):
        lam = diagnostics.lambda_p(v, p, nu=nu)
        fd = (
            math.log(spectral.lp_norm(models.velocity_of(fwd), p))
            - math.log(spectral.lp_norm(models.velocity_of(bwd), p))
        ) / (2 * dt)
        assert abs(lam - fd) / abs(fd) < 1e-4


def test_lp_growth_rate_zero_field(grid):
    v = Field.vector(grid, [np.zeros(grid.shape)] * 2)
    assert diagnostics.lp_growth_rate(v, 4.0, nu=1.0) == (0.0, 0.0, 0.0)


def test_lp_growth_rate_rejects_small_p(grid):
    v = initial.taylor_green_velocity(grid)
    with pytest.raises(ValueError):
        diagnostics.gamma_p(v, 1.5)


# ----------------------------------------------------------------------
# alpha_kp


def test_alpha_kp_steady(grid):
    assert abs(diagnostics.alpha_kp(initial.sqg_single_mode(grid), 3, 2.0)) < 1e-10


def test_alpha_kp_zero(grid):
    theta = Field.scalar(grid, np.zeros(grid.shape))
    assert diagnostics.alpha_kp(theta, 3, 2.0) == 0.0


@pytest.mark.parametrize("p", [2.0, 4.0])
def test_alpha_kp_matches_norm_growth(grid, p):
    theta = initial.random_smooth(grid, 57, slope=3.0, k_cutoff=6.0)
    state = FlowState(Model.SQG, theta)
    alpha = diagnostics.alpha_kp(theta, 3, p)
    dt = 1e-4
    fwd = models.step_rk4(state, dt)
    bwd = models.step_rk4(state, -dt)
    fd = (
        math.log(diagnostics.dk_norm_lp(fwd.field, 3, p))
        - math.log(diagnostics.dk_norm_lp(bwd.field, 3, p))
    ) / (2 * dt)
    assert abs(alpha - fd) / abs(fd) < 1e-4


# ----------------------------------------------------------------------
# series-level quantities


def _toy_series(model="euler2d", k=3, p=2.0):
    series = DiagnosticSeries(model=model, params=SeriesParams(k=k, p=p, N=2))
    return series


def test_scale_xy_homogeneity():
    series = _toy_series()
    b = 4 / 6  # (N+2)/(2k) for N=2, k=3
    for i, norm in enumerate((1.0, 2.0)):
        series.append(
            DiagnosticSample(t=float(i), alpha_k=0.0, dk_v_l2=norm, X=norm**b)
        )
    x, y = diagnostics.scale_xy(series, 3.0)
    assert x[1] / x[0] == pytest.approx(2.0**b, rel=1e-12)
    assert y[0] == pytest.approx(3.0 * x[0], rel=1e-12)
    with pytest.raises(ValueError):
        diagnostics.scale_xy(series, 1.0)  # inside the recorded range


def test_scale_xy_ns_critical_exponent_zero():
    series = DiagnosticSeries(model="ns2d", params=SeriesParams(k=3, p=2.0, N=2))
    series.append(DiagnosticSample(t=0.0, lambda_p=0.0, v_lp=1.7, X=1.7))
    series.append(DiagnosticSample(t=1.0, lambda_p=0.0, v_lp=1.7, X=1.7))
    _, y = diagnostics.scale_xy(series, 2.0)
    assert np.allclose(y, 1.7)


def test_bkm_integral_constant():
    series = _toy_series()
    for i in range(11):
        series.append(DiagnosticSample(t=i / 10, omega_linf=2.5))
    assert diagnostics.bkm_integral(series) == pytest.approx(2.5, rel=1e-12)


def test_bkm_integral_taylor_green_run(grid):
    state = FlowState(Model.EULER_2D, initial.taylor_green_vorticity(grid))
    rec = SeriesRecorder(k=3, p=2.0)
    series = models.run(state, StepperConfig(t_end=0.2, dt=0.01), rec)
    # steady solution: the max vorticity stays 2, so the integral is 2 t
    assert diagnostics.bkm_integral(series) == pytest.approx(0.4, rel=1e-8)


def test_serrin_integral_analytic_decay():
    nu, p, n_dim = 0.01, 4.0, 2
    series = DiagnosticSeries(model="ns2d", params=SeriesParams(k=3, p=p, N=n_dim))
    v0 = 1.3
    ts = np.linspace(0.0, 1.0, 201)
    for t in ts:
        v = v0 * math.exp(-2 * nu * t)
        series.append(DiagnosticSample(t=float(t), lambda_p=-2 * nu, v_lp=v, X=v))
    rate = 2 * p / (p - n_dim) * 2 * nu
    exact = v0 ** (2 * p / (p - n_dim)) * (1 - math.exp(-rate)) / rate
    assert diagnostics.serrin_integral(series) == pytest.approx(exact, rel=1e-5)
    with pytest.raises(ValueError):
        diagnostics.serrin_integral(series, p=2.0)  # p = N


def test_integrals_need_two_samples():
    series = _toy_series()
    series.append(DiagnosticSample(t=0.0, omega_linf=1.0))
    with pytest.raises(ValueError):
        diagnostics.bkm_integral(series)


# ----------------------------------------------------------------------
# inequality ratios


def test_commutator_ratio_constant_first_factor(grid):
    f = Field.scalar(grid, np.full(grid.shape, 2.0))
    g = initial.random_smooth(grid, 58, slope=3.0)
    assert diagnostics.commutator_ratio(f, g, 3, 2.0) == 0.0


def test_commutator_ratio_constant_second_factor(grid):
    # D^k(f c) - f D^k(c) = c D^k f, so the ratio is exactly 1
    f = initial.random_smooth(grid, 59, slope=3.0)
    g = Field.scalar(grid, np.full(grid.shape, -1.5))
    assert diagnostics.commutator_ratio(f, g, 3, 2.0) == pytest.approx(1.0, rel=1e-10)


def test_gn_ratio_single_mode_scaling(grid):
    x1 = grid.meshes()[0]
    ratios = []
    for mode in (1, 2, 4, 8):
        f = Field.scalar(grid, np.sin(mode * x1))
        ratios.append(diagnostics.gn_ratio(f, 3, 2.0))
    # exponents make the ratio scale exactly like 1/mode
    for a, b in zip(ratios, ratios[1:]):
        assert b / a == pytest.approx(0.5, rel=1e-6)


def test_gn_ratio_zero_field(grid):
    assert diagnostics.gn_ratio(Field.scalar(grid, np.zeros(grid.shape)), 3, 2.0) is None


# ----------------------------------------------------------------------
# recorder and persistence


def test_recorder_euler_columns(grid):
    state = FlowState(Model.EULER_2D, initial.taylor_green_vorticity(grid))
    rec = SeriesRecorder(k=3, p=2.0)
    series = models.run(state, StepperConfig(t_end=0.05, dt=0.01), rec)
    sample = series.samples[0]
    assert sample.alpha_k is not None and sample.dk_v_l2 is not None
    assert sample.X is not None and sample.omega_linf is not None
    assert sample.lambda_p is None and sample.alpha_kp is None
    assert series.meta["initial_norm"] == pytest.approx(
        spectral.lp_norm(initial.taylor_green_velocity(grid), 2), rel=1e-12
    )


def test_recorder_ns_columns(grid):
    state = FlowState(Model.NS_2D, initial.taylor_green_vorticity(grid), nu=0.01)
    rec = SeriesRecorder(k=3, p=4.0)
    series = models.run(state, StepperConfig(t_end=0.05, dt=0.01), rec)
    sample = series.samples[0]
    assert sample.gamma_p is not None and sample.delta_p is not None
    assert sample.lambda_p is not None and sample.X == sample.v_lp
    assert sample.alpha_k is None and sample.alpha_linf is None


def test_recorder_sqg_columns(grid):
    state = FlowState(Model.SQG, initial.sqg_single_mode(grid))
    rec = SeriesRecorder(k=3, p=2.0)
    series = models.run(state, StepperConfig(t_end=0.05, dt=0.01), rec)
    sample = series.samples[0]
    assert sample.alpha_kp is not None and sample.dk_theta_lp is not None
    assert sample.alpha_linf is not None
    assert sample.omega_linf is None and sample.lambda_p is None


def test_series_round_trip(tmp_path, grid):
    state = FlowState(Model.NS_2D, initial.taylor_green_vorticity(grid), nu=0.01)
    rec = SeriesRecorder(k=3, p=4.0, meta={"seed": 7})
    series = models.run(state, StepperConfig(t_end=0.05, dt=0.01), rec)
    series.write(tmp_path / "run")
    back = DiagnosticSeries.read(tmp_path / "run")
    assert back.model == "ns2d"
    assert back.params == series.params
    assert back.meta["seed"] == 7
    assert len(back) == len(series)
    for a, b in zip(series.samples, back.samples):
        assert a == b


def test_series_monotone_time():
    series = _toy_series()
    series.append(DiagnosticSample(t=0.0))
    with pytest.raises(ValueError):
        series.append(DiagnosticSample(t=0.0))


def test_lemma_bound_on_ns_run(grid):
    # recorded norm must stay inside the exp(+-integral |lambda_p|) envelope
    state = FlowState(Model.NS_2D, initial.taylor_green_vorticity(grid), nu=0.01)
    rec = SeriesRecorder(k=3, p=2.0)
    series = models.run(state, StepperConfig(t_end=0.5, dt=0.01), rec)
    t = series.t
    lam = series.column("lambda_p")
    v_lp = series.column("v_lp")
    steps = np.diff(t) * 0.5 * (np.abs(lam[1:]) + np.abs(lam[:-1]))
    envelope = np.concatenate([[0.0], np.cumsum(steps)])
    assert np.all(v_lp >= v_lp[0] * np.exp(-envelope) * (1 - 1e-4))
    assert np.all(v_lp <= v_lp[0] * np.exp(envelope) * (1 + 1e-4))
