"""Flow-model tests: velocities, steady states, RK4 accuracy, runs, presets."""

import math

import numpy as np
import pytest

from torusflow import initial, models, spectral
from torusflow.grid import Field, Grid
from torusflow.models import FlowState, Model, StepperConfig


@pytest.fixture(scope="module")
def grid():
    return Grid(2, 64)


class NormRecorder:
    """Bare-bones recorder keeping states for the tests below."""

    def __init__(self):
        self.states = []
        self.blowup = None

    def record(self, state):
        self.states.append(state)

    def mark_blowup_suspected(self, t):
        self.blowup = t

    def series(self):
        return self.states


# ----------------------------------------------------------------------
# state validation


def test_state_validation(grid):
    omega = initial.taylor_green_vorticity(grid)
    with pytest.raises(ValueError):
        FlowState(Model.EULER_2D, omega, nu=0.1)
    with pytest.raises(ValueError):
        FlowState(Model.EULER_2D, Field.scalar(grid, np.ones(grid.shape)))  # mean
    FlowState(Model.NS_2D, omega, nu=0.1)
    with pytest.raises(ValueError):
        FlowState(Model.SQG, initial.taylor_green_velocity(grid))  # vector


def test_stepper_config_validation():
    with pytest.raises(ValueError):
        StepperConfig(t_end=0.0)
    with pytest.raises(ValueError):
        StepperConfig(t_end=1.0, cfl_safety=0.0)
    with pytest.raises(ValueError):
        StepperConfig(t_end=1.0, record_every=0)


# ----------------------------------------------------------------------
# velocities


def test_velocity_sqg_single_mode(grid):
    x1, _ = grid.meshes()
    state = FlowState(Model.SQG, initial.sqg_single_mode(grid))
    v = models.velocity_of(state)
    assert np.max(np.abs(v.values[0])) < 1e-13
    assert np.max(np.abs(v.values[1] - np.cos(x1))) < 1e-12


def test_velocity_euler_zero(grid):
    state = FlowState(Model.EULER_2D, Field.scalar(grid, np.zeros(grid.shape)))
    assert np.max(np.abs(models.velocity_of(state).values)) == 0.0


def test_velocity_euler_curl_round_trip(grid):
    x1, x2 = grid.meshes()
    omega = Field.scalar(grid, 2 * np.sin(x1) * np.sin(x2))
    state = FlowState(Model.EULER_2D, omega)
    v = models.velocity_of(state)
    assert np.max(np.abs(spectral.curl_2d(v).values - omega.values)) < 1e-10
    assert np.max(np.abs(spectral.divergence(v).values)) < 1e-10


# ----------------------------------------------------------------------
# right-hand sides


def test_rhs_steady_sqg(grid):
    state = FlowState(Model.SQG, initial.sqg_single_mode(grid))
    assert spectral.lp_norm(models.rhs(state), np.inf) < 1e-10


def test_rhs_steady_taylor_green(grid):
    state = FlowState(Model.EULER_2D, initial.taylor_green_vorticity(grid))
    assert spectral.lp_norm(models.rhs(state), np.inf) < 1e-10


def test_rhs_zero_field(grid):
    state = FlowState(Model.EULER_2D, Field.scalar(grid, np.zeros(grid.shape)))
    assert np.max(np.abs(models.rhs(state).values)) == 0.0


@pytest.mark.parametrize("model,seed", [(Model.EULER_2D, 31), (Model.SQG, 32)])
def test_rhs_orthogonal_to_state(grid, model, seed):
    # transport conserves the quadratic integral of the prognostic variable
    q = initial.random_smooth(grid, seed, slope=3.0)
    state = FlowState(model, q)
    out = models.rhs(state)
    inner = np.sum(out.values * q.values) * grid.cell_volume
    scale = spectral.lp_norm(out, 2) * spectral.lp_norm(q, 2)
    assert abs(inner) < 1e-8 * max(scale, 1e-30)


# ----------------------------------------------------------------------
# nonlinear term


def test_nonlinear_term_taylor_green_is_gradient(grid):
    v = initial.taylor_green_velocity(grid)
    projected = spectral.leray_project(models.nonlinear_term(v))
    assert np.max(np.abs(projected.values)) < 1e-8


def test_nonlinear_term_zero(grid):
    v = Field.vector(grid, [np.zeros(grid.shape)] * 2)
    assert np.max(np.abs(models.nonlinear_term(v).values)) == 0.0


def test_nonlinear_term_3d_taylor_green():
    # hand-derived: (v.grad)v = (-sin(2x1) sin^2(x3)/2, -sin(2x2) sin^2(x3)/2, 0)
    g = Grid(3, 16)
    x1, x2, x3 = g.meshes()
    v = Field.vector(
        g,
        (
            np.cos(x1) * np.sin(x2) * np.sin(x3),
            -np.sin(x1) * np.cos(x2) * np.sin(x3),
            np.zeros(g.shape),
        ),
    )
    out = models.nonlinear_term(v)
    expected = np.stack(
        (
            -0.5 * np.sin(2 * x1) * np.sin(x3) ** 2,
            -0.5 * np.sin(2 * x2) * np.sin(x3) ** 2,
            np.zeros(g.shape),
        )
    )
    assert np.max(np.abs(out.values - expected)) < 1e-8


# ----------------------------------------------------------------------
# time stepping


def test_steady_states_fixed_points(grid):
    for state in (
        FlowState(Model.EULER_2D, initial.taylor_green_vorticity(grid)),
        FlowState(Model.SQG, initial.sqg_single_mode(grid)),
    ):
        current = state
        for _ in range(100):
            current = models.step_rk4(current, 0.01)
        drift = np.max(np.abs(current.field.values - state.field.values))
        assert drift < 1e-8


def test_ns_taylor_green_decay(grid):
    nu = 0.01
    state = FlowState(Model.NS_2D, initial.taylor_green_vorticity(grid), nu=nu)
    t_end = 1.0
    steps = 100
    for _ in range(steps):
        state = models.step_rk4(state, t_end / steps)
    expected = initial.taylor_green_vorticity(grid).values * math.exp(-2 * nu * t_end)
    assert np.max(np.abs(state.field.values - expected)) < 1e-6


def test_rk4_convergence_order():
    g = Grid(2, 32)
    omega = initial.random_smooth(g, 33, slope=3.0, k_cutoff=4.0, amplitude=2.0)
    state = FlowState(Model.EULER_2D, omega)
    t_end = 0.2

    def advance(dt):
        s = state
        for _ in range(round(t_end / dt)):
            s = models.step_rk4(s, dt)
        return s.field.values

    ref = advance(t_end / 64)
    err_coarse = np.max(np.abs(advance(t_end / 8) - ref))
    err_fine = np.max(np.abs(advance(t_end / 16) - ref))
    ratio = err_coarse / err_fine
    assert 12 < ratio < 20


def test_stable_dt_cfl(grid):
    state = FlowState(Model.EULER_2D, initial.taylor_green_vorticity(grid))
    cfg = StepperConfig(t_end=1.0, cfl_safety=0.5)
    dt = models.stable_dt(state, cfg)
    vmax = float(models.velocity_of(state).magnitude().max())
    assert dt * vmax / grid.spacing <= cfg.cfl_safety + 1e-12
    fixed = StepperConfig(t_end=1.0, dt=0.003)
    assert models.stable_dt(state, fixed) == 0.003


def test_run_records_and_reaches_t_end(grid):
    state = FlowState(Model.EULER_2D, initial.taylor_green_vorticity(grid))
    rec = NormRecorder()
    states = models.run(state, StepperConfig(t_end=0.1, dt=0.01, record_every=2), rec)
    times = [s.t for s in states]
    assert times[0] == 0.0
    assert times[-1] == pytest.approx(0.1, abs=1e-12)
    assert all(b > a for a, b in zip(times, times[1:]))


def test_run_aborts_on_blowup(grid):
    omega = initial.random_smooth(grid, 34, slope=2.5, amplitude=50.0)
    state = FlowState(Model.EULER_2D, omega)
    rec = NormRecorder()
    with np.errstate(all="ignore"):
        models.run(state, StepperConfig(t_end=50.0, dt=5.0), rec)
    assert rec.blowup is not None


# ----------------------------------------------------------------------
# initial conditions and raw grid files


def test_taylor_green_consistency(grid):
    omega = initial.taylor_green_vorticity(grid)
    v = initial.taylor_green_velocity(grid)
    assert np.max(np.abs(spectral.curl_2d(v).values - omega.values)) < 1e-12


def test_random_smooth_properties(grid):
    f = initial.random_smooth(grid, 35, slope=3.0, amplitude=1.7)
    assert spectral.lp_norm(f, 2) == pytest.approx(1.7, rel=1e-12)
    assert abs(f.mean()[0]) < 1e-14
    coef = spectral.transform(f).coefficients
    scale = np.max(np.abs(coef))
    assert np.max(np.abs(coef[:, ~grid.dealias_mask])) < 1e-14 * scale
    again = initial.random_smooth(grid, 35, slope=3.0, amplitude=1.7)
    assert np.array_equal(f.values, again.values)


def test_random_divfree_velocity(grid):
    v = initial.random_divfree_velocity(grid, 36)
    assert v.is_vector
    assert np.max(np.abs(spectral.divergence(v).values)) < 1e-10
    assert spectral.lp_norm(v, 2) == pytest.approx(1.0, rel=1e-12)


def test_grid_file_round_trip(tmp_path, grid):
    field = initial.random_divfree_velocity(grid, 37)
    path = tmp_path / "field.f64"
    initial.write_field(path, field)
    back = initial.read_field(path)
    assert back.grid == grid
    assert np.array_equal(back.values, field.values)


def test_grid_file_truncated(tmp_path):
    path = tmp_path / "bad.f64"
    path.write_bytes(b"\x02\x00\x00\x00")
    with pytest.raises(ValueError):
        initial.read_field(path)
