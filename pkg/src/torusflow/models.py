"""Flow models on the 2D torus and explicit time integration.

Three prognostic systems share one scalar-transport skeleton:
  - euler2d: vorticity form of incompressible Euler, v from Biot-Savart;
  - ns2d:    same advection plus nu * Laplacian;
  - sqg:     active scalar theta transported by v = (-R2 theta, R1 theta).

The nonlinear term is always 2/3-dealiased, so states that start inside
the truncated band stay there and quadratic invariants are conserved by
the spatial discretization (time integration is classical RK4).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from . import spectral
from .grid import Field


class Model(str, Enum):
    EULER_2D = "euler2d"
    NS_2D = "ns2d"
    SQG = "sqg"


@dataclass(frozen=True)
class FlowState:
    """Immutable snapshot of a prognostic scalar (vorticity or theta)."""

    model: Model
    field: Field
    nu: float = 0.0
    t: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "model", Model(self.model))
        if not self.field.is_scalar:
            raise ValueError("prognostic variable must be a scalar field")
        if self.field.grid.dim != 2:
            raise ValueError("time-dependent models are 2D only")
        if self.nu < 0:
            raise ValueError("viscosity must be >= 0")
        if self.nu != 0.0 and self.model is not Model.NS_2D:
            raise ValueError(f"nonzero viscosity invalid for model {self.model.value}")
        if self.model in (Model.EULER_2D, Model.NS_2D):
            mean = float(self.field.mean()[0])
            scale = max(float(np.max(np.abs(self.field.values))), 1.0)
            if abs(mean) > 1e-12 * scale:
                raise ValueError("vorticity must be mean-free")


@dataclass
class StepperConfig:
    """Time-integration settings; dt=None selects the CFL-bounded step."""

    t_end: float
    dt: float | None = None
    cfl_safety: float = 0.5
    dt_max: float | None = None
    record_every: int = 1

    def __post_init__(self):
        if self.t_end <= 0:
            raise ValueError("t_end must be positive")
        if self.dt is not None and self.dt <= 0:
            raise ValueError("dt must be positive")
        if not 0 < self.cfl_safety <= 1:
            raise ValueError("cfl_safety must lie in (0, 1]")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")


def sqg_velocity(theta: Field) -> Field:
    """Velocity (-R2 theta, R1 theta) of the active scalar."""
    if theta.grid.dim != 2 or not theta.is_scalar:
        raise ValueError("sqg_velocity expects a 2D scalar field")
    return Field.vector(
        theta.grid,
        (-spectral.riesz(theta, 1).values[0], spectral.riesz(theta, 0).values[0]),
    )


def velocity_of(state: FlowState) -> Field:
    """Divergence-free velocity associated with the prognostic variable."""
    if state.model is Model.SQG:
        return sqg_velocity(state.field)
    return spectral.biot_savart_2d(state.field)


def advection(v: Field, q: Field) -> Field:
    """Dealiased v . grad q."""
    grad_q = spectral.gradient(q)
    adv = np.zeros(q.grid.shape)
    for j in range(q.grid.dim):
        adv += v.values[j] * grad_q.values[j]
    return spectral.dealias_field(Field.scalar(q.grid, adv))


def rhs(state: FlowState) -> Field:
    """Time derivative of the prognostic variable."""
    v = velocity_of(state)
    out = -advection(v, state.field)
    if state.model is Model.NS_2D and state.nu != 0.0:
        out = out + state.nu * spectral.laplacian(state.field)
    return out


def nonlinear_term(v: Field) -> Field:
    """Dealiased advection term (v . grad) v for 2D or 3D velocity fields."""
    if not v.is_vector:
        raise ValueError("nonlinear_term expects a vector field")
    grid = v.grid
    grads = spectral.grad_components(v)  # (j, l, ...) = d_j v_l
    out = np.zeros((grid.dim,) + grid.shape)
    for l in range(grid.dim):
        for j in range(grid.dim):
            out[l] += v.values[j] * grads[j, l]
    return spectral.dealias_field(Field(grid, out))


def step_rk4(state: FlowState, dt: float) -> FlowState:
    """One classical Runge-Kutta step of size dt."""
    q0 = state.field
    k1 = rhs(state)
    k2 = rhs(replace(state, field=q0 + (0.5 * dt) * k1, t=state.t + 0.5 * dt))
    k3 = rhs(replace(state, field=q0 + (0.5 * dt) * k2, t=state.t + 0.5 * dt))
    k4 = rhs(replace(state, field=q0 + dt * k3, t=state.t + dt))
    q1 = q0 + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return replace(state, field=q1, t=state.t + dt)


def stable_dt(state: FlowState, cfg: StepperConfig) -> float:
    """CFL-bounded step from the current velocity (and viscosity if any)."""
    if cfg.dt is not None:
        return cfg.dt
    v = velocity_of(state)
    vmax = float(v.magnitude().max())
    grid = state.field.grid
    dt = cfg.cfl_safety * grid.spacing / max(vmax, 1e-12)
    if state.nu > 0:
        k_max = np.floor(grid.n / 3.0)
        dt = min(dt, cfg.cfl_safety * 2.8 / (state.nu * k_max**2))
    if cfg.dt_max is not None:
        dt = min(dt, cfg.dt_max)
    return dt


def run(state: FlowState, cfg: StepperConfig, recorder):
    """Integrate to cfg.t_end, recording diagnostics every record_every steps.

    A non-finite state aborts the run: the recorder is flagged
    blow-up-suspected and the series collected so far is returned.
    """
    t_end = state.t + cfg.t_end
    step = 0
    recorder.record(state)
    while state.t < t_end - 1e-12:
        dt = min(stable_dt(state, cfg), t_end - state.t)
        try:
            state = step_rk4(state, dt)
        except ValueError:
            # an intermediate stage lost finiteness mid-step
            recorder.mark_blowup_suspected(state.t)
            break
        step += 1
        if not state.field.is_finite():
            recorder.mark_blowup_suspected(state.t)
            break
        if step % cfg.record_every == 0:
            recorder.record(state)
    else:
        if step % cfg.record_every != 0:
            recorder.record(state)
    return recorder.series()
