"""Godunov solvers for the two candidate short-range limit models.

Both models evolve plain local conservation laws on each road and couple
them through junction fluxes plus a buffer ODE.  They differ only in the
coupling:

* ``local_herty``: classical supply/demand coupling; the road-1 outflow is
  capped by the buffer intake rate and the road's own demand, the road-2
  inflow by the buffer release rate and the road's supply.
* ``local_limit0``: the coupling inherited from the look-ahead model, where
  the admissible fluxes are built from the road-2 speed at the junction
  trace rather than from supply/demand.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    EPS_BUFFER,
    Scenario,
    SimState,
    StepInfo,
    Trajectory,
    VelocityFn,
    demand,
    local_flux,
    supply,
    velocity_eval,
)
from .errors import CflViolation


@dataclass(frozen=True)
class JunctionFluxes:
    """Junction outflow of road 1, inflow of road 2, and the buffer rate."""

    q1: float
    q2: float
    r_rate: float

    @classmethod
    def of(cls, q1: float, q2: float) -> "JunctionFluxes":
        return cls(q1, q2, q1 - q2)


def godunov_flux(v: VelocityFn, rho_left, rho_right):
    """Interface flux ``min(demand(left), supply(right))``."""
    return np.minimum(demand(v, rho_left), supply(v, rho_right))


def junction_coupling_herty(v1: VelocityFn, v2: VelocityFn,
                            rho1_trace: float, rho2_trace: float,
                            mu: float, r: float, r_max: float) -> JunctionFluxes:
    """Supply/demand junction coupling with buffer branching."""
    if r >= r_max - EPS_BUFFER:
        s_b = min(float(supply(v2, rho2_trace)), mu)
    else:
        s_b = mu
    if r > EPS_BUFFER:
        d_b = mu
    else:
        d_b = min(float(demand(v1, rho1_trace)), mu)
    q1 = min(s_b, float(demand(v1, rho1_trace)))
    q2 = min(d_b, float(supply(v2, rho2_trace)))
    return JunctionFluxes.of(q1, q2)


def junction_coupling_limit0(v1: VelocityFn, v2: VelocityFn,
                             rho1_trace: float, rho2_trace: float,
                             mu: float, r: float, r_max: float) -> JunctionFluxes:
    """Junction coupling of the short-range limit of the look-ahead model.

    Both admissible fluxes are built from the road-2 speed at the junction
    trace: road 1 may send ``rho1 * v2(rho2)``, road 2 may absorb
    ``rho_max2 * v2(rho2)``.
    """
    w = float(velocity_eval(v2, rho2_trace))
    if r >= r_max - EPS_BUFFER:
        s_b = min(v2.rho_max * w, mu)
    else:
        s_b = mu
    if r > EPS_BUFFER:
        d_b = mu
    else:
        d_b = min(rho1_trace * w, mu)
    q1 = min(s_b, rho1_trace * w)
    q2 = min(d_b, v2.rho_max * w)
    return JunctionFluxes.of(q1, q2)


COUPLINGS = {
    "local_herty": junction_coupling_herty,
    "local_limit0": junction_coupling_limit0,
}


def local_cfl_max_dt(v1: VelocityFn, v2: VelocityFn, dx: float,
                     safety: float = 0.9) -> float:
    """Stability bound for the Godunov scheme with linear speed laws."""
    return safety * dx / max(v1.v_max, v2.v_max)


class LocalStepper:
    """Godunov scheme on both roads with the selected junction coupling."""

    def __init__(self, scenario: Scenario):
        if scenario.model not in COUPLINGS:
            raise ValueError(f"not a local scenario: {scenario.model}")
        self.scenario = scenario
        self.grid = scenario.grid
        self.v1 = scenario.v1
        self.v2 = scenario.v2
        self.buffer = scenario.buffer
        self.coupling = COUPLINGS[scenario.model]
        self.state = scenario.initial_state()
        self.dt_max = local_cfl_max_dt(
            self.v1, self.v2, self.grid.dx, scenario.cfl_safety
        )

    def junction_fluxes(self) -> JunctionFluxes:
        return self.coupling(
            self.v1, self.v2,
            float(self.state.rho1[-1]), float(self.state.rho2[0]),
            self.buffer.mu, self.state.r, self.buffer.r_max,
        )

    def interface_fluxes(self):
        st = self.state
        jf = self.junction_fluxes()
        ghost_left = self.scenario.left_boundary_value
        if self.scenario.right_extension == "zero":
            ghost_right = 0.0
        else:
            ghost_right = float(st.rho2[-1])
        rho1e = np.concatenate([[ghost_left], st.rho1])
        f1 = np.empty(len(st.rho1) + 1)
        f1[:-1] = godunov_flux(self.v1, rho1e[:-1], rho1e[1:])
        f1[-1] = jf.q1
        rho2e = np.concatenate([st.rho2, [ghost_right]])
        f2 = np.empty(len(st.rho2) + 1)
        f2[0] = jf.q2
        f2[1:] = godunov_flux(self.v2, rho2e[:-1], rho2e[1:])
        return f1, f2

    def step(self, dt: float | None = None) -> StepInfo:
        if dt is None:
            dt = self.dt_max
        if dt > self.dt_max * (1.0 + 1e-12):
            raise CflViolation(
                f"dt = {dt} exceeds the stability bound {self.dt_max}"
            )
        st = self.state
        f1, f2 = self.interface_fluxes()
        lam = dt / self.grid.dx
        st.rho1 -= lam * (f1[1:] - f1[:-1])
        st.rho2 -= lam * (f2[1:] - f2[:-1])
        r_new = st.r + dt * (float(f1[-1]) - float(f2[0]))
        r_clamped = min(max(r_new, 0.0), self.buffer.r_max)
        clamped = r_clamped != r_new
        st.r = r_clamped
        st.t += dt
        return StepInfo(dt, float(f1[0]), float(f2[-1]), clamped)

    def char_speeds(self):
        """Flux-derivative speeds; only used for rough visual tracing."""
        s1 = self.v1.v_max * (1.0 - 2.0 * self.state.rho1 / self.v1.rho_max)
        s2 = self.v2.v_max * (1.0 - 2.0 * self.state.rho2 / self.v2.rho_max)
        return s1, s2


def step_local(stepper: LocalStepper, dt: float) -> SimState:
    stepper.step(dt)
    return stepper.state


def run_local(scenario: Scenario, record_fields: bool = False) -> Trajectory:
    """Run a local-model scenario to its horizon."""
    from .run_common import drive

    return drive(LocalStepper(scenario), scenario, record_fields=record_fields)
