"""Finite-volume scheme for the look-ahead junction model.

Drivers on road 1 move with a weighted average of downstream speeds: the part
contributed by road-1 traffic between them and the junction, plus the part
contributed by road-2 traffic within reach.  The buffer at the junction caps
what can flow across, and that cap is already felt upstream, weighted by the
kernel mass that lies beyond the junction.

Index conventions (cell order, left to right):
    * road-1 arrays have length ``m1``; entry ``m1 - 1`` is the cell touching
      the junction.
    * internal "table" arrays carry one extra leading entry for the Dirichlet
      ghost cell at the left edge of road 1.
    * ``q = m1 - p`` converts a table position ``p`` to the number of cells
      between that cell and the junction (``q = 0`` for the junction cell).

All stencil sums run over a fixed weight order, so repeated runs are
bit-identical.
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
    velocity_eval,
)
from .errors import CflViolation, GridMismatch
from .kernel import DiscreteKernel, build_discrete_kernel


@dataclass(frozen=True)
class NonlocalFields:
    """Per-step velocity and buffer-coupling tables.

    Attributes:
        v_ahead1: Same-road look-ahead speed on road-1 cells (exactly 0 at the
            junction cell, whose whole stencil lies beyond the junction).
        v_ahead2_road1: Road-2 look-ahead speed seen from road-1 cells.
        v_ahead2_road2: Road-2 look-ahead speed on road-2 cells.
        buffer_supply: Rate at which the buffer can accept road-1 flux, as
            seen from each road-1 cell (capacity times the kernel mass beyond
            the junction); 0 farther than ``eta`` from the junction.
        buffer_demand: Rate at which the buffer releases toward road 2.
        ghost_*: Same tables evaluated at the Dirichlet ghost cell left of
            road 1, used for the left-boundary inflow flux.
    """

    v_ahead1: np.ndarray
    v_ahead2_road1: np.ndarray
    v_ahead2_road2: np.ndarray
    buffer_supply: np.ndarray
    buffer_demand: float
    ghost_v_ahead1: float = 0.0
    ghost_v_ahead2: float = 0.0
    ghost_supply: float = 0.0


def _extension_speed(rho2: np.ndarray, v2: VelocityFn, right_extension: str) -> float:
    """Speed used for stencil cells beyond the right edge of road 2."""
    if right_extension == "zero":
        return float(velocity_eval(v2, 0.0))
    return float(velocity_eval(v2, rho2[-1]))


def _lookahead_tables(rho1, rho2, kernel, v1, v2, right_extension):
    """Ghost-extended look-ahead tables.

    Returns ``(a1, a2r1, a2r2)`` where ``a1`` and ``a2r1`` have length
    ``m1 + 1`` (ghost entry first) and ``a2r2`` has length ``m2``.
    """
    m1, m2 = len(rho1), len(rho2)
    n = kernel.n_eta
    gam, tail = kernel.gamma, kernel.tail
    w1 = velocity_eval(v1, rho1)
    w2 = velocity_eval(v2, rho2)
    ext = _extension_speed(rho2, v2, right_extension)

    # Same-road part: each cell averages road-1 speeds strictly ahead of it,
    # truncated at the junction (zero padding keeps the truncation exact).
    k1 = min(n, m1)
    a1 = np.correlate(np.concatenate([w1, np.zeros(k1)]), gam[:k1], mode="valid")

    # Cross-road part at road-1 positions: a cell q cells before the junction
    # reads the weights starting at index q, so only q < n sees road 2 at
    # all.  Stencil cells beyond the right edge of road 2 collapse into one
    # suffix-sum term at the extension speed.
    qmax = min(n, m1)
    w2_near = w2[: min(m2, n)]
    gam_ext = np.zeros(qmax + len(w2_near))
    take = min(n, len(gam_ext))
    gam_ext[:take] = gam[:take]
    by_q = np.zeros(m1 + 1)
    by_q[: qmax + 1] = np.correlate(gam_ext, w2_near, mode="valid")
    tail_idx = np.minimum(m2 + np.arange(m1 + 1), n)
    a2r1 = (by_q + tail[tail_idx] * ext)[::-1]

    # Cross-road part on road 2 itself: plain downstream average with the
    # same out-of-domain tail treatment.
    k2 = min(n, m2)
    a2r2 = np.correlate(np.concatenate([w2, np.zeros(k2)])[1:], gam[:k2],
                        mode="valid")
    a2r2 = a2r2 + tail[np.minimum(m2 - 1 - np.arange(m2), n)] * ext
    return a1, a2r1, a2r2


def nonlocal_velocities(state: SimState, kernel: DiscreteKernel,
                        v1: VelocityFn, v2: VelocityFn,
                        right_extension: str = "constant_extrapolation"):
    """Look-ahead velocity parts for every cell.

    Returns ``(v_ahead1, v_ahead2)`` where ``v_ahead1`` covers road-1 cells
    and ``v_ahead2`` covers road-1 then road-2 cells.
    """
    a1, a2r1, a2r2 = _lookahead_tables(
        state.rho1, state.rho2, kernel, v1, v2, right_extension
    )
    return a1[1:], np.concatenate([a2r1[1:], a2r2])


def buffer_supply_profile(kernel: DiscreteKernel, mu: float, r: float,
                          r_max: float, v_ahead2_road1: np.ndarray,
                          rho_max2: float) -> np.ndarray:
    """Buffer intake rate seen from each road-1 cell.

    Below capacity the rate is ``mu`` times the kernel mass beyond the
    junction; at ``r_max`` it is additionally capped by what road 2 can
    absorb.  Accepts the ghost-extended table as well (the last entry must be
    the junction cell).
    """
    m = len(v_ahead2_road1)
    q = np.minimum(np.arange(m - 1, -1, -1), kernel.n_eta)
    base = mu * kernel.tail[q]
    if r >= r_max - EPS_BUFFER:
        return np.minimum(rho_max2 * v_ahead2_road1, base)
    return base


def buffer_demand(rho1_junction: float, mu: float, r: float,
                  v_ahead2_junction: float) -> float:
    """Buffer release rate toward road 2.

    ``mu`` whenever the buffer holds anything; when empty, it can only pass
    through what road 1 delivers.
    """
    if r > EPS_BUFFER:
        return mu
    return min(rho1_junction * v_ahead2_junction, mu)


def compute_fields(state: SimState, kernel: DiscreteKernel, v1: VelocityFn,
                   v2: VelocityFn, mu: float, r_max: float,
                   right_extension: str = "constant_extrapolation",
                   ) -> NonlocalFields:
    """All coupling tables for one state, including the ghost entries."""
    a1, a2r1, a2r2 = _lookahead_tables(
        state.rho1, state.rho2, kernel, v1, v2, right_extension
    )
    sup = buffer_supply_profile(kernel, mu, state.r, r_max, a2r1, v2.rho_max)
    dem = buffer_demand(float(state.rho1[-1]), mu, state.r, float(a2r1[-1]))
    return NonlocalFields(
        v_ahead1=a1[1:],
        v_ahead2_road1=a2r1[1:],
        v_ahead2_road2=a2r2,
        buffer_supply=sup[1:],
        buffer_demand=dem,
        ghost_v_ahead1=float(a1[0]),
        ghost_v_ahead2=float(a2r1[0]),
        ghost_supply=float(sup[0]),
    )


def numerical_fluxes(state: SimState, fields: NonlocalFields, *,
                     rho_max2: float, left_boundary_value: float = 0.0):
    """Fluxes at every interface of both roads.

    Returns ``(f1, f2)``:
        * ``f1`` has length ``m1 + 1``; ``f1[0]`` is the inflow at the left
          edge of road 1 (Dirichlet ghost value, first interior stencil) and
          ``f1[-1]`` the junction outflow of road 1, which doubles as the
          buffer intake.
        * ``f2`` has length ``m2 + 1``; ``f2[0]`` is the junction inflow onto
          road 2 (buffer release capped by what road 2 can absorb).
    """
    if len(fields.v_ahead1) != len(state.rho1):
        raise GridMismatch("fields were built for a different grid")
    rho_ext = np.concatenate([[left_boundary_value], state.rho1])
    ahead1 = np.concatenate([[fields.ghost_v_ahead1], fields.v_ahead1])
    ahead2 = np.concatenate([[fields.ghost_v_ahead2], fields.v_ahead2_road1])
    sup = np.concatenate([[fields.ghost_supply], fields.buffer_supply])
    f1 = rho_ext * ahead1 + np.minimum(rho_ext * ahead2, sup)
    inflow2 = min(fields.buffer_demand,
                  rho_max2 * float(fields.v_ahead2_road1[-1]))
    f2 = np.concatenate([[inflow2], state.rho2 * fields.v_ahead2_road2])
    return f1, f2


def cfl_max_dt(kernel: DiscreteKernel, v1: VelocityFn, v2: VelocityFn,
               dx: float, safety: float = 1.0) -> float:
    """Largest stable time step for the look-ahead scheme.

    The bound involves the leading kernel weight, the steepest velocity
    slope, the largest density cap and twice the largest speed; it does not
    degrade as ``eta`` grows.
    """
    v_norm = max(v1.v_max, v2.v_max)
    slope_norm = max(v1.v_max / v1.rho_max, v2.v_max / v2.rho_max)
    rho_norm = max(v1.rho_max, v2.rho_max)
    gamma0 = float(kernel.gamma[0])
    return safety * dx / (gamma0 * slope_norm * rho_norm + 2.0 * v_norm)


class NonlocalStepper:
    """Owns the state of one run of the look-ahead scheme."""

    def __init__(self, scenario: Scenario):
        if scenario.model != "nonlocal":
            raise ValueError(f"not a nonlocal scenario: {scenario.model}")
        if scenario.kernel is None:
            raise ValueError("nonlocal scenario requires a kernel")
        self.scenario = scenario
        self.grid = scenario.grid
        self.kernel = build_discrete_kernel(scenario.kernel, self.grid.dx)
        self.v1 = scenario.v1
        self.v2 = scenario.v2
        self.buffer = scenario.buffer
        self.state = scenario.initial_state()
        self.dt_max = cfl_max_dt(
            self.kernel, self.v1, self.v2, self.grid.dx, scenario.cfl_safety
        )

    def fields(self) -> NonlocalFields:
        return compute_fields(
            self.state, self.kernel, self.v1, self.v2,
            self.buffer.mu, self.buffer.r_max, self.scenario.right_extension,
        )

    def step(self, dt: float | None = None) -> StepInfo:
        """Advance one time step; buffer by explicit Euler, then clamp."""
        if dt is None:
            dt = self.dt_max
        if dt > self.dt_max * (1.0 + 1e-12):
            raise CflViolation(
                f"dt = {dt} exceeds the stability bound {self.dt_max}"
            )
        st = self.state
        fields = self.fields()
        f1, f2 = numerical_fluxes(
            st, fields, rho_max2=self.v2.rho_max,
            left_boundary_value=self.scenario.left_boundary_value,
        )
        lam = dt / self.grid.dx
        st.rho1 -= lam * (f1[1:] - f1[:-1])
        st.rho2 -= lam * (f2[1:] - f2[:-1])
        # The buffer gains exactly the junction outflow of road 1 and loses
        # exactly the junction inflow of road 2, so interior mass telescopes.
        r_new = st.r + dt * (float(f1[-1]) - float(f2[0]))
        r_clamped = min(max(r_new, 0.0), self.buffer.r_max)
        clamped = r_clamped != r_new
        st.r = r_clamped
        st.t += dt
        return StepInfo(dt, float(f1[0]), float(f2[-1]), clamped)

    def char_speeds(self):
        """Characteristic speeds per cell for the current state.

        On road 1 the speed is the full look-ahead average while the buffer
        can still take the local flux, and only the same-road part once it
        cannot; on road 2 it is the look-ahead average itself.
        """
        fields = self.fields()
        free = (self.state.rho1 * fields.v_ahead2_road1
                <= fields.buffer_supply)
        w1 = np.where(free, fields.v_ahead1 + fields.v_ahead2_road1,
                      fields.v_ahead1)
        return w1, fields.v_ahead2_road2.copy()


def step_nonlocal(stepper: NonlocalStepper, dt: float) -> SimState:
    """Advance ``stepper`` by ``dt`` and return the updated state."""
    stepper.step(dt)
    return stepper.state


def run_nonlocal(scenario: Scenario, record_fields: bool = False) -> Trajectory:
    """Run a nonlocal scenario to its horizon.

    Steps at the stability bound (scaled by ``cfl_safety``), truncating the
    final step to land exactly on ``T``.  Snapshot times are snapped to the
    nearest completed step; a snapshot at ``T`` is always taken.
    """
    from .run_common import drive

    return drive(NonlocalStepper(scenario), scenario,
                 record_fields=record_fields)
