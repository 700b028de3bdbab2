"""Tracing of characteristic curves through stored velocity fields.

A run can record, at every step, the per-cell characteristic speed of each
road.  Tracing is explicit Euler against those records: the speed at
``(tau, x)`` is the value of the containing cell at the most recent record
at or before ``tau`` (piecewise constant in both space and time).  A road-1
curve that reaches the junction continues on road 2; the crossing time is
flagged on the trajectory.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import RoadGrid, SimState
from .errors import OutOfDomain
from .nonlocal_solver import NonlocalFields


def char_velocity(state: SimState, fields: NonlocalFields, x: float,
                  road: int, grid: RoadGrid) -> float:
    """Characteristic speed at position ``x`` of the given road.

    On road 1 the curve moves with the full look-ahead average while the
    buffer can absorb the local flux there, and with the same-road part only
    once it cannot; on road 2 it moves with the look-ahead average itself.
    """
    if road == 1:
        if not grid.x_left <= x <= 0.0:
            raise OutOfDomain(f"x = {x} is not on road 1")
        i = min(int((x - grid.x_left) / grid.dx), grid.m1 - 1)
        if state.rho1[i] * fields.v_ahead2_road1[i] <= fields.buffer_supply[i]:
            return float(fields.v_ahead1[i] + fields.v_ahead2_road1[i])
        return float(fields.v_ahead1[i])
    if road == 2:
        if not 0.0 <= x <= grid.x_right:
            raise OutOfDomain(f"x = {x} is not on road 2")
        j = min(int(x / grid.dx), grid.m2 - 1)
        return float(fields.v_ahead2_road2[j])
    raise OutOfDomain(f"unknown road {road}")


@dataclass
class RecordedRun:
    """Per-step characteristic speed fields of a completed run."""

    times: list
    w1: list
    w2: list
    grid: RoadGrid
    _times: np.ndarray = field(default=None, repr=False)

    def seal(self):
        self._times = np.asarray(self.times)

    def speed(self, tau: float, x: float, road: int) -> float:
        """Piecewise-constant lookup at the most recent record before tau."""
        k = int(np.searchsorted(self._times, tau, side="right")) - 1
        k = max(0, min(k, len(self.times) - 1))
        g = self.grid
        if road == 1:
            i = min(int((x - g.x_left) / g.dx), g.m1 - 1)
            return float(self.w1[k][max(i, 0)])
        j = min(int(x / g.dx), g.m2 - 1)
        return float(self.w2[k][max(j, 0)])

    @property
    def t_end(self) -> float:
        return float(self._times[-1])


@dataclass
class CharTrajectory:
    """One traced curve: seed, polyline and how it ended."""

    seed_t: float
    seed_x: float
    seed_road: int
    times: np.ndarray
    positions: np.ndarray
    reason: str
    crossed_at: float | None = None


def trace_characteristics(recorded: RecordedRun, seeds, dt: float,
                          t_end: float | None = None) -> list[CharTrajectory]:
    """Euler-trace one curve per seed through the recorded fields.

    Seeds are ``(t0, x0)`` pairs; the road is inferred from the sign of
    ``x0`` (negative: road 1).  Tracing stops at ``t_end`` (default: the
    last recorded time plus one tracer step) or when the curve leaves the
    right edge of road 2.
    """
    grid = recorded.grid
    horizon = recorded.t_end if t_end is None else t_end
    out = []
    for t0, x0 in seeds:
        road = 1 if x0 < 0.0 else 2
        if road == 1 and not grid.x_left <= x0 <= 0.0:
            raise OutOfDomain(f"seed x = {x0} is not on road 1")
        if road == 2 and not 0.0 <= x0 <= grid.x_right:
            raise OutOfDomain(f"seed x = {x0} is not on road 2")
        times = [t0]
        positions = [x0]
        crossed = None
        reason = "reached_horizon"
        tau, x = t0, x0
        while tau < horizon - 1e-14:
            h = min(dt, horizon - tau)
            x = x + h * recorded.speed(tau, x, road)
            tau = tau + h
            if road == 1 and x >= 0.0:
                road = 2
                crossed = tau
            times.append(tau)
            positions.append(x)
            if road == 2 and x >= grid.x_right:
                reason = "left_domain"
                break
        out.append(CharTrajectory(
            seed_t=t0, seed_x=x0, seed_road=1 if x0 < 0.0 else 2,
            times=np.asarray(times), positions=np.asarray(positions),
            reason=reason, crossed_at=crossed,
        ))
    return out
