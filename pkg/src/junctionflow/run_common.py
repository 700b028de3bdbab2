"""Shared time-stepping driver for all schemes.

Every stepper exposes ``state``, ``dt_max`` and ``step(dt) -> StepInfo``;
steppers that support characteristic tracing also expose ``char_speeds()``.
The driver owns the time loop: fixed steps at the stability bound (or the
scenario's explicit ``dt``), with the final step truncated to land exactly
on the horizon.
"""

from __future__ import annotations

import math

import numpy as np

from .core import Scenario, Trajectory
from .errors import CflViolation


def plan_steps(T: float, dt: float) -> list[float]:
    """Step sizes covering ``[0, T]`` exactly: full steps plus a remainder."""
    n_full = int(math.floor(T / dt + 1e-12))
    steps = [dt] * n_full
    remainder = T - n_full * dt
    if remainder > 1e-12 * max(dt, 1.0):
        steps.append(remainder)
    return steps


def drive(stepper, scenario: Scenario, record_fields: bool = False) -> Trajectory:
    """Run ``stepper`` to the horizon, collecting snapshots and the buffer."""
    dt = stepper.dt_max
    if scenario.dt is not None:
        if scenario.dt > stepper.dt_max * (1.0 + 1e-12):
            raise CflViolation(
                f"configured dt = {scenario.dt} exceeds the stability "
                f"bound {stepper.dt_max}"
            )
        dt = scenario.dt

    steps = plan_steps(scenario.T, dt)
    step_times = np.concatenate([[0.0], np.cumsum(steps)])
    if steps:
        step_times[-1] = scenario.T

    wanted = sorted(set(scenario.snapshots) | {scenario.T})
    snap_idx: dict[int, float] = {}
    for s in wanted:
        k = int(np.argmin(np.abs(step_times - s)))
        snap_idx.setdefault(k, step_times[k])

    records = None
    if record_fields:
        from .characteristics import RecordedRun

        records = RecordedRun(times=[], w1=[], w2=[], grid=scenario.grid)

    buffer_levels = [stepper.state.r]
    clamped = []
    snapshot_times: list[float] = []
    snaps1, snaps2 = [], []

    def take_snapshot(k: int):
        if k in snap_idx:
            snapshot_times.append(float(step_times[k]))
            snaps1.append(stepper.state.rho1.copy())
            snaps2.append(stepper.state.rho2.copy())

    take_snapshot(0)
    for k, h in enumerate(steps):
        if records is not None:
            w1, w2 = stepper.char_speeds()
            records.times.append(stepper.state.t)
            records.w1.append(w1)
            records.w2.append(w2)
        info = stepper.step(h)
        buffer_levels.append(stepper.state.r)
        clamped.append(info.clamped)
        take_snapshot(k + 1)

    if records is not None:
        records.seal()
    return Trajectory(
        scenario=scenario,
        times=step_times,
        buffer_levels=np.asarray(buffer_levels),
        snapshot_times=tuple(snapshot_times),
        snapshots1=snaps1,
        snapshots2=snaps2,
        clamped=np.asarray(clamped, dtype=bool),
        records=records,
    )
