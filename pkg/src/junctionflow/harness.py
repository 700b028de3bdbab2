"""Study drivers: single runs, look-ahead-range comparisons, grid-refinement
studies and characteristic tracing, each emitting deterministic CSV files.

All numbers are written with 17 significant digits, enough to round-trip a
double, so outputs are byte-stable across runs and diff-friendly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .characteristics import trace_characteristics
from .core import Scenario, Trajectory, l1_distance
from .errors import UnsupportedRegime, ValidationError
from .limit_infinity import (
    ExactBoxSolution,
    exact_supply_chain_riemann,
    run_limit_infinity,
    run_supply_chain,
)
from .local_solver import run_local
from .nonlocal_solver import run_nonlocal

RUNNERS = {
    "nonlocal": run_nonlocal,
    "local_herty": run_local,
    "local_limit0": run_local,
    "limit_infinity_case": run_limit_infinity,
    "supply_chain": run_supply_chain,
}

# Number of buffer samples written for closed-form (stepless) runs.
EXACT_BUFFER_SAMPLES = 1000


def fmt(x: float) -> str:
    """Fixed 17-significant-digit decimal formatting."""
    return format(float(x), ".17g")


def write_csv(path: Path, header: str, rows) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [header]
    lines.extend(",".join(fmt(v) for v in row) for row in rows)
    path.write_text("\n".join(lines) + "\n")
    return path


def exact_box_trajectory(scenario: Scenario) -> Trajectory:
    """Evaluate the closed-form box solution on the scenario grid.

    Mirrors the Trajectory layout of the steppers so comparisons and CSV
    emission treat exact references like any other run.
    """
    sol = ExactBoxSolution(
        scenario.init1.breaks[0], scenario.init1.breaks[-1],
        scenario.init1.values[0], scenario.buffer.mu, scenario.v2,
    )
    if scenario.buffer.r0 != 0.0 or math.isfinite(scenario.buffer.r_max):
        raise UnsupportedRegime("buffer must start empty and be unbounded")
    times = np.linspace(0.0, scenario.T, EXACT_BUFFER_SAMPLES + 1)
    levels = np.asarray([sol.buffer_level(t) for t in times])
    wanted = sorted(set(scenario.snapshots) | {scenario.T})
    snaps1, snaps2 = [], []
    for t in wanted:
        p1, p2, _ = sol.evaluate(t)
        snaps1.append(p1.cell_averages(scenario.grid.edges1()))
        snaps2.append(p2.cell_averages(scenario.grid.edges2()))
    return Trajectory(
        scenario=scenario, times=times, buffer_levels=levels,
        snapshot_times=tuple(wanted), snapshots1=snaps1, snapshots2=snaps2,
        clamped=np.zeros(0, dtype=bool),
    )


def run_scenario(scenario: Scenario, record_fields: bool = False) -> Trajectory:
    """Dispatch a scenario to its solver."""
    if scenario.model == "exact_box":
        return exact_box_trajectory(scenario)
    return RUNNERS[scenario.model](scenario, record_fields=record_fields)


def _out_path(base: str, out_dir: str | None) -> Path:
    p = Path(base)
    if out_dir is not None and not p.is_absolute():
        p = Path(out_dir) / p
    return p


def run_command(scenario: Scenario, out_dir: str | None = None) -> list[Path]:
    """Run one scenario and write its profile and buffer CSV files.

    Profiles go to one file per road per snapshot (``<stem>_road<e>_t<T>.csv``
    with header ``x,rho``); the buffer series goes to one file with header
    ``t,r`` sampled at every step.
    """
    traj = run_scenario(scenario)
    written = []
    stem = _out_path(scenario.outputs.profile_csv, out_dir)
    for k, t in enumerate(traj.snapshot_times):
        for road, (centers, rho) in enumerate(
            (
                (scenario.grid.centers1(), traj.snapshots1[k]),
                (scenario.grid.centers2(), traj.snapshots2[k]),
            ),
            start=1,
        ):
            path = stem.with_name(
                f"{stem.stem}_road{road}_t{format(t, 'g')}{stem.suffix}"
            )
            written.append(write_csv(path, "x,rho", zip(centers, rho)))
    buffer_path = _out_path(scenario.outputs.buffer_csv, out_dir)
    written.append(
        write_csv(buffer_path, "t,r", zip(traj.times, traj.buffer_levels))
    )
    return written


@dataclass(frozen=True)
class ComparisonRow:
    label: str
    eta: float | None
    l1_road1: float
    r_final: float


@dataclass
class ComparisonReport:
    """L1 distances of a family of runs against a common reference."""

    reference: str
    interval: tuple[float, float]
    rows: list[ComparisonRow]

    def row(self, label: str) -> ComparisonRow:
        for row in self.rows:
            if row.label == label:
                return row
        raise KeyError(label)


def _road1_restriction(traj: Trajectory, interval) -> np.ndarray:
    centers = traj.scenario.grid.centers1()
    mask = (centers >= interval[0]) & (centers <= interval[1])
    return traj.final_rho1[mask]


def _reference_scenario(base: Scenario, model: str) -> Scenario:
    return replace(base, model=model,
                   cfl_safety=base.cfl_safety if model == "nonlocal" else 0.9,
                   dt=None)


def compare_command(base: Scenario, etas, references,
                    interval: tuple[float, float] | None = None,
                    sort: str = "desc") -> ComparisonReport:
    """Run the look-ahead model per eta plus the requested reference models.

    The first reference is the one distances are measured against, over the
    road-1 ``interval`` (default: all of road 1).
    """
    if not references:
        raise ValidationError("references", "need at least one reference model")
    if interval is None:
        interval = (base.grid.x_left, 0.0)
    ref_trajs = {
        model: run_scenario(_reference_scenario(base, model))
        for model in references
    }
    ref = _road1_restriction(ref_trajs[references[0]], interval)
    rows = []
    etas = sorted(etas, reverse=(sort == "desc"))
    for eta in etas:
        traj = run_scenario(_reference_scenario(base, "nonlocal").with_eta(eta))
        rows.append(ComparisonRow(
            label=f"nonlocal_eta_{format(eta, 'g')}", eta=eta,
            l1_road1=l1_distance(_road1_restriction(traj, interval), ref,
                                 base.grid.dx),
            r_final=traj.final_buffer,
        ))
    for model in references:
        traj = ref_trajs[model]
        rows.append(ComparisonRow(
            label=model, eta=None,
            l1_road1=l1_distance(_road1_restriction(traj, interval), ref,
                                 base.grid.dx),
            r_final=traj.final_buffer,
        ))
    return ComparisonReport(reference=references[0], interval=interval,
                            rows=rows)


def write_comparison(report: ComparisonReport, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = ["label,eta,l1_road1,r_final"]
    for row in report.rows:
        eta = "" if row.eta is None else fmt(row.eta)
        lines.append(
            f"{row.label},{eta},{fmt(row.l1_road1)},{fmt(row.r_final)}"
        )
    path.write_text("\n".join(lines) + "\n")
    return path


def _exact_reference(scenario: Scenario, t: float):
    """Closed-form profiles at time ``t``, if the scenario has them."""
    if scenario.model == "supply_chain":
        rho_l = scenario.init1.values[-1]
        rho_r = scenario.init2.values[0]
        return exact_supply_chain_riemann(
            rho_l, rho_r, scenario.v1.v_max, scenario.buffer.mu,
            scenario.buffer.discharge_capacity, t,
            scenario.grid.x_left, scenario.grid.x_right,
        )[:2]
    if scenario.model in ("limit_infinity_case", "exact_box"):
        sol = ExactBoxSolution(
            scenario.init1.breaks[0], scenario.init1.breaks[-1],
            scenario.init1.values[0], scenario.buffer.mu, scenario.v2,
        )
        return sol.evaluate(t)[:2]
    return None


@dataclass(frozen=True)
class ConvergenceRow:
    dx: float
    l1_error: float
    order: float | None


def convergence_command(scenario: Scenario, dxs) -> list[ConvergenceRow]:
    """L1 errors against an exact or finest-grid reference per dx.

    Models with a closed-form solution (supply chain with one jump at the
    junction, capped-transport box data) are measured against it; anything
    else against the finest run restricted to each coarser grid, which
    requires the dx list to refine by powers of two.
    """
    dxs = sorted(dxs, reverse=True)
    runs = {}
    for dx in dxs:
        grid = replace(scenario.grid, dx=dx)
        runs[dx] = run_scenario(replace(scenario, grid=grid))
    exact = _exact_reference(scenario, scenario.T)

    def error(dx: float) -> float:
        traj = runs[dx]
        grid = traj.scenario.grid
        if exact is not None:
            ref1 = exact[0].cell_averages(grid.edges1())
            ref2 = exact[1].cell_averages(grid.edges2())
        else:
            fine = runs[dxs[-1]]
            factor = int(round(dx / dxs[-1]))
            if abs(factor * dxs[-1] - dx) > 1e-12:
                raise ValidationError(
                    "dx", "finest-reference mode needs power-of-two refinement"
                )
            ref1 = fine.final_rho1.reshape(-1, factor).mean(axis=1)
            ref2 = fine.final_rho2.reshape(-1, factor).mean(axis=1)
        return (l1_distance(traj.final_rho1, ref1, dx)
                + l1_distance(traj.final_rho2, ref2, dx))

    rows: list[ConvergenceRow] = []
    prev: ConvergenceRow | None = None
    for dx in dxs:
        err = error(dx)
        order = None
        if prev is not None and err > 0 and prev.l1_error > 0:
            order = math.log(prev.l1_error / err) / math.log(prev.dx / dx)
        prev = ConvergenceRow(dx=dx, l1_error=err, order=order)
        rows.append(prev)
    return rows


def write_convergence(rows, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = ["dx,l1_error,order"]
    for row in rows:
        order = "" if row.order is None else fmt(row.order)
        lines.append(f"{fmt(row.dx)},{fmt(row.l1_error)},{order}")
    path.write_text("\n".join(lines) + "\n")
    return path


def characteristics_command(scenario: Scenario, seed_xs, tracer_dt=None,
                            seed_t: float = 0.0,
                            out_dir: str | None = None) -> list[Path]:
    """Run with field recording and trace one curve per seed to CSV."""
    traj = run_scenario(scenario, record_fields=True)
    if tracer_dt is None:
        tracer_dt = float(np.min(np.diff(traj.times)))
    curves = trace_characteristics(
        traj.records, [(seed_t, x) for x in seed_xs], tracer_dt,
        t_end=scenario.T,
    )
    stem = _out_path(scenario.outputs.profile_csv, out_dir)
    written = []
    for k, curve in enumerate(curves):
        path = stem.with_name(f"{stem.stem}_char{k}{stem.suffix}")
        written.append(
            write_csv(path, "t,x", zip(curve.times, curve.positions))
        )
    return written
