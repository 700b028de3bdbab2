"""Shared vocabulary of all solvers: velocity laws, flux primitives, grids,
states, piecewise-constant profiles and scenario descriptions.

The junction sits at ``x = 0``.  Road 1 occupies ``[x_left, 0]``, road 2
occupies ``[0, x_right]``, and ``x = 0`` is always a cell interface.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import GridMismatch, NonCommensurateGrid
from .kernel import KernelSpec

MODELS = (
    "nonlocal",
    "local_herty",
    "local_limit0",
    "limit_infinity_case",
    "supply_chain",
    "exact_box",
)

RIGHT_EXTENSIONS = ("constant_extrapolation", "zero")

# Buffer levels within this distance of 0 or r_max switch the empty/full
# coupling branches; keeps explicit Euler from chattering on roundoff.
EPS_BUFFER = 1e-12


@dataclass(frozen=True)
class VelocityFn:
    """Linear speed law ``v(rho) = v_max * (1 - rho / rho_max)``, floored at 0."""

    v_max: float
    rho_max: float

    @property
    def sigma(self) -> float:
        """Density at which the flux ``rho * v(rho)`` peaks."""
        return 0.5 * self.rho_max


def velocity_eval(v: VelocityFn, rho):
    """Speed at density ``rho``; never negative, 0 at and above ``rho_max``."""
    return np.maximum(0.0, v.v_max * (1.0 - rho / v.rho_max))


def local_flux(v: VelocityFn, rho):
    """Flux ``rho * v(rho)``."""
    return rho * velocity_eval(v, rho)


def demand(v: VelocityFn, rho):
    """Largest flux the road can send from state ``rho`` (increasing branch)."""
    return local_flux(v, np.minimum(rho, v.sigma))


def supply(v: VelocityFn, rho):
    """Largest flux the road can receive at state ``rho`` (decreasing branch)."""
    return local_flux(v, np.maximum(rho, v.sigma))


@dataclass(frozen=True)
class RoadGrid:
    """Uniform cell grid for the two roads meeting at ``x = 0``.

    Both road lengths must be integer multiples of ``dx``; edge positions are
    constructed from integer multiples of ``dx`` so the junction interface is
    exactly 0.
    """

    x_left: float
    x_right: float
    dx: float
    m1: int = field(init=False)
    m2: int = field(init=False)

    def __post_init__(self):
        if not self.dx > 0:
            raise NonCommensurateGrid(f"dx must be positive, got {self.dx}")
        if not (self.x_left < 0.0 < self.x_right):
            raise NonCommensurateGrid(
                f"roads must satisfy x_left < 0 < x_right, got "
                f"[{self.x_left}, {self.x_right}]"
            )
        for name, length in (("x_left", -self.x_left), ("x_right", self.x_right)):
            n = int(round(length / self.dx))
            if n < 1 or abs(n * self.dx - length) > 1e-9 * max(1.0, length):
                raise NonCommensurateGrid(
                    f"{name} road length {length} is not a multiple of dx = {self.dx}"
                )
        object.__setattr__(self, "m1", int(round(-self.x_left / self.dx)))
        object.__setattr__(self, "m2", int(round(self.x_right / self.dx)))

    def edges1(self) -> np.ndarray:
        return -self.dx * np.arange(self.m1, -1, -1, dtype=float)

    def edges2(self) -> np.ndarray:
        return self.dx * np.arange(self.m2 + 1, dtype=float)

    def centers1(self) -> np.ndarray:
        return -self.dx * (np.arange(self.m1, 0, -1, dtype=float) - 0.5)

    def centers2(self) -> np.ndarray:
        return self.dx * (np.arange(self.m2, dtype=float) + 0.5)


@dataclass
class SimState:
    """Densities on both roads, buffer load and current time."""

    rho1: np.ndarray
    rho2: np.ndarray
    r: float
    t: float

    def copy(self) -> "SimState":
        return SimState(self.rho1.copy(), self.rho2.copy(), self.r, self.t)


@dataclass(frozen=True)
class BufferSpec:
    """Junction buffer: throughput capacity, initial load, maximum load.

    ``mu_out`` is only meaningful for the two-processor (supply-chain) model,
    where intake and discharge capacities may differ; it defaults to ``mu``.
    """

    mu: float
    r0: float = 0.0
    r_max: float = math.inf
    mu_out: float | None = None

    @property
    def discharge_capacity(self) -> float:
        return self.mu if self.mu_out is None else self.mu_out


@dataclass(frozen=True)
class PiecewiseProfile:
    """Piecewise-constant profile: ``values[i]`` on ``[breaks[i], breaks[i+1])``.

    The profile is 0 outside ``[breaks[0], breaks[-1]]``.
    """

    breaks: tuple[float, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.breaks) != len(self.values) + 1:
            raise ValueError("need exactly one more breakpoint than values")
        if any(a >= b for a, b in zip(self.breaks, self.breaks[1:])):
            raise ValueError("breakpoints must be strictly increasing")

    @classmethod
    def from_spans(cls, spans) -> "PiecewiseProfile":
        """Build from ``[[x_start, x_end, value], ...]``; gaps read as 0."""
        spans = sorted((float(a), float(b), float(v)) for a, b, v in spans)
        breaks: list[float] = []
        values: list[float] = []
        for a, b, v in spans:
            if not a < b:
                raise ValueError(f"empty span [{a}, {b}]")
            if breaks and a < breaks[-1]:
                raise ValueError(f"overlapping spans at x = {a}")
            if breaks and a > breaks[-1]:
                values.append(0.0)
                breaks.append(a)
            elif not breaks:
                breaks.append(a)
            values.append(v)
            breaks.append(b)
        return cls(tuple(breaks), tuple(values))

    @classmethod
    def constant(cls, x_lo: float, x_hi: float, value: float) -> "PiecewiseProfile":
        return cls((x_lo, x_hi), (value,))

    def __call__(self, x: float) -> float:
        if x < self.breaks[0] or x >= self.breaks[-1]:
            return 0.0
        i = int(np.searchsorted(self.breaks, x, side="right")) - 1
        return self.values[min(i, len(self.values) - 1)]

    def max_value(self) -> float:
        return max(self.values, default=0.0)

    def min_value(self) -> float:
        return min(self.values, default=0.0)

    def cell_averages(self, edges: np.ndarray) -> np.ndarray:
        """Exact cell averages of the profile over cells bounded by ``edges``."""
        dx = edges[1:] - edges[:-1]
        out = np.zeros(len(edges) - 1)
        for a, b, v in zip(self.breaks, self.breaks[1:], self.values):
            if v == 0.0:
                continue
            overlap = np.clip(edges[1:], a, b) - np.clip(edges[:-1], a, b)
            out += v * np.maximum(overlap, 0.0)
        return out / dx


@dataclass(frozen=True)
class OutputPlan:
    """Target CSV paths for a scenario run."""

    profile_csv: str = "profile.csv"
    buffer_csv: str = "buffer.csv"


@dataclass(frozen=True)
class Scenario:
    """Complete description of one experiment."""

    model: str
    v1: VelocityFn
    v2: VelocityFn
    buffer: BufferSpec
    grid: RoadGrid
    init1: PiecewiseProfile
    init2: PiecewiseProfile
    T: float
    kernel: KernelSpec | None = None
    left_boundary_value: float = 0.0
    right_extension: str = "constant_extrapolation"
    cfl_safety: float = 1.0
    dt: float | None = None
    snapshots: tuple[float, ...] = ()
    outputs: OutputPlan = OutputPlan()

    def with_eta(self, eta: float) -> "Scenario":
        if self.kernel is None:
            raise ValueError("scenario has no kernel")
        return replace(self, kernel=KernelSpec(self.kernel.kind, eta))

    def initial_state(self) -> SimState:
        return SimState(
            rho1=self.init1.cell_averages(self.grid.edges1()),
            rho2=self.init2.cell_averages(self.grid.edges2()),
            r=self.buffer.r0,
            t=0.0,
        )


def total_mass(state: SimState, grid: RoadGrid) -> float:
    """Vehicles on both roads plus the buffer load."""
    return grid.dx * (float(np.sum(state.rho1)) + float(np.sum(state.rho2))) + state.r


def l1_distance(a, b, dx: float) -> float:
    """``dx * sum(|a - b|)`` for two cell arrays on the same grid."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise GridMismatch(f"shape mismatch: {a.shape} vs {b.shape}")
    return dx * float(np.sum(np.abs(a - b)))


@dataclass(frozen=True)
class StepInfo:
    """Per-step bookkeeping used by mass-balance diagnostics.

    ``boundary_influx`` is the flux through the left edge of road 1,
    ``boundary_outflux`` the flux through the right edge of road 2, and
    ``clamped`` records whether the buffer update hit a bound of
    ``[0, r_max]`` (mass balance does not hold on clamped steps).
    """

    dt: float
    boundary_influx: float
    boundary_outflux: float
    clamped: bool


@dataclass
class Trajectory:
    """Result of a full run: buffer series plus density snapshots."""

    scenario: Scenario
    times: np.ndarray
    buffer_levels: np.ndarray
    snapshot_times: tuple[float, ...]
    snapshots1: list[np.ndarray]
    snapshots2: list[np.ndarray]
    clamped: np.ndarray
    records: "object | None" = None

    @property
    def final_rho1(self) -> np.ndarray:
        return self.snapshots1[-1]

    @property
    def final_rho2(self) -> np.ndarray:
        return self.snapshots2[-1]

    @property
    def final_buffer(self) -> float:
        return float(self.buffer_levels[-1])
