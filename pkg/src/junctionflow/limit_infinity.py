"""Long-range limit models: capacity-capped transport and the two-processor
supply-chain system, plus closed-form solutions for box data used as oracles.

When the look-ahead distance covers the whole road ahead, road-1 drivers see
only the empty far field: their speed tends to the free road-2 speed
``v2(0)`` wherever the junction capacity is not binding, and the dynamics
reduce to transport with a piecewise-linear capped flux.  Which capacity
binds depends on whether the buffer throughput ``mu`` or the junction
absorption rate ``rho_max2 * v2(0)`` is smaller.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    EPS_BUFFER,
    PiecewiseProfile,
    Scenario,
    SimState,
    StepInfo,
    Trajectory,
    VelocityFn,
)
from .errors import CflViolation, UnsupportedRegime


def limit_velocity_fields(v2: VelocityFn) -> tuple[float, float]:
    """Limiting look-ahead speeds: 0 on the same road, ``v2(0)`` across."""
    return 0.0, v2.v_max


@dataclass(frozen=True)
class LimitCase:
    """Which capacity binds in the long-range limit.

    ``case1`` when the buffer throughput is the bottleneck
    (``mu <= rho_max2 * v2(0)``), ``case2`` when the junction absorption
    rate is.
    """

    discriminant: str
    v_free: float
    cap_below: float
    cap_full: float

    @classmethod
    def classify(cls, mu: float, v2: VelocityFn) -> "LimitCase":
        v_free = v2.v_max
        absorb = v2.rho_max * v_free
        case = "case1" if mu <= absorb else "case2"
        return cls(case, v_free, mu, min(mu, absorb))

    def cap(self, r: float, r_max: float) -> float:
        if r >= r_max - EPS_BUFFER:
            return self.cap_full
        return self.cap_below


class LimitInfinityStepper:
    """Upwind scheme for the capped-transport limit system.

    Road 1 carries the scalar law with flux ``min(rho * v_free, cap(r))``,
    road 2 plain transport at ``v_free``; the cap is re-evaluated every step
    from the buffer level.  Since both fluxes are non-decreasing in ``rho``,
    the Godunov interface flux is the upwind value.
    """

    def __init__(self, scenario: Scenario):
        if scenario.model != "limit_infinity_case":
            raise ValueError(f"not a limit scenario: {scenario.model}")
        self.scenario = scenario
        self.grid = scenario.grid
        self.buffer = scenario.buffer
        self.case = LimitCase.classify(scenario.buffer.mu, scenario.v2)
        self.v_free = self.case.v_free
        self.rho_max2 = scenario.v2.rho_max
        self.state = scenario.initial_state()
        self.dt_max = scenario.cfl_safety * self.grid.dx / self.v_free

    def junction_rates(self) -> tuple[float, float]:
        st = self.state
        cap = self.case.cap(st.r, self.buffer.r_max)
        q1 = min(float(st.rho1[-1]) * self.v_free, cap)
        if st.r > EPS_BUFFER:
            release = self.buffer.mu
        else:
            release = min(float(st.rho1[-1]) * self.v_free, self.buffer.mu)
        q2 = min(release, self.rho_max2 * self.v_free)
        return q1, q2

    def interface_fluxes(self):
        st = self.state
        cap = self.case.cap(st.r, self.buffer.r_max)
        q1, q2 = self.junction_rates()
        rho1e = np.concatenate([[self.scenario.left_boundary_value], st.rho1])
        f1 = np.empty(len(st.rho1) + 1)
        f1[:-1] = np.minimum(rho1e[:-1] * self.v_free, cap)
        f1[-1] = q1
        f2 = np.empty(len(st.rho2) + 1)
        f2[0] = q2
        f2[1:] = st.rho2 * self.v_free
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
        """Limit characteristics: stalled where the cap binds, free elsewhere."""
        free = self.state.rho1 * self.v_free <= self.buffer.mu
        w1 = np.where(free, self.v_free, 0.0)
        w2 = np.full(len(self.state.rho2), self.v_free)
        return w1, w2


def run_limit_infinity(scenario: Scenario,
                       record_fields: bool = False) -> Trajectory:
    """Run a capped-transport limit scenario to its horizon."""
    from .run_common import drive

    return drive(LimitInfinityStepper(scenario), scenario,
                 record_fields=record_fields)


class SupplyChainStepper:
    """Two processors with one buffer in between.

    Each road is a processor with flux ``min(rho * v, mu_e)``; the buffer
    absorbs whatever processor 1 delivers and releases at most ``mu2``
    toward processor 2 (less when it is empty).
    """

    def __init__(self, scenario: Scenario):
        if scenario.model != "supply_chain":
            raise ValueError(f"not a supply-chain scenario: {scenario.model}")
        if scenario.v1.v_max != scenario.v2.v_max:
            raise ValueError("supply-chain model uses one processing speed")
        self.scenario = scenario
        self.grid = scenario.grid
        self.v = scenario.v1.v_max
        self.mu1 = scenario.buffer.mu
        self.mu2 = scenario.buffer.discharge_capacity
        self.buffer = scenario.buffer
        self.state = scenario.initial_state()
        self.dt_max = scenario.cfl_safety * self.grid.dx / self.v

    def junction_rates(self) -> tuple[float, float]:
        st = self.state
        q1 = min(float(st.rho1[-1]) * self.v, self.mu1)
        if st.r > EPS_BUFFER:
            q2 = self.mu2
        else:
            q2 = min(float(st.rho1[-1]) * self.v, self.mu1, self.mu2)
        return q1, q2

    def interface_fluxes(self):
        st = self.state
        q1, q2 = self.junction_rates()
        rho1e = np.concatenate([[self.scenario.left_boundary_value], st.rho1])
        f1 = np.empty(len(st.rho1) + 1)
        f1[:-1] = np.minimum(rho1e[:-1] * self.v, self.mu1)
        f1[-1] = q1
        f2 = np.empty(len(st.rho2) + 1)
        f2[0] = q2
        f2[1:] = np.minimum(st.rho2 * self.v, self.mu2)
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
        w1 = np.where(self.state.rho1 * self.v <= self.mu1, self.v, 0.0)
        w2 = np.where(self.state.rho2 * self.v <= self.mu2, self.v, 0.0)
        return w1, w2


def run_supply_chain(scenario: Scenario,
                     record_fields: bool = False) -> Trajectory:
    """Run a two-processor supply-chain scenario to its horizon."""
    from .run_common import drive

    return drive(SupplyChainStepper(scenario), scenario,
                 record_fields=record_fields)


@dataclass(frozen=True)
class Front:
    """One moving discontinuity of a closed-form solution."""

    position: float
    speed: float
    left: float
    right: float
    road: int


def _spans_to_profile(spans, x_lo: float, x_hi: float) -> PiecewiseProfile:
    """Clip value spans to a road and drop empty or zero pieces."""
    kept = []
    for a, b, v in spans:
        a, b = max(a, x_lo), min(b, x_hi)
        if a < b and v != 0.0:
            kept.append((a, b, v))
    if not kept:
        return PiecewiseProfile.constant(x_lo, x_hi, 0.0)
    return PiecewiseProfile.from_spans(kept)


class ExactBoxSolution:
    """Closed-form solution of the capped-transport limit for box data.

    Road 1 carries a box of density ``value`` on ``[a, b]`` (``a < b < 0``),
    road 2 starts empty, the buffer starts empty and is unbounded.  The
    enumerated regimes cover: sub-capacity transport, a capacity-limited
    wave fan with an empty buffer, transport with a filling buffer, and the
    fan with a filling buffer.  Outside the enumerated regimes (threshold
    equalities, or times past the validity window) ``UnsupportedRegime`` is
    raised.
    """

    def __init__(self, a: float, b: float, value: float, mu: float,
                 v2: VelocityFn):
        if not (a < b < 0.0):
            raise UnsupportedRegime(f"need a < b < 0, got [{a}, {b}]")
        if value <= 0.0:
            raise UnsupportedRegime("box value must be positive")
        self.a, self.b, self.value = a, b, value
        self.mu = mu
        self.case = LimitCase.classify(mu, v2)
        self.v_free = self.case.v_free
        self.rho_max2 = v2.rho_max
        vf = self.v_free
        crit = mu / vf
        absorb = self.rho_max2 * vf
        if value * vf < min(mu, absorb):
            self.regime = "transport"
            self.valid_until = np.inf
        elif self.case.discriminant == "case1" and value > crit:
            self.regime = "fan_empty_buffer"
            self.valid_until = (b - a) * value / mu
        elif (self.case.discriminant == "case2"
              and self.rho_max2 < value < crit):
            self.regime = "transport_filling"
            self.valid_until = -a / vf
        elif self.case.discriminant == "case2" and value > crit:
            self.regime = "fan_filling"
            self.valid_until = (b - a) * value / mu
        else:
            raise UnsupportedRegime(
                f"box value {value} sits on a regime threshold"
            )

    def _check_time(self, t: float):
        if t < 0.0:
            raise UnsupportedRegime("negative time")
        if t >= self.valid_until:
            raise UnsupportedRegime(
                f"solution enumerated only for t < {self.valid_until}"
            )

    def buffer_level(self, t: float) -> float:
        self._check_time(t)
        vf = self.v_free
        t_hit = -self.b / vf
        if self.regime in ("transport", "fan_empty_buffer") or t <= t_hit:
            return 0.0
        if self.regime == "transport_filling":
            return vf * (self.value - self.rho_max2) * (t - t_hit)
        return (self.mu - self.rho_max2 * vf) * (t - t_hit)

    def fronts(self, t: float) -> list[Front]:
        self._check_time(t)
        a, b, p, vf, mu = self.a, self.b, self.value, self.v_free, self.mu
        plateau = mu / vf
        if self.regime in ("transport", "transport_filling"):
            out = [Front(a + vf * t, vf, 0.0, p, 1 if a + vf * t < 0 else 2)]
            lead = b + vf * t
            if self.regime == "transport":
                out.append(Front(lead, vf, p, 0.0, 1 if lead < 0 else 2))
            elif lead < 0:
                out.append(Front(lead, vf, p, 0.0, 1))
            else:
                out.append(Front(vf * (t + b / vf), vf, self.rho_max2, 0.0, 2))
            return out
        out = [
            Front(a + (mu / p) * t, mu / p, 0.0, p, 1),
            Front(b, 0.0, p, plateau, 1),
        ]
        lead = b + vf * t
        if lead < 0:
            out.append(Front(lead, vf, plateau, 0.0, 1))
        elif self.regime == "fan_empty_buffer":
            out.append(Front(lead, vf, plateau, 0.0, 2))
        else:
            out.append(Front(vf * (t + b / vf), vf, self.rho_max2, 0.0, 2))
        return out

    def road1_flux(self, rho: float) -> float:
        return min(rho * self.v_free, self.mu)

    def evaluate(self, t: float):
        """Profiles on both roads and the buffer level at time ``t``."""
        self._check_time(t)
        a, b, p, vf, mu = self.a, self.b, self.value, self.v_free, self.mu
        plateau = mu / vf
        spans1: list[tuple[float, float, float]] = []
        spans2: list[tuple[float, float, float]] = []
        if self.regime == "transport":
            spans1 = spans2 = [(a + vf * t, b + vf * t, p)]
        elif self.regime == "transport_filling":
            spans1 = [(a + vf * t, min(b + vf * t, 0.0), p)]
            if t > -b / vf:
                spans2 = [(0.0, vf * (t + b / vf), self.rho_max2)]
        else:
            spans1 = [
                (a + (mu / p) * t, b, p),
                (b, min(b + vf * t, 0.0), plateau),
            ]
            if t > -b / vf:
                if self.regime == "fan_empty_buffer":
                    spans2 = [(0.0, b + vf * t, plateau)]
                else:
                    spans2 = [(0.0, vf * (t + b / vf), self.rho_max2)]
        profile1 = _spans_to_profile(spans1, -np.inf, 0.0)
        profile2 = _spans_to_profile(spans2, 0.0, np.inf)
        return profile1, profile2, self.buffer_level(t)


def exact_box_solution(scenario: Scenario, t: float):
    """Closed-form solution for a box-datum scenario.

    Requires a single-box road-1 datum, an empty road 2, an empty unbounded
    buffer, and parameters in one of the enumerated regimes.
    """
    init1 = scenario.init1
    if len(init1.values) != 1:
        raise UnsupportedRegime("road-1 datum must be a single box")
    if scenario.init2.max_value() != 0.0 or scenario.init2.min_value() < 0.0:
        raise UnsupportedRegime("road 2 must start empty")
    if scenario.buffer.r0 != 0.0 or np.isfinite(scenario.buffer.r_max):
        raise UnsupportedRegime("buffer must start empty and be unbounded")
    sol = ExactBoxSolution(
        init1.breaks[0], init1.breaks[1], init1.values[0],
        scenario.buffer.mu, scenario.v2,
    )
    return sol.evaluate(t)


def exact_supply_chain_riemann(rho_l: float, rho_r: float, v: float,
                               mu1: float, mu2: float, t: float,
                               x_left: float, x_right: float):
    """Closed-form supply-chain solution for one jump at the junction.

    Covers downstream-free data (``rho_r <= mu2 / v``) with an initially
    empty buffer.  Road 1 never changes (its flux is non-decreasing, so
    nothing propagates back); road 2 carries the passed-through state
    ``min(rho_l, mu2 / v)`` behind a contact moving at ``v``; the buffer
    fills at the constant surplus rate.
    """
    if rho_r > mu2 / v:
        raise UnsupportedRegime("downstream state must be below capacity")
    passed = min(rho_l, mu2 / v)
    profile1 = PiecewiseProfile.constant(x_left, 0.0, rho_l)
    profile2 = _spans_to_profile(
        [(0.0, v * t, passed), (v * t, x_right, rho_r)], 0.0, x_right
    )
    rate = max(0.0, min(rho_l * v, mu1) - mu2)
    return profile1, profile2, rate * t
