"""Shared scenario builders for the test suite."""

import math

import pytest

from junctionflow import (
    BufferSpec,
    KernelSpec,
    PiecewiseProfile,
    RoadGrid,
    Scenario,
    VelocityFn,
)

# Velocity pair used by the congested-junction experiments.
V1_UNIT = VelocityFn(1.0, 1.0)        # v(rho) = 1 - rho
V2_NARROW = VelocityFn(1.0, 0.6)      # v(rho) = 1 - 5 rho / 3
V2_HALF = VelocityFn(1.0, 0.5)        # v(rho) = 1 - 2 rho

BOX_EDGE = -0.3333333333333333


def congested_scenario(model="nonlocal", mu=0.15, eta=0.5, dx=5e-3,
                       kind="linear", T=1.0, x_left=-3.0, x_right=3.0,
                       **overrides):
    """Constant congested data on both roads feeding a bottleneck junction."""
    fields = dict(
        model=model,
        v1=V1_UNIT,
        v2=V2_NARROW,
        buffer=BufferSpec(mu=mu),
        grid=RoadGrid(x_left, x_right, dx),
        init1=PiecewiseProfile.constant(x_left, 0.0, 0.75),
        init2=PiecewiseProfile.constant(0.0, x_right, 0.5),
        T=T,
        kernel=KernelSpec(kind, eta) if model == "nonlocal" else None,
        left_boundary_value=0.75,
        right_extension="constant_extrapolation",
        cfl_safety=1.0 if model == "nonlocal" else 0.9,
    )
    fields.update(overrides)
    return Scenario(**fields)


def box_scenario(model="nonlocal", eta=10.0, dx=0.01, mu=0.75,
                 r_max=math.inf, T=3.0, kind="linear", box=(-5.0, BOX_EDGE),
                 value=1.0, **overrides):
    """Compact box of traffic on road 1 driving toward an empty road 2."""
    fields = dict(
        model=model,
        v1=V1_UNIT,
        v2=V2_HALF,
        buffer=BufferSpec(mu=mu, r_max=r_max),
        grid=RoadGrid(-6.0, 4.0, dx),
        init1=PiecewiseProfile.from_spans([[box[0], box[1], value]]),
        init2=PiecewiseProfile.constant(0.0, 4.0, 0.0),
        T=T,
        kernel=KernelSpec(kind, eta) if model == "nonlocal" else None,
        left_boundary_value=0.0,
        right_extension="zero",
        cfl_safety=1.0 if model == "nonlocal" else 0.9,
    )
    fields.update(overrides)
    return Scenario(**fields)


def same_flux_scenario(model="nonlocal", eta=0.5, dx=5e-3, T=0.5, **overrides):
    """Identical flux law on both roads; the junction never throttles."""
    fields = dict(
        model=model,
        v1=V1_UNIT,
        v2=V1_UNIT,
        buffer=BufferSpec(mu=0.3),
        grid=RoadGrid(-1.0, 1.0, dx),
        init1=PiecewiseProfile.constant(-1.0, 0.0, 0.8),
        init2=PiecewiseProfile.constant(0.0, 1.0, 0.7),
        T=T,
        kernel=KernelSpec("linear", eta) if model == "nonlocal" else None,
        left_boundary_value=0.8,
        cfl_safety=1.0 if model == "nonlocal" else 0.9,
    )
    fields.update(overrides)
    return Scenario(**fields)


@pytest.fixture
def tmp_out(tmp_path):
    return str(tmp_path)
