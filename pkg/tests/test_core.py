"""Velocity laws, flux primitives, profiles, mass and distance helpers."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from junctionflow import (
    GridMismatch,
    PiecewiseProfile,
    RoadGrid,
    SimState,
    VelocityFn,
    demand,
    l1_distance,
    local_flux,
    supply,
    total_mass,
    velocity_eval,
)

V1 = VelocityFn(1.0, 1.0)
V2 = VelocityFn(1.0, 0.6)


def test_velocity_examples():
    assert velocity_eval(V1, 0.75) == pytest.approx(0.25)
    assert velocity_eval(V2, 0.5) == pytest.approx(1.0 / 6.0)
    assert velocity_eval(V1, 1.0) == 0.0
    assert velocity_eval(V2, 0.6) == 0.0
    assert velocity_eval(V2, 0.6 + 1e-12) == 0.0  # never negative


def test_local_flux_examples():
    assert local_flux(V1, 0.5) == pytest.approx(0.25)
    assert local_flux(V2, 0.5) == pytest.approx(1.0 / 12.0)
    assert local_flux(V1, 0.0) == 0.0
    assert local_flux(V1, 1.0) == 0.0


def test_demand_supply_examples():
    assert demand(V1, 0.75) == pytest.approx(0.25)
    assert demand(V1, 0.3) == pytest.approx(0.21)
    assert supply(V1, 0.3) == pytest.approx(0.25)
    assert supply(V1, 0.75) == pytest.approx(0.1875)


@settings(max_examples=100, deadline=None)
@given(
    v_max=st.floats(0.1, 5.0),
    rho_max=st.floats(0.1, 5.0),
    frac=st.floats(0.0, 1.0),
)
def test_demand_supply_identity(v_max, rho_max, frac):
    v = VelocityFn(v_max, rho_max)
    rho = frac * rho_max
    f_sigma = local_flux(v, v.sigma)
    assert demand(v, rho) + supply(v, rho) == pytest.approx(
        local_flux(v, rho) + f_sigma, rel=1e-12, abs=1e-15
    )
    # Godunov consistency: equal states give back the flux.
    assert min(demand(v, rho), supply(v, rho)) == pytest.approx(
        local_flux(v, rho), rel=1e-12, abs=1e-15
    )


@settings(max_examples=50, deadline=None)
@given(
    v_max=st.floats(0.1, 5.0),
    rho_max=st.floats(0.1, 5.0),
    a=st.floats(0.0, 1.0),
    b=st.floats(0.0, 1.0),
)
def test_velocity_monotone(v_max, rho_max, a, b):
    v = VelocityFn(v_max, rho_max)
    lo, hi = sorted((a * rho_max, b * rho_max))
    assert velocity_eval(v, lo) >= velocity_eval(v, hi)


def test_total_mass_examples():
    grid = RoadGrid(-1.0, 1.0, 0.1)
    zeros = SimState(np.zeros(10), np.zeros(10), 0.3, 0.0)
    assert total_mass(zeros, grid) == pytest.approx(0.3)

    # Box of unit density, length 14/3, measured through exact cell averages.
    grid2 = RoadGrid(-6.0, 4.0, 0.01)
    prof = PiecewiseProfile.from_spans([[-5.0, -0.3333333333333333, 1.0]])
    state = SimState(prof.cell_averages(grid2.edges1()),
                     np.zeros(grid2.m2), 0.0, 0.0)
    assert total_mass(state, grid2) == pytest.approx(4.66666666666667, abs=1e-9)


def test_total_mass_additive():
    grid = RoadGrid(-1.0, 1.0, 0.1)
    a = SimState(np.zeros(10), np.zeros(10), 0.0, 0.0)
    a.rho1[:5] = 0.4
    b = SimState(np.zeros(10), np.zeros(10), 0.2, 0.0)
    b.rho2[3:] = 0.1
    merged = SimState(a.rho1 + b.rho1, a.rho2 + b.rho2, a.r + b.r, 0.0)
    assert total_mass(merged, grid) == pytest.approx(
        total_mass(a, grid) + total_mass(b, grid)
    )


def test_l1_distance():
    a = np.full(10, 0.5)
    assert l1_distance(a, a, 0.01) == 0.0
    b = a + 0.1
    assert l1_distance(a, b, 0.01) == pytest.approx(0.01)
    assert l1_distance(a, b, 0.01) == l1_distance(b, a, 0.01)
    with pytest.raises(GridMismatch):
        l1_distance(a, np.zeros(9), 0.01)


def test_profile_cell_averages_split_cell():
    # A breakpoint inside a cell contributes its exact overlap fraction.
    prof = PiecewiseProfile.from_spans([[0.0, 0.25, 1.0]])
    edges = np.array([0.0, 0.1, 0.2, 0.3])
    avg = prof.cell_averages(edges)
    assert avg == pytest.approx([1.0, 1.0, 0.5])


def test_profile_gaps_read_as_zero():
    prof = PiecewiseProfile.from_spans([[0.0, 1.0, 0.3], [2.0, 3.0, 0.7]])
    assert prof(0.5) == 0.3
    assert prof(1.5) == 0.0
    assert prof(2.5) == 0.7
    assert prof(-1.0) == 0.0
    assert prof(5.0) == 0.0


def test_profile_overlap_rejected():
    with pytest.raises(ValueError):
        PiecewiseProfile.from_spans([[0.0, 1.0, 0.3], [0.5, 2.0, 0.7]])


def test_grid_junction_is_interface():
    grid = RoadGrid(-1.0, 2.0, 0.25)
    assert grid.edges1()[-1] == 0.0
    assert grid.edges2()[0] == 0.0
    assert grid.m1 == 4 and grid.m2 == 8
    assert grid.centers1()[-1] == pytest.approx(-0.125)
    assert grid.centers2()[0] == pytest.approx(0.125)
