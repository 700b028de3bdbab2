"""Look-ahead scheme: index-level oracle, frozen examples, invariants."""

import math

import numpy as np
import pytest

from junctionflow import (
    BufferSpec,
    CflViolation,
    KernelSpec,
    NonlocalStepper,
    PiecewiseProfile,
    RoadGrid,
    Scenario,
    SimState,
    VelocityFn,
    buffer_demand,
    buffer_supply_profile,
    build_discrete_kernel,
    cfl_max_dt,
    nonlocal_velocities,
    numerical_fluxes,
    run_nonlocal,
    total_mass,
    velocity_eval,
)
from junctionflow.nonlocal_solver import _lookahead_tables, compute_fields

from conftest import V1_UNIT, V2_NARROW, congested_scenario

# ------------------------------------------------------------------ oracle


def naive_tables(rho1, rho2, kernel, v1, v2, right_extension):
    """Direct double-loop evaluation of the stencil sums.

    Positions p = 0 .. m1 with p = 0 the Dirichlet ghost cell; written
    against the index rules themselves, independent of the vectorized path.
    """
    m1, m2 = len(rho1), len(rho2)
    n, gam, tail = kernel.n_eta, kernel.gamma, kernel.tail
    w1 = [float(velocity_eval(v1, r)) for r in rho1]
    w2 = [float(velocity_eval(v2, r)) for r in rho2]
    if right_extension == "zero":
        ext = float(velocity_eval(v2, 0.0))
    else:
        ext = float(velocity_eval(v2, rho2[-1]))
    a1 = np.zeros(m1 + 1)
    a2r1 = np.zeros(m1 + 1)
    for p in range(m1 + 1):
        j = p - m1 - 1
        total = 0.0
        for k in range(0, min(-j - 2, n - 1) + 1):
            i = j + k + 1 + m1
            if 0 <= i < m1:
                total += gam[k] * w1[i]
        a1[p] = total
        total = 0.0
        for k in range(max(-j - 1, 0), n):
            cell = j + k + 1
            if cell < m2:
                total += gam[k] * w2[cell]
            else:
                total += tail[k] * ext
                break
        a2r1[p] = total
    a2r2 = np.zeros(m2)
    for j in range(m2):
        total = 0.0
        for k in range(n):
            cell = j + k + 1
            if cell < m2:
                total += gam[k] * w2[cell]
            else:
                total += tail[k] * ext
                break
        a2r2[j] = total
    return a1, a2r1, a2r2


@pytest.mark.parametrize("m1,m2,n,ext", [
    (12, 7, 4, "constant_extrapolation"),
    (5, 9, 20, "zero"),
    (8, 8, 8, "constant_extrapolation"),
    (3, 2, 50, "zero"),
    (30, 4, 1, "constant_extrapolation"),
    (1, 1, 3, "zero"),
])
def test_tables_match_naive_oracle(m1, m2, n, ext):
    rng = np.random.default_rng(m1 * 100 + m2 * 10 + n)
    dx = 0.1
    kernel = build_discrete_kernel(KernelSpec("linear", n * dx), dx)
    rho1 = rng.uniform(0.0, 1.0, m1)
    rho2 = rng.uniform(0.0, 0.6, m2)
    got = _lookahead_tables(rho1, rho2, kernel, V1_UNIT, V2_NARROW, ext)
    want = naive_tables(rho1, rho2, kernel, V1_UNIT, V2_NARROW, ext)
    for g, w in zip(got, want):
        assert np.max(np.abs(g - w)) <= 1e-13


# ------------------------------------------------- velocity table examples


def constant_state(eta=0.5, dx=1e-3, mu=0.15, **overrides):
    return congested_scenario(eta=eta, dx=dx, mu=mu, **overrides)


def test_velocities_constant_states():
    sc = constant_state()
    stepper = NonlocalStepper(sc)
    v_ahead1, v_ahead2 = nonlocal_velocities(
        stepper.state, stepper.kernel, sc.v1, sc.v2, sc.right_extension
    )
    m1 = sc.grid.m1
    # Junction-adjacent cell has an empty same-road stencil.
    assert v_ahead1[-1] == 0.0
    # Full-stencil cells of a constant state reproduce the point speeds.
    assert v_ahead1[0] == pytest.approx(0.25, abs=1e-14)
    assert v_ahead2[m1 + 10] == pytest.approx(1.0 / 6.0, abs=1e-14)
    # Constant extrapolation keeps the edge cells exact too.
    assert v_ahead2[-1] == pytest.approx(1.0 / 6.0, abs=1e-14)


def test_buffer_supply_examples():
    sc = constant_state()
    stepper = NonlocalStepper(sc)
    fields = stepper.fields()
    sup = fields.buffer_supply
    assert sup[-1] == pytest.approx(0.15, abs=1e-15)      # all mass beyond
    assert sup[0] == 0.0                                   # farther than eta
    # Full buffer caps the intake by what road 2 absorbs.
    full = buffer_supply_profile(
        stepper.kernel, 0.15, r=1.0, r_max=1.0,
        v_ahead2_road1=fields.v_ahead2_road1, rho_max2=0.6,
    )
    assert full[-1] == pytest.approx(0.1, abs=1e-12)


def test_buffer_demand_examples():
    assert buffer_demand(0.75, mu=0.15, r=0.01, v_ahead2_junction=1 / 6) == 0.15
    assert buffer_demand(0.75, mu=0.15, r=0.0, v_ahead2_junction=1 / 6) == (
        pytest.approx(0.125)
    )
    assert buffer_demand(0.75, mu=0.1, r=0.0, v_ahead2_junction=1 / 6) == 0.1


def test_flux_examples():
    sc = constant_state()
    stepper = NonlocalStepper(sc)
    fields = stepper.fields()
    f1, f2 = numerical_fluxes(
        stepper.state, fields, rho_max2=0.6, left_boundary_value=0.75
    )
    assert f1[-1] == pytest.approx(0.125, abs=1e-12)   # junction outflow
    assert f2[0] == pytest.approx(0.1, abs=1e-12)      # junction inflow
    assert f2[10] == pytest.approx(1.0 / 12.0, abs=1e-12)


def test_cfl_examples():
    kernel = build_discrete_kernel(KernelSpec("linear", 0.5), 1e-3)
    dt = cfl_max_dt(kernel, V1_UNIT, V2_NARROW, 1e-3)
    # gamma0 = 0.003996, norms (5/3, 1, 1): dt = dx / 2.00666.
    assert dt / 1e-3 == pytest.approx(0.49834, abs=2e-5)
    assert cfl_max_dt(kernel, V1_UNIT, V2_NARROW, 1e-3, 0.5) == dt * 0.5

    unit = build_discrete_kernel(KernelSpec("constant", 1e-3), 1e-3)
    assert unit.gamma[0] == pytest.approx(1.0)
    dt_unit = cfl_max_dt(unit, VelocityFn(1, 1), VelocityFn(1, 1), 1e-3)
    assert dt_unit == pytest.approx(1e-3 / 3.0)


def test_single_step_buffer_rates():
    stepper = NonlocalStepper(constant_state(mu=0.15))
    info = stepper.step()
    assert stepper.state.r == pytest.approx(0.025 * info.dt, rel=1e-10)

    stepper = NonlocalStepper(constant_state(mu=0.1))
    stepper.step()
    assert stepper.state.r == 0.0


def test_cfl_violation_is_hard_error():
    stepper = NonlocalStepper(constant_state(dx=5e-3))
    with pytest.raises(CflViolation):
        stepper.step(stepper.dt_max * 1.01)


# -------------------------------------------------------------- properties


def test_maximum_principle_randomized():
    rng = np.random.default_rng(7)
    for kind in ("constant", "linear", "quadratic"):
        for eta in (0.1, 0.5, 2.0):
            sc = congested_scenario(
                kind=kind, eta=eta, mu=float(rng.uniform(0.05, 0.75)),
                dx=0.05, T=0.4, x_left=-2.0, x_right=1.0,
                init1=PiecewiseProfile.from_spans(
                    [[-2.0, -1.0, rng.uniform(0, 1)],
                     [-1.0, 0.0, rng.uniform(0, 1)]]),
                init2=PiecewiseProfile.from_spans(
                    [[0.0, 0.4, rng.uniform(0, 0.6)],
                     [0.4, 1.0, rng.uniform(0, 0.6)]]),
                left_boundary_value=float(rng.uniform(0, 1)),
            )
            stepper = NonlocalStepper(sc)
            for _ in range(int(np.ceil(sc.T / stepper.dt_max))):
                stepper.step(min(stepper.dt_max, sc.T))
                assert stepper.state.rho1.min() >= -1e-12
                assert stepper.state.rho2.min() >= -1e-12
                assert stepper.state.rho1.max() <= 1.0 + 1e-12
                assert stepper.state.rho2.max() <= 0.6 + 1e-12


def test_maximum_principle_uniform_in_eta():
    # The bound must not degrade for a very large look-ahead range.
    sc = congested_scenario(eta=300.0, dx=0.05, T=0.5, x_left=-2.0,
                            x_right=1.0)
    stepper = NonlocalStepper(sc)
    for _ in range(int(np.ceil(sc.T / stepper.dt_max))):
        stepper.step()
        assert stepper.state.rho1.max() <= 1.0 + 1e-12
        assert stepper.state.rho2.max() <= 0.6 + 1e-12
        assert min(stepper.state.rho1.min(), stepper.state.rho2.min()) >= -1e-12


def test_mass_balance_per_step():
    sc = congested_scenario(eta=0.1, dx=2e-3, T=0.2, x_left=-1.0, x_right=1.0)
    stepper = NonlocalStepper(sc)
    for _ in range(100):
        before = total_mass(stepper.state, sc.grid)
        info = stepper.step()
        after = total_mass(stepper.state, sc.grid)
        assert not info.clamped
        balance = info.dt * (info.boundary_influx - info.boundary_outflux)
        assert abs(after - before - balance) <= 1e-10


def test_kernel_range_locality():
    # Perturbing road 2 beyond x + eta never changes the road-1 flux at x.
    sc = congested_scenario(eta=0.1, dx=0.01, x_left=-1.0, x_right=1.0,
                            init2=PiecewiseProfile.from_spans(
                                [[0.0, 0.5, 0.5], [0.5, 1.0, 0.2]]))
    stepper = NonlocalStepper(sc)
    fields = compute_fields(stepper.state, stepper.kernel, sc.v1, sc.v2,
                            0.15, math.inf, sc.right_extension)
    f1, _ = numerical_fluxes(stepper.state, fields, rho_max2=0.6,
                             left_boundary_value=0.75)
    # Road-1 cell at x = -0.305; its stencil ends at -0.205 < 0, so any
    # road-2 perturbation is out of range.  Also check a cell whose stencil
    # covers road-2 cells [0, 0.06) only.
    perturbed = stepper.state.copy()
    perturbed.rho2[6:16] += 0.05      # cells at [0.06, 0.16]
    pfields = compute_fields(perturbed, stepper.kernel, sc.v1, sc.v2,
                             0.15, math.inf, sc.right_extension)
    pf1, _ = numerical_fluxes(perturbed, pfields, rho_max2=0.6,
                              left_boundary_value=0.75)
    m1 = sc.grid.m1
    far = m1 - 40          # x = -0.395: stencil ends on road 1
    near = m1 - 5          # x = -0.045: stencil covers road-2 cells 0..5 only
    assert pf1[far + 1] == f1[far + 1]
    assert pf1[near + 1] == f1[near + 1]
    # Sanity: the junction cell's stencil (road-2 cells 0..9) does reach it.
    assert pf1[m1] != f1[m1]


def test_sub_eta_cells_see_nothing_beyond():
    sc = congested_scenario(eta=0.1, dx=0.01, x_left=-1.0, x_right=1.0)
    stepper = NonlocalStepper(sc)
    fields = stepper.fields()
    centers = sc.grid.centers1()
    beyond = centers < -0.1
    assert np.all(fields.buffer_supply[beyond] == 0.0)
    assert np.all(fields.v_ahead2_road1[beyond] == 0.0)


def test_determinism_bitwise():
    sc = congested_scenario(eta=0.5, dx=5e-3, T=0.3)
    a = run_nonlocal(sc)
    b = run_nonlocal(sc)
    assert np.array_equal(a.buffer_levels, b.buffer_levels)
    assert np.array_equal(a.final_rho1, b.final_rho1)
    assert np.array_equal(a.final_rho2, b.final_rho2)


def test_free_flow_buffer_stays_empty():
    # Buffer capacity above the largest possible junction flux: the buffer
    # never fills from an empty start.
    sc = congested_scenario(mu=1.5, eta=0.1, dx=5e-3, T=0.5,
                            x_left=-1.0, x_right=1.0)
    traj = run_nonlocal(sc)
    assert np.all(traj.buffer_levels == 0.0)


def test_final_step_lands_on_horizon():
    sc = congested_scenario(eta=0.5, dx=5e-3, T=0.2501)
    traj = run_nonlocal(sc)
    assert traj.times[-1] == sc.T
