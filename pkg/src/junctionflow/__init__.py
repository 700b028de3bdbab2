"""Finite-volume simulation of a 1-to-1 road junction with a buffer.

Road 1 feeds a buffer of capacity ``mu`` at the junction, which feeds road 2.
The main model lets drivers react to averaged downstream conditions over a
look-ahead distance ``eta``; companion solvers cover the two local models
obtained as ``eta`` shrinks, and the capped-transport / supply-chain models
obtained as it grows.
"""

from .characteristics import (
    CharTrajectory,
    RecordedRun,
    char_velocity,
    trace_characteristics,
)
from .core import (
    BufferSpec,
    OutputPlan,
    PiecewiseProfile,
    RoadGrid,
    Scenario,
    SimState,
    StepInfo,
    Trajectory,
    VelocityFn,
    demand,
    l1_distance,
    local_flux,
    supply,
    total_mass,
    velocity_eval,
)
from .errors import (
    CflViolation,
    GridMismatch,
    InvalidKernel,
    JunctionFlowError,
    NonCommensurateGrid,
    OutOfDomain,
    ParseError,
    UnsupportedRegime,
    ValidationError,
)
from .harness import (
    ComparisonReport,
    characteristics_command,
    compare_command,
    convergence_command,
    exact_box_trajectory,
    run_command,
    run_scenario,
)
from .kernel import (
    DiscreteKernel,
    KernelSpec,
    build_discrete_kernel,
    kernel_density,
)
from .limit_infinity import (
    ExactBoxSolution,
    LimitCase,
    LimitInfinityStepper,
    SupplyChainStepper,
    exact_box_solution,
    exact_supply_chain_riemann,
    limit_velocity_fields,
    run_limit_infinity,
    run_supply_chain,
)
from .local_solver import (
    JunctionFluxes,
    LocalStepper,
    godunov_flux,
    junction_coupling_herty,
    junction_coupling_limit0,
    run_local,
    step_local,
)
from .nonlocal_solver import (
    NonlocalFields,
    NonlocalStepper,
    buffer_demand,
    buffer_supply_profile,
    cfl_max_dt,
    nonlocal_velocities,
    numerical_fluxes,
    run_nonlocal,
    step_nonlocal,
)
from .scenario_io import parse_scenario, parse_scenario_dict, serialize_scenario

__version__ = "0.1.0"
