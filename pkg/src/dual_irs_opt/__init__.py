"""Deployment optimization and capacity scaling for a double amplifying
reflecting-surface relay link: exact matrix link model, closed-form optimal
reflections, element-split and placement optimizers, scaling benches, and a
CSV-emitting CLI."""

from .allocation import (
    AllocationCoefficients,
    allocation_coefficients,
    allocation_oracle,
    solve_allocation,
    split_objective,
)
from .ao import Solution, audit_solution, exhaustive_baseline, solve
from .bench import (
    KINDS,
    SweepRow,
    bench_placement,
    benchmark_rate,
    find_crossover,
    sweep_elements,
    sweep_power,
)
from .closed_form import (
    RateReport,
    SnrDenominator,
    min_rate,
    optimal_amp_factors,
    optimal_beam,
    optimal_phases,
    reflection_config,
    snr_closed_form,
)
from .model import (
    Allocation,
    ChannelSet,
    Geometry,
    InvalidInputError,
    InvariantBreach,
    Placement,
    ReflectionConfig,
    SingularGeometryError,
    SystemParams,
    build_channels,
    distances,
    panel_shape,
    per_element_power,
    snr_full,
    steering_vector,
    validate_allocation,
    validate_placement,
)
from .placement import (
    PlacementCoefficients,
    ScaState,
    placement_coefficients,
    placement_objective,
    placement_oracle,
    sca_subproblem,
    solve_placement,
)
from .scenario import Scenario, ScenarioError, format_scenario, parse_scenario

__version__ = "0.1.0"
