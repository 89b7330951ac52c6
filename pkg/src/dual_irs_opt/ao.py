"""Two-layer alternating optimization of the full deployment problem.

Inner layer: alternate the element split and the placement until the
worst-user denominator stops improving. Outer layer: re-synthesize the
optimal reflections and record the min-rate trace; the reflections are
closed-form optimal for any deployment, so the outer layer converges
immediately and is kept to mirror the two-layer protocol and to audit the
final solution from scratch through the matrix model. A joint grid
enumeration provides the optimality baseline.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import allocation as alloc_mod
from . import closed_form, placement as place_mod
from .model import (
    Allocation,
    Geometry,
    InvalidInputError,
    InvariantBreach,
    Placement,
    ReflectionConfig,
    SystemParams,
    build_channels,
    per_element_power,
    snr_full,
    validate_allocation,
    validate_placement,
)


@dataclass(frozen=True)
class Solution:
    """Deployment, per-user reflections, rates, and the outer-loop trace."""

    placement: Placement
    allocation: Allocation
    configs: tuple[ReflectionConfig, ...]
    report: closed_form.RateReport
    trace: tuple[float, ...]


def audit_solution(params: SystemParams, geometry: Geometry, solution: Solution,
                   x_min: float = 1.0, rel_tol: float = 1e-9) -> None:
    """Re-check every constraint and the reported rates through the matrix model."""
    validate_placement(solution.placement, geometry.bs_user_distance, x_min)
    validate_allocation(solution.allocation, params.total_elements)
    budget = params.per_element_power
    for user, config in enumerate(solution.configs):
        channels = build_channels(params, geometry, solution.placement,
                                  solution.allocation, user)
        p1, p2 = per_element_power(channels, config, params)
        worst = max(np.max(np.abs(p1 / budget - 1.0)),
                    np.max(np.abs(p2 / budget - 1.0)))
        if worst > rel_tol:
            raise InvariantBreach(
                f"per-element power off budget by {worst:.3e} (user {user})")
        gamma = snr_full(channels, config, params)
        if abs(gamma - solution.report.snrs[user]) > rel_tol * gamma:
            raise InvariantBreach(
                f"matrix SNR disagrees with the reported value (user {user})")


def _synthesize(params: SystemParams, geometry: Geometry, placement: Placement,
                allocation: Allocation) -> tuple[ReflectionConfig, ...]:
    configs = []
    for user in range(geometry.n_users):
        channels = build_channels(params, geometry, placement, allocation, user)
        configs.append(closed_form.reflection_config(params, channels))
    return tuple(configs)


def _worst_denominator(params: SystemParams, geometry: Geometry,
                       placement: Placement, allocation: Allocation) -> float:
    coeffs = place_mod.placement_coefficients(params, allocation)
    d0, d1, d2 = place_mod.hop_distances(geometry, placement.x0, placement.x1)
    return place_mod.placement_objective(coeffs, d0, d1, d2)


def optimize_deployment(params: SystemParams, geometry: Geometry,
                        x_min: float = 1.0, tol: float = 1e-8,
                        max_rounds: int = 30) -> tuple[Placement, Allocation]:
    """Inner alternation: split, then placement, until the objective settles.

    The split step is exact (convex search plus rounding) and the placement
    step never accepts an uphill move, so the worst-user denominator is
    non-increasing round over round. The first round explores every
    placement basin; convergence is re-verified with a final multistart.
    """
    placement = place_mod.default_init(geometry, x_min)
    half = params.total_elements // 2
    allocation = Allocation(m1=max(half, 1),
                            m2=max(params.total_elements - half, 1))
    previous: float | None = None
    for rnd in range(max_rounds):
        coeffs = alloc_mod.allocation_coefficients(params, geometry, placement)
        allocation = alloc_mod.solve_allocation(coeffs, params.total_elements)
        placement = place_mod.solve_placement(params, geometry, allocation,
                                              init=placement, x_min=x_min,
                                              multistart=(rnd == 0))
        value = _worst_denominator(params, geometry, placement, allocation)
        if previous is not None and previous - value <= tol * previous:
            # Re-open every basin at the settled split before declaring done.
            refreshed = place_mod.solve_placement(params, geometry, allocation,
                                                  init=placement, x_min=x_min,
                                                  multistart=True)
            refreshed_value = _worst_denominator(params, geometry, refreshed,
                                                 allocation)
            if refreshed_value >= value * (1.0 - tol):
                break
            placement, value = refreshed, refreshed_value
        previous = value
    return placement, allocation


def solve(params: SystemParams, geometry: Geometry, x_min: float = 1.0,
          inner_tol: float = 1e-8, outer_tol: float = 1e-8,
          max_outer: int = 50, audit: bool = True) -> Solution:
    """Full two-layer solve: deployment alternation inside, reflection
    synthesis and min-rate tracking outside, matrix audit at the end."""
    trace: list[float] = []
    placement: Placement | None = None
    allocation: Allocation | None = None
    report = None
    for _ in range(max_outer):
        placement, allocation = optimize_deployment(params, geometry, x_min,
                                                    tol=inner_tol)
        report = closed_form.min_rate(params, geometry, placement, allocation)
        trace.append(report.min_rate)
        if len(trace) >= 2 and trace[-1] - trace[-2] <= outer_tol * trace[-2]:
            break
    configs = _synthesize(params, geometry, placement, allocation)
    solution = Solution(placement=placement, allocation=allocation,
                        configs=configs, report=report, trace=tuple(trace))
    if audit:
        audit_solution(params, geometry, solution, x_min)
    return solution


def exhaustive_baseline(params: SystemParams, geometry: Geometry,
                        alloc_step: int = 1, place_step: float = 2.0,
                        x_min: float = 1.0,
                        max_combinations: int = 1_000_000) -> Solution:
    """Joint grid over (split, x0, x1); exact closed-form rates at every node."""
    if alloc_step < 1 or place_step <= 0:
        raise InvalidInputError("grid steps must be positive")
    total = geometry.bs_user_distance
    m_total = params.total_elements
    m1_values = np.arange(alloc_step, m_total, alloc_step, dtype=int)
    if m1_values.size == 0:
        raise InvalidInputError("allocation grid is empty")
    grid = np.arange(x_min, total - 2 * x_min + 1e-9, place_step)
    x0g, x1g = np.meshgrid(grid, grid, indexing="ij")
    x2g = total - x0g - x1g
    keep = x2g >= x_min - 1e-12
    x0s, x1s, x2s = x0g[keep], x1g[keep], x2g[keep]
    if m1_values.size * x0s.size > max_combinations:
        raise InvalidInputError(
            f"{m1_values.size * x0s.size} grid combinations exceed the "
            f"{max_combinations} cap")

    n, beta, alpha = params.n_bs_antennas, params.ref_gain, params.pathloss_exp
    p_b, p_e = params.tx_power, params.per_element_power
    s_i, s_u = params.irs_noise, params.user_noise
    offsets = geometry.user_offsets()
    h_sq = geometry.irs_altitude ** 2

    da = (x0s ** 2 + h_sq) ** (alpha / 2.0)       # (P,)
    db = x1s ** alpha
    m1 = m1_values.astype(float)[:, None]          # (A, 1)
    m2 = m_total - m1

    worst = np.full((m1_values.size, x0s.size), -np.inf)
    for off_x, off_y in offsets:
        dc = ((x2s + off_x) ** 2 + h_sq + off_y ** 2) ** (alpha / 2.0)
        denom = ((s_i ** 2 * s_u * da * db * dc
                  + n * p_b * s_i * s_u * beta * db * dc)
                 / (p_e ** 2 * m1 ** 2 * m2 ** 2)
                 + s_u * s_i * beta * da * dc / (p_e * m1 * m2 ** 2)
                 + (s_i ** 2 * beta * da * db + n * p_b * s_i * beta ** 2 * db)
                 / (p_e * m1 ** 2 * m2)
                 + n * p_b * s_u * beta ** 2 * dc / (p_e * m2 ** 2)
                 + s_i * beta ** 2 * da / m1)
        np.maximum(worst, denom, out=worst)

    flat = int(np.argmin(worst))
    i, j = np.unravel_index(flat, worst.shape)
    allocation = Allocation(m1=int(m1_values[i]), m2=m_total - int(m1_values[i]))
    placement = Placement(x0=float(x0s[j]), x1=float(x1s[j]),
                          x2=total - float(x0s[j]) - float(x1s[j]))
    configs = _synthesize(params, geometry, placement, allocation)
    report = closed_form.min_rate(params, geometry, placement, allocation)
    return Solution(placement=placement, allocation=allocation, configs=configs,
                    report=report, trace=(report.min_rate,))
