"""Optimal beam/phase/amplitude synthesis and the closed-form received SNR.

The reflection synthesis co-phases every term of the double-reflection
product and drives each per-element power constraint to equality. The
closed-form SNR is derived from that configuration and the rank-one channel
algebra; `snr_closed_form` agrees with `model.snr_full` to machine
precision, which is the contract the test suite enforces.

Note on the denominator: the first surface's amplification noise reaches the
user through the same rank-one inter-surface channel as the signal, so the
user-side combining applies its full coherent gain to it. Its addend
therefore scales with 1/m1 alone; see the `first_surface_noise` field.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import (
    Allocation,
    ChannelSet,
    Geometry,
    Placement,
    ReflectionConfig,
    SystemParams,
    distances,
    validate_allocation,
)


def optimal_beam(channels: ChannelSet) -> np.ndarray:
    """Unit-norm transmit beam matched to the BS-side signature of the first hop.

    The first-hop matrix is rank one, so any column of its conjugate
    transpose spans the optimal direction; the choice is user independent.
    """
    v = channels.h1_matrix.conj().T[:, 0]
    return v / np.linalg.norm(v)


def optimal_phases(channels: ChannelSet) -> tuple[np.ndarray, np.ndarray]:
    """Per-element phase profiles that co-phase the whole composite product.

    First surface: rotate each incident-signal entry onto the outgoing
    inter-surface signature. Second surface: rotate each inter-surface entry
    onto the user link. Every one of the m1*m2 contributions to the composite
    scalar then adds with zero relative phase.
    """
    fed = channels.h1_matrix @ optimal_beam(channels)
    phases1 = np.angle(channels.g2_vec) - np.angle(fed)
    phases2 = np.angle(channels.h2_vec) - np.angle(channels.g1_vec)
    return phases1, phases2


def optimal_amp_factors(params: SystemParams, d0: float, d1: float,
                        m1: int) -> tuple[float, float]:
    """Amplitude factors that meet both per-element power budgets with equality.

    Solving the first surface's budget with the matched beam gives the
    squared factor a1^2 = P_e d0^a / (N P_B beta + sigma_I^2 d0^a); feeding
    that into the second surface's budget gives a2^2. Returned values are
    amplitudes (square roots of the power gains).
    """
    if d0 <= 0 or d1 <= 0:
        raise ValueError("hop distances must be positive")
    n, beta, alpha = params.n_bs_antennas, params.ref_gain, params.pathloss_exp
    p_b, p_e, s_i = params.tx_power, params.per_element_power, params.irs_noise
    da, db = d0 ** alpha, d1 ** alpha
    a1_sq = p_e * da / (n * p_b * beta + s_i * da)
    a2_sq = (p_e * da * db
             / (n * p_b * beta ** 2 * m1 ** 2 * a1_sq
                + s_i * beta * m1 * a1_sq * da
                + s_i * da * db))
    return float(np.sqrt(a1_sq)), float(np.sqrt(a2_sq))


def reflection_config(params: SystemParams, channels: ChannelSet) -> ReflectionConfig:
    """Full optimal reflection configuration for one user's channels."""
    phases1, phases2 = optimal_phases(channels)
    amp1, amp2 = optimal_amp_factors(params, channels.d0, channels.d1, channels.m1)
    return ReflectionConfig(phases1=phases1, phases2=phases2, amp1=amp1,
                            amp2=amp2, beam=optimal_beam(channels))


@dataclass(frozen=True)
class SnrDenominator:
    """The five addends of the aggregate the closed-form SNR divides by.

    Each addend is nonnegative; their sum is the exact denominator once the
    leading N * P_B * beta^3 factor is pulled out of the SNR. Suffix comments
    give the element-split divisor each addend carries.
    """

    dual_budget: float          # / (m1^2 m2^2): user noise through both budgets
    cross_budget: float         # / (m1 m2^2)
    second_surface_noise: float  # / (m1^2 m2): noise injected by surface 2
    user_noise_floor: float     # / m2^2: user noise surviving large budgets
    first_surface_noise: float  # / m1: surface-1 noise, coherently combined

    @property
    def total(self) -> float:
        return (self.dual_budget + self.cross_budget + self.second_surface_noise
                + self.user_noise_floor + self.first_surface_noise)

    def as_tuple(self) -> tuple[float, float, float, float, float]:
        return (self.dual_budget, self.cross_budget, self.second_surface_noise,
                self.user_noise_floor, self.first_surface_noise)


def snr_closed_form(params: SystemParams, d0: float, d1: float, d2: float,
                    allocation: Allocation) -> tuple[float, SnrDenominator]:
    """Closed-form received SNR N P_B beta^3 / total for one user.

    Guaranteed equal to the matrix evaluation under the optimal reflection
    configuration; every addend is assembled from the budget-equality
    amplitude factors, with the BS beamforming gain N kept wherever the
    transmit power appears.
    """
    if min(d0, d1, d2) <= 0:
        raise ValueError("hop distances must be positive")
    n, beta, alpha = params.n_bs_antennas, params.ref_gain, params.pathloss_exp
    p_b, p_e = params.tx_power, params.per_element_power
    s_i, s_u = params.irs_noise, params.user_noise
    da, db, dc = d0 ** alpha, d1 ** alpha, d2 ** alpha
    m1, m2 = allocation.m1, allocation.m2

    breakdown = SnrDenominator(
        dual_budget=(s_i ** 2 * s_u * da * db * dc
                     + n * p_b * s_i * s_u * beta * db * dc)
                    / (p_e ** 2 * m1 ** 2 * m2 ** 2),
        cross_budget=s_u * s_i * beta * da * dc / (p_e * m1 * m2 ** 2),
        second_surface_noise=(s_i ** 2 * beta * da * db
                              + n * p_b * s_i * beta ** 2 * db)
                             / (p_e * m1 ** 2 * m2),
        user_noise_floor=n * p_b * s_u * beta ** 2 * dc / (p_e * m2 ** 2),
        first_surface_noise=s_i * beta ** 2 * da / m1,
    )
    gamma = n * p_b * beta ** 3 / breakdown.total
    return gamma, breakdown


@dataclass(frozen=True)
class RateReport:
    """Per-user SNRs and TDMA rates plus the max-min objective value."""

    snrs: tuple[float, ...]
    rates: tuple[float, ...]
    min_rate: float
    worst_user: int


def min_rate(params: SystemParams, geometry: Geometry, placement: Placement,
             allocation: Allocation) -> RateReport:
    """Worst-user TDMA rate under the optimal reflection configuration."""
    validate_allocation(allocation, params.total_elements)
    n_users = geometry.n_users
    snrs = []
    for user in range(n_users):
        d0, d1, d2 = distances(geometry, placement, user)
        gamma, _ = snr_closed_form(params, d0, d1, d2, allocation)
        snrs.append(gamma)
    rates = [np.log2(1.0 + g) / n_users for g in snrs]
    worst = int(np.argmin(rates))
    return RateReport(snrs=tuple(snrs), rates=tuple(rates),
                      min_rate=float(rates[worst]), worst_user=worst)
