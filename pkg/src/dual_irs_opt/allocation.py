"""Element-budget split between the two surfaces.

With placement fixed, the worst-user SNR denominator is a sum of terms of
the form coefficient / (m1^p m2^q). Each term is log-convex along the budget
line m1 + m2 = M (the budget is always exhausted at the optimum), so the
restriction is convex in m1 and a ternary search finds the continuous
minimizer; rounding to the better of floor/ceil recovers the exact integer
optimum. An exhaustive enumeration over every split serves as the baseline.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import (
    Allocation,
    Geometry,
    InvalidInputError,
    Placement,
    SystemParams,
    distances,
)


@dataclass(frozen=True)
class AllocationCoefficients:
    """Split-independent numerators of the denominator addends.

    Field names spell the divisor each coefficient sits over; per-user
    coefficients are arrays over users, shared ones are scalars.
    """

    over_m1sq_m2sq: np.ndarray  # per user
    over_m1_m2sq: np.ndarray    # per user
    over_m1sq_m2: float
    over_m2sq: np.ndarray       # per user
    over_m1: float


def allocation_coefficients(params: SystemParams, geometry: Geometry,
                            placement: Placement) -> AllocationCoefficients:
    """Coefficients at the given placement, vectorized over all users."""
    n, beta, alpha = params.n_bs_antennas, params.ref_gain, params.pathloss_exp
    p_b, p_e = params.tx_power, params.per_element_power
    s_i, s_u = params.irs_noise, params.user_noise
    per_user = np.array([distances(geometry, placement, u)
                         for u in range(geometry.n_users)])
    da = per_user[0, 0] ** alpha
    db = per_user[0, 1] ** alpha
    dc = per_user[:, 2] ** alpha
    return AllocationCoefficients(
        over_m1sq_m2sq=(s_i ** 2 * s_u * da * db * dc
                        + n * p_b * s_i * s_u * beta * db * dc) / p_e ** 2,
        over_m1_m2sq=s_u * s_i * beta * da * dc / p_e,
        over_m1sq_m2=float((s_i ** 2 * beta * da * db
                            + n * p_b * s_i * beta ** 2 * db) / p_e),
        over_m2sq=n * p_b * s_u * beta ** 2 * dc / p_e,
        over_m1=float(s_i * beta ** 2 * da),
    )


def split_objective(coeffs: AllocationCoefficients, m1_real: float,
                    total_elements: int) -> float:
    """Worst-user denominator value at a (possibly fractional) split."""
    if not 1.0 <= m1_real <= total_elements - 1.0:
        raise InvalidInputError(
            f"m1={m1_real!r} outside [1, {total_elements - 1}]")
    m1 = m1_real
    m2 = total_elements - m1_real
    per_user = (coeffs.over_m1sq_m2sq / (m1 ** 2 * m2 ** 2)
                + coeffs.over_m1_m2sq / (m1 * m2 ** 2)
                + coeffs.over_m1sq_m2 / (m1 ** 2 * m2)
                + coeffs.over_m2sq / m2 ** 2
                + coeffs.over_m1 / m1)
    return float(np.max(per_user))


def solve_allocation(coeffs: AllocationCoefficients,
                     total_elements: int) -> Allocation:
    """Best integer split via 1-D ternary search plus floor/ceil rounding."""
    if total_elements < 2:
        raise InvalidInputError("need at least two elements to split")
    if total_elements <= 3:
        return allocation_oracle(coeffs, total_elements)

    lo, hi = 1.0, float(total_elements - 1)
    while hi - lo > 1e-6:
        third = (hi - lo) / 3.0
        a, b = lo + third, hi - third
        if split_objective(coeffs, a, total_elements) \
                <= split_objective(coeffs, b, total_elements):
            hi = b
        else:
            lo = a
    m1_real = 0.5 * (lo + hi)

    candidates = {int(np.floor(m1_real)), int(np.ceil(m1_real))}
    candidates = {m for m in candidates if 1 <= m <= total_elements - 1}
    best = min(candidates,
               key=lambda m: (split_objective(coeffs, m, total_elements), -m))
    return Allocation(m1=best, m2=total_elements - best,
                      m1_real=m1_real, m2_real=total_elements - m1_real)


def allocation_oracle(coeffs: AllocationCoefficients,
                      total_elements: int) -> Allocation:
    """Exhaustive enumeration of every integer split; ties favor surface 2."""
    if total_elements < 2:
        raise InvalidInputError("need at least two elements to split")
    if total_elements > 2 ** 16:
        raise InvalidInputError("enumeration capped at 2^16 elements")
    m1 = np.arange(1, total_elements, dtype=float)
    m2 = total_elements - m1
    per_user = (coeffs.over_m1sq_m2sq[:, None] / (m1 ** 2 * m2 ** 2)
                + coeffs.over_m1_m2sq[:, None] / (m1 * m2 ** 2)
                + coeffs.over_m1sq_m2 / (m1 ** 2 * m2)
                + coeffs.over_m2sq[:, None] / m2 ** 2
                + coeffs.over_m1 / m1)
    worst = per_user.max(axis=0)
    best = int(np.argmin(worst))  # argmin takes the first (smallest m1) tie
    return Allocation(m1=best + 1, m2=total_elements - best - 1)
