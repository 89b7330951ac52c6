"""Capacity-scaling sweeps and benchmark-system comparisons.

Scaling studies use the zone-center user (single-user capacity) at a fixed
reference deployment, since the asymptotic laws do not depend on the
deployment; system comparisons use the worst-user TDMA rate with each
benchmark deployed by its own optimizer:

- double-active: this package's alternating solver;
- double-passive: unit amplitude, no amplification noise, even split,
  placement minimizing the worst-user product path loss;
- single-active / single-passive: all elements on one surface placed by a
  1-D grid search on the BS-user axis, with per-element power equality for
  the active kind.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import allocation as alloc_mod
from . import ao, closed_form
from . import placement as place_mod
from .model import (
    Allocation,
    Geometry,
    InvalidInputError,
    Placement,
    SystemParams,
    link_angles,
    panel_shape,
    steering_vector,
)

KINDS = ("double-active", "double-passive", "single-active", "single-passive")


@dataclass(frozen=True)
class SweepRow:
    """One swept point: value, achieved rate, and the per-doubling slope
    (defined only when this value doubles the previous one)."""

    value: float
    rate: float
    slope: float | None


def bench_placement(geometry: Geometry, x_min: float = 1.0) -> Placement:
    """Reference deployment for element sweeps: surface 1 hugs the BS (its
    coherently combined noise scales with the first hop), the remaining span
    splits evenly between the hop and the approach."""
    total = geometry.bs_user_distance
    rest = (total - x_min) / 2.0
    return Placement(x0=x_min, x1=rest, x2=total - x_min - rest)


def power_bench_placement(geometry: Geometry) -> Placement:
    """Reference deployment for power sweeps: a long first hop makes the
    budget-independent denominator addend dominant early, so the saturation
    plateau is visible within the swept range."""
    total = geometry.bs_user_distance
    return Placement(x0=total / 2.0, x1=total / 4.0, x2=total / 4.0)


def single_bench_position(geometry: Geometry) -> float:
    """Fixed single-surface position for sweeps: just short of the zone."""
    total = geometry.bs_user_distance
    return max(total - 2.0 * geometry.irs_altitude, total / 2.0)


def center_user_geometry(geometry: Geometry) -> Geometry:
    return Geometry(bs_user_distance=geometry.bs_user_distance,
                    irs_altitude=geometry.irs_altitude, users=((0.0, 0.0),))


# ---------------------------------------------------------------------------
# Benchmark SNR formulas (closed forms; matrix twins live below)
# ---------------------------------------------------------------------------

def double_passive_snr(params: SystemParams, d0: float, d1: float, d2: float,
                       allocation: Allocation) -> float:
    """Unit-amplitude, noiseless-surface variant of the double link."""
    n, beta, alpha = params.n_bs_antennas, params.ref_gain, params.pathloss_exp
    product = (d0 * d1 * d2) ** alpha
    return (n * params.tx_power * beta ** 3
            * allocation.m1 ** 2 * allocation.m2 ** 2
            / (params.user_noise * product))


def single_active_snr(params: SystemParams, d_a: float, d_b: float,
                      m: int) -> float:
    """One amplifying surface with per-element power met with equality."""
    n, beta, alpha = params.n_bs_antennas, params.ref_gain, params.pathloss_exp
    p_b, p_e = params.tx_power, params.per_element_power
    s_i, s_u = params.irs_noise, params.user_noise
    da, db = d_a ** alpha, d_b ** alpha
    amp_sq = p_e * da / (n * p_b * beta + s_i * da)
    signal = n * p_b * beta ** 2 * amp_sq * m ** 2 / (da * db)
    return signal / (s_i * amp_sq * m * beta / db + s_u)


def single_passive_snr(params: SystemParams, d_a: float, d_b: float,
                       m: int) -> float:
    n, beta, alpha = params.n_bs_antennas, params.ref_gain, params.pathloss_exp
    return (n * params.tx_power * beta ** 2 * m ** 2
            / (params.user_noise * d_a ** alpha * d_b ** alpha))


def single_irs_snr_matrix(params: SystemParams, position: float,
                          geometry: Geometry, user_index: int, m: int,
                          active: bool) -> float:
    """Matrix-arithmetic twin of the single-surface formulas (test oracle)."""
    h = geometry.irs_altitude
    surface = np.array([position, 0.0, h])
    bs = np.zeros(3)
    offsets = geometry.user_offsets()
    user = np.array([geometry.bs_user_distance + offsets[user_index, 0],
                     offsets[user_index, 1], 0.0])
    d_a = float(np.linalg.norm(surface - bs))
    d_b = float(np.linalg.norm(user - surface))
    s = params.spacing_over_wavelength
    alpha = params.pathloss_exp

    def gain(d):
        return (np.sqrt(params.ref_gain)
                * np.exp(-2j * np.pi * d / params.wavelength)
                / d ** (alpha / 2.0))

    az, el = link_angles(bs, surface)
    recv = steering_vector(az, el, *panel_shape(m), s)
    bs_out = steering_vector(az, el, *panel_shape(params.n_bs_antennas), s)
    h_in = gain(d_a) * np.outer(recv, bs_out.conj())
    az, el = link_angles(surface, user)
    out = steering_vector(az, el, *panel_shape(m), s)
    h_out = (gain(d_b) * out.conj()).conj()

    beam = h_in.conj().T[:, 0]
    beam = beam / np.linalg.norm(beam)
    fed = h_in @ beam
    phases = np.angle(h_out) - np.angle(fed)
    if active:
        da = d_a ** alpha
        amp = float(np.sqrt(params.per_element_power * da
                            / (params.n_bs_antennas * params.tx_power
                               * params.ref_gain + params.irs_noise * da)))
        noise = params.irs_noise
    else:
        amp, noise = 1.0, 0.0
    row = h_out.conj() * (amp * np.exp(1j * phases))
    signal = params.tx_power * abs(row @ fed) ** 2
    return float(signal / (noise * float(np.vdot(row, row).real)
                           + params.user_noise))


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------

def _center_capacity(kind: str, params: SystemParams, geometry: Geometry,
                     placement: Placement, single_position: float,
                     alloc_policy: str, reoptimize_placement: bool,
                     x_min: float) -> float:
    """Zone-center capacity of one system at one budget."""
    m = params.total_elements
    center = center_user_geometry(geometry)
    if kind in ("single-active", "single-passive"):
        if reoptimize_placement:
            single_position = _best_single_position(
                params, center, m, active=(kind == "single-active"),
                x_min=x_min)[0]
        d_a = float(np.hypot(single_position, geometry.irs_altitude))
        d_b = float(np.hypot(geometry.bs_user_distance - single_position,
                             geometry.irs_altitude))
        snr = (single_active_snr(params, d_a, d_b, m)
               if kind == "single-active"
               else single_passive_snr(params, d_a, d_b, m))
        return float(np.log2(1.0 + snr))

    if alloc_policy == "even":
        allocation = Allocation(m1=m // 2, m2=m - m // 2)
    elif alloc_policy == "optimize":
        if kind == "double-passive":
            allocation = Allocation(m1=m // 2, m2=m - m // 2)
        else:
            coeffs = alloc_mod.allocation_coefficients(params, center, placement)
            allocation = alloc_mod.solve_allocation(coeffs, m)
    else:
        raise InvalidInputError(f"unknown allocation policy {alloc_policy!r}")
    if reoptimize_placement:
        if kind == "double-passive":
            placement = _best_passive_placement(params, center, x_min)
        else:
            placement = place_mod.solve_placement(params, center, allocation,
                                                  init=placement, x_min=x_min)
    d0, d1, d2 = place_mod.hop_distances(center, placement.x0, placement.x1)
    if kind == "double-active":
        gamma, _ = closed_form.snr_closed_form(params, d0, d1, float(d2[0]),
                                               allocation)
    elif kind == "double-passive":
        gamma = double_passive_snr(params, d0, d1, float(d2[0]), allocation)
    else:
        raise InvalidInputError(f"unknown system kind {kind!r}")
    return float(np.log2(1.0 + gamma))


def _attach_slopes(values: list[float], rates: list[float]) -> list[SweepRow]:
    rows = []
    for i, (value, rate) in enumerate(zip(values, rates)):
        slope = None
        if i > 0 and abs(values[i] - 2.0 * values[i - 1]) < 1e-9 * values[i]:
            slope = rate - rates[i - 1]
        rows.append(SweepRow(value=value, rate=rate, slope=slope))
    return rows


def sweep_elements(params: SystemParams, geometry: Geometry,
                   m_values: list[int], kind: str = "double-active",
                   placement: Placement | None = None,
                   alloc_policy: str = "optimize",
                   reoptimize_placement: bool = False,
                   x_min: float = 1.0) -> list[SweepRow]:
    """Zone-center capacity versus total element budget, slopes per doubling."""
    if kind not in KINDS:
        raise InvalidInputError(f"unknown system kind {kind!r}")
    if any(m % 2 for m in m_values):
        raise InvalidInputError("element budgets must be even")
    if any(b <= a for a, b in zip(m_values, m_values[1:])):
        raise InvalidInputError("element budgets must be increasing")
    placement = placement or bench_placement(geometry, x_min)
    single_pos = single_bench_position(geometry)
    rates = [
        _center_capacity(kind, replace(params, total_elements=int(m)), geometry,
                         placement, single_pos, alloc_policy,
                         reoptimize_placement, x_min)
        for m in m_values
    ]
    return _attach_slopes([float(m) for m in m_values], rates)


def sweep_power(params: SystemParams, geometry: Geometry,
                pe_values: list[float], placement: Placement | None = None,
                allocation: Allocation | None = None,
                x_min: float = 1.0) -> list[SweepRow]:
    """Zone-center capacity versus per-element power at fixed budget and split.

    Deployment and split stay fixed across the sweep (the saturation law
    holds for any feasible fixed choice); the default split is even.
    """
    if any(b <= a for a, b in zip(pe_values, pe_values[1:])):
        raise InvalidInputError("power values must be increasing")
    if any(p <= 0 for p in pe_values):
        raise InvalidInputError("power values must be positive")
    placement = placement or power_bench_placement(geometry)
    m = params.total_elements
    allocation = allocation or Allocation(m1=m // 2, m2=m - m // 2)
    center = center_user_geometry(geometry)
    d0, d1, d2 = place_mod.hop_distances(center, placement.x0, placement.x1)
    rates = []
    for pe in pe_values:
        gamma, _ = closed_form.snr_closed_form(
            replace(params, per_element_power=float(pe)), d0, d1,
            float(d2[0]), allocation)
        rates.append(float(np.log2(1.0 + gamma)))
    return _attach_slopes([float(p) for p in pe_values], rates)


# ---------------------------------------------------------------------------
# Benchmark comparison at the scenario geometry (worst-user TDMA rate)
# ---------------------------------------------------------------------------

def _best_passive_placement(params: SystemParams, geometry: Geometry,
                            x_min: float, step: float = 1.0) -> Placement:
    """Grid argmin of the worst-user product path loss (step then refined)."""
    total = geometry.bs_user_distance
    grid = np.arange(x_min, total - 2 * x_min + 1e-9, step)
    along, off_sq = place_mod.user_axis_terms(geometry)
    x0 = grid[:, None]
    x1 = grid[None, :]
    x2 = total - x0 - x1
    a = x0 * x0 + geometry.irs_altitude ** 2
    worst = np.full((grid.size, grid.size), -np.inf)
    for offset, k in zip(along, off_sq):
        value = a * x1 * x1 * ((x2 + offset) ** 2 + k)
        np.maximum(worst, value, out=worst)
    worst[x2 < x_min - 1e-12] = np.inf
    i, j = np.unravel_index(int(np.argmin(worst)), worst.shape)
    bx0, bx1 = float(grid[i]), float(grid[j])
    return Placement(x0=bx0, x1=bx1, x2=total - bx0 - bx1)


def _single_rates(params: SystemParams, geometry: Geometry, position: float,
                  m: int, active: bool) -> np.ndarray:
    offsets = geometry.user_offsets()
    h_sq = geometry.irs_altitude ** 2
    d_a = float(np.hypot(position, geometry.irs_altitude))
    d_b = np.sqrt((geometry.bs_user_distance - position + offsets[:, 0]) ** 2
                  + h_sq + offsets[:, 1] ** 2)
    snr = np.array([
        single_active_snr(params, d_a, float(db), m) if active
        else single_passive_snr(params, d_a, float(db), m)
        for db in d_b
    ])
    return np.log2(1.0 + snr) / geometry.n_users


def _best_single_position(params: SystemParams, geometry: Geometry, m: int,
                          active: bool, x_min: float,
                          step: float = 1.0) -> tuple[float, float]:
    total = geometry.bs_user_distance
    best = (x_min, -np.inf)
    for x in np.arange(x_min, total - x_min + 1e-9, step):
        rate = float(np.min(_single_rates(params, geometry, float(x), m, active)))
        if rate > best[1]:
            best = (float(x), rate)
    return best


def benchmark_rate(kind: str, params: SystemParams, geometry: Geometry,
                   x_min: float = 1.0, grid_step: float = 1.0) -> float:
    """Worst-user TDMA rate of one system, each deployed by its own optimizer."""
    m = params.total_elements
    if kind == "double-active":
        return ao.solve(params, geometry, x_min=x_min).report.min_rate
    if kind == "double-passive":
        allocation = Allocation(m1=m // 2, m2=m - m // 2)
        placement = _best_passive_placement(params, geometry, x_min, grid_step)
        rates = []
        for user in range(geometry.n_users):
            d0, d1, d2 = place_mod.hop_distances(geometry, placement.x0,
                                                    placement.x1)
            gamma = double_passive_snr(params, d0, d1, float(d2[user]),
                                       allocation)
            rates.append(np.log2(1.0 + gamma) / geometry.n_users)
        return float(np.min(rates))
    if kind in ("single-active", "single-passive"):
        return _best_single_position(params, geometry, m,
                                     active=(kind == "single-active"),
                                     x_min=x_min, step=grid_step)[1]
    raise InvalidInputError(f"unknown system kind {kind!r}")


def find_crossover(params: SystemParams, geometry: Geometry,
                   x_min: float = 1.0, max_doublings: int = 14) -> int | None:
    """Smallest even budget at which the passive pair overtakes the active pair.

    Both systems are re-deployed at every probed budget (closed-form rates,
    zone-center user). Doubles the budget until the ordering flips, then
    bisects on even integers. Returns None if no flip occurs in range.
    """
    center = center_user_geometry(geometry)
    passive_placement = _best_passive_placement(params, center, x_min)

    def gap(m: int) -> float:
        p = replace(params, total_elements=int(m))
        placement, allocation = ao.optimize_deployment(p, center, x_min=x_min)
        d0, d1, d2 = place_mod.hop_distances(center, placement.x0, placement.x1)
        gamma, _ = closed_form.snr_closed_form(p, d0, d1, float(d2[0]),
                                               allocation)
        active = float(np.log2(1.0 + gamma))
        even = Allocation(m1=m // 2, m2=m - m // 2)
        d0, d1, d2 = place_mod.hop_distances(center, passive_placement.x0,
                                             passive_placement.x1)
        passive = float(np.log2(1.0 + double_passive_snr(
            p, d0, d1, float(d2[0]), even)))
        return passive - active

    lo = max(params.total_elements, 4)
    if gap(lo) > 0:
        return lo
    hi = lo
    for _ in range(max_doublings):
        hi *= 2
        if gap(hi) > 0:
            break
    else:
        return None
    while hi - lo > 2:
        mid = (lo + hi) // 4 * 2  # keep it even
        if gap(mid) > 0:
            hi = mid
        else:
            lo = mid
    return hi
