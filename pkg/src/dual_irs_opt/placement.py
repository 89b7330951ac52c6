"""Horizontal placement of the two surfaces along the BS-user axis.

At fixed allocation the worst-user denominator is a positive combination of
products of squared hop distances. In log-distance variables the objective
is a sum of exponentials (convex); the squared-distance definitions are
non-convex equalities, so each iteration lower-bounds them by their tangent
at the current anchor and solves the resulting convex program. The surrogate
upper-bounds the true objective, giving a monotone descent. A dense 2-D grid
search over the two free segments is kept alongside as the brute-force
baseline the iterative solver is judged against.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .model import (
    Allocation,
    Geometry,
    InvalidInputError,
    Placement,
    SystemParams,
)


class AnchorResetError(RuntimeError):
    """Anchors disagree with the placement they were supposedly derived from."""


@dataclass(frozen=True)
class PlacementCoefficients:
    """Coefficients of each squared-distance product in the denominator.

    Field names list which hops appear: `d012` multiplies d0^2 d1^2 d2^2,
    `d01` multiplies d0^2 d1^2, ... `d2` multiplies d2^2 alone. All are
    nonnegative functions of the radio constants and the element split.
    """

    d012: float
    d01: float
    d02: float
    d12: float
    d0: float
    d1: float
    d2: float


def placement_coefficients(params: SystemParams,
                           allocation: Allocation) -> PlacementCoefficients:
    n, beta = params.n_bs_antennas, params.ref_gain
    p_b, p_e = params.tx_power, params.per_element_power
    s_i, s_u = params.irs_noise, params.user_noise
    m1, m2 = allocation.m1, allocation.m2
    return PlacementCoefficients(
        d012=s_i ** 2 * s_u / (p_e ** 2 * m1 ** 2 * m2 ** 2),
        d01=s_i ** 2 * beta / (p_e * m1 ** 2 * m2),
        d02=s_u * s_i * beta / (p_e * m1 * m2 ** 2),
        d12=n * p_b * s_i * s_u * beta / (p_e ** 2 * m1 ** 2 * m2 ** 2),
        d0=s_i * beta ** 2 / m1,
        d1=n * p_b * s_i * beta ** 2 / (p_e * m1 ** 2 * m2),
        d2=n * p_b * s_u * beta ** 2 / (p_e * m2 ** 2),
    )


def placement_objective(coeffs: PlacementCoefficients, d0: float, d1: float,
                        d2: np.ndarray | float) -> float:
    """Worst-user denominator at the given hop distances (d2 per user)."""
    if d0 <= 0 or d1 <= 0 or np.min(d2) <= 0:
        raise InvalidInputError("hop distances must be positive")
    a, b, c = d0 * d0, d1 * d1, np.square(d2)
    value = (coeffs.d012 * a * b * c + coeffs.d01 * a * b + coeffs.d02 * a * c
             + coeffs.d12 * b * c + coeffs.d0 * a + coeffs.d1 * b
             + coeffs.d2 * c)
    return float(np.max(value))


def user_axis_terms(geometry: Geometry) -> tuple[np.ndarray, np.ndarray]:
    """Per-user (axis offset, squared off-axis distance incl. altitude)."""
    offsets = geometry.user_offsets()
    along = offsets[:, 0]
    off_sq = geometry.irs_altitude ** 2 + offsets[:, 1] ** 2
    return along, off_sq


def hop_distances(geometry: Geometry, x0: float, x1: float) -> tuple[float, float, np.ndarray]:
    along, off_sq = user_axis_terms(geometry)
    x2 = geometry.bs_user_distance - x0 - x1
    d0 = float(np.hypot(x0, geometry.irs_altitude))
    d2 = np.sqrt((x2 + along) ** 2 + off_sq)
    return d0, float(x1), d2


@dataclass
class ScaState:
    """Anchors (log hop distances), current placement, and the descent trace."""

    anchor_y0: float
    anchor_y1: float
    anchor_y2: np.ndarray
    placement: Placement
    trace: list[float] = field(default_factory=list)
    iterations: int = 0


def init_sca_state(coeffs: PlacementCoefficients, geometry: Geometry,
                   placement: Placement) -> ScaState:
    d0, d1, d2 = hop_distances(geometry, placement.x0, placement.x1)
    state = ScaState(anchor_y0=np.log(d0), anchor_y1=np.log(d1),
                     anchor_y2=np.log(d2), placement=placement)
    state.trace.append(placement_objective(coeffs, d0, d1, d2))
    return state


def sca_subproblem(state: ScaState, coeffs: PlacementCoefficients,
                   geometry: Geometry, x_min: float = 1.0) -> ScaState:
    """One convex subproblem: tangent lower bounds on the distances, epigraph min.

    The log-distance variables are eliminated through the (tight at the
    optimum) linearized bounds, leaving a smooth convex program in the two
    free segments that SLSQP solves with analytic gradients. The exact
    objective is re-evaluated at the solution; the step is accepted only if
    it does not increase, so the trace is non-increasing by construction.
    """
    total = geometry.bs_user_distance
    altitude_sq = geometry.irs_altitude ** 2
    along, off_sq = user_axis_terms(geometry)

    d0, d1, d2 = hop_distances(geometry, state.placement.x0, state.placement.x1)
    if (abs(np.log(d0) - state.anchor_y0) > 1e-6
            or abs(np.log(d1) - state.anchor_y1) > 1e-6
            or np.max(np.abs(np.log(d2) - state.anchor_y2)) > 1e-6):
        raise AnchorResetError("anchors do not match the current placement")

    e0 = np.exp(-2.0 * state.anchor_y0)
    e1 = np.exp(-state.anchor_y1)
    e2 = np.exp(-2.0 * state.anchor_y2)
    scale = max(state.trace[-1], 1e-300)

    def surrogate(x):
        x0, x1 = x
        x2 = total - x0 - x1
        y0 = state.anchor_y0 + 0.5 * ((x0 * x0 + altitude_sq) * e0 - 1.0)
        y1 = state.anchor_y1 + x1 * e1 - 1.0
        y2 = state.anchor_y2 + 0.5 * (((x2 + along) ** 2 + off_sq) * e2 - 1.0)
        t012 = coeffs.d012 * np.exp(2 * y0 + 2 * y1 + 2 * y2)
        t01 = coeffs.d01 * np.exp(2 * y0 + 2 * y1)
        t02 = coeffs.d02 * np.exp(2 * y0 + 2 * y2)
        t12 = coeffs.d12 * np.exp(2 * y1 + 2 * y2)
        t0 = coeffs.d0 * np.exp(2 * y0)
        t1 = coeffs.d1 * np.exp(2 * y1)
        t2 = coeffs.d2 * np.exp(2 * y2)
        values = (t012 + t01 + t02 + t12 + t0 + t1 + t2) / scale
        dy0 = 2.0 * (t012 + t01 + t02 + t0) / scale
        dy1 = 2.0 * (t012 + t01 + t12 + t1) / scale
        dy2 = 2.0 * (t012 + t02 + t12 + t2) / scale
        g0 = x0 * e0                      # dy0/dx0
        g2 = -(x2 + along) * e2           # dy2/dx0 = dy2/dx1
        grad_x0 = dy0 * g0 + dy2 * g2
        grad_x1 = dy1 * e1 + dy2 * g2
        return values, np.column_stack([grad_x0, grad_x1])

    n_users = len(along)
    t0_val = 1.0  # anchor objective after scaling

    def objective(z):
        return z[2], np.array([0.0, 0.0, 1.0])

    def ineq(z):
        values, _ = surrogate(z[:2])
        return np.append(z[2] - values, total - x_min - z[0] - z[1])

    def ineq_jac(z):
        _, grads = surrogate(z[:2])
        rows = np.column_stack([-grads, np.ones(n_users)])
        return np.vstack([rows, [-1.0, -1.0, 0.0]])

    z_start = np.array([state.placement.x0, state.placement.x1, t0_val])
    bounds = [(x_min, total - 2 * x_min), (x_min, total - 2 * x_min), (0.0, None)]
    result = minimize(objective, z_start, jac=True, method="SLSQP",
                      bounds=bounds,
                      constraints=[{"type": "ineq", "fun": ineq, "jac": ineq_jac}],
                      options={"maxiter": 200, "ftol": 1e-12})

    x0 = float(np.clip(result.x[0], x_min, total - 2 * x_min))
    x1 = float(np.clip(result.x[1], x_min, total - 2 * x_min))
    if total - x0 - x1 < x_min:
        x1 = total - x_min - x0
    d0, d1, d2 = hop_distances(geometry, x0, x1)
    value = placement_objective(coeffs, d0, d1, d2)

    if value <= state.trace[-1] * (1.0 + 1e-12):
        placement = Placement(x0=x0, x1=x1, x2=total - x0 - x1)
        state.placement = placement
        state.anchor_y0 = float(np.log(d0))
        state.anchor_y1 = float(np.log(d1))
        state.anchor_y2 = np.log(d2)
        state.trace.append(min(value, state.trace[-1]))
    else:
        state.trace.append(state.trace[-1])  # reject uphill numerical step
    state.iterations += 1
    return state


def _sca_descent(coeffs: PlacementCoefficients, geometry: Geometry,
                 init: Placement, x_min: float, rel_tol: float = 1e-8,
                 max_iter: int = 100) -> tuple[Placement, float]:
    state = init_sca_state(coeffs, geometry, init)
    for _ in range(max_iter):
        previous = state.trace[-1]
        try:
            sca_subproblem(state, coeffs, geometry, x_min)
        except AnchorResetError:
            state = init_sca_state(coeffs, geometry, state.placement)
            continue
        if previous - state.trace[-1] <= rel_tol * previous:
            break
    return state.placement, state.trace[-1]


def default_init(geometry: Geometry, x_min: float = 1.0) -> Placement:
    """Spread start: both surfaces pulled toward their own terminals."""
    total = geometry.bs_user_distance
    return Placement(x0=0.1 * total, x1=0.8 * total, x2=0.1 * total)


def _starts(geometry: Geometry, x_min: float) -> list[Placement]:
    total = geometry.bs_user_distance
    mid = total / 3.0
    raw = [
        default_init(geometry, x_min),
        Placement(x_min, total - 2 * x_min, x_min),            # spread to the ends
        Placement(total - 2 * x_min, x_min, x_min),            # cluster at the zone
        Placement(x_min, x_min, total - 2 * x_min),            # cluster at the BS
        Placement(mid, mid, total - 2 * mid),                  # balanced
        Placement(x_min, (total - x_min) / 2,
                  total - x_min - (total - x_min) / 2),        # hug BS, split rest
    ]
    unique = []
    for p in raw:
        if min(p.as_tuple()) < x_min - 1e-12:
            continue
        if not any(np.allclose(p.as_tuple(), q.as_tuple()) for q in unique):
            unique.append(p)
    return unique


def solve_placement(params: SystemParams, geometry: Geometry,
                    allocation: Allocation, init: Placement | None = None,
                    x_min: float = 1.0, multistart: bool = True) -> Placement:
    """Monotone descent from several starts; the landscape has multiple basins.

    Returns the placement with the best exact objective among all converged
    runs (plus the caller's init when given). `multistart=False` descends
    from the caller's init alone, for warm-started refinement loops.
    """
    coeffs = placement_coefficients(params, allocation)
    starts = _starts(geometry, x_min) if multistart else []
    if init is not None:
        starts.insert(0, init)
    if not starts:
        starts = [default_init(geometry, x_min)]
    best: tuple[Placement, float] | None = None
    for start in starts:
        placement, value = _sca_descent(coeffs, geometry, start, x_min)
        if best is None or value < best[1]:
            best = (placement, value)
    return best[0]


def placement_oracle(params: SystemParams, geometry: Geometry,
                     allocation: Allocation, step: float = 1.0,
                     x_min: float = 1.0) -> Placement:
    """Dense grid search over the two free segments; exact objective values."""
    if step <= 0:
        raise InvalidInputError("grid step must be positive")
    total = geometry.bs_user_distance
    grid = np.arange(x_min, total - 2 * x_min + 1e-9, step)
    if grid.size == 0:
        raise InvalidInputError("no feasible grid point between the bounds")
    coeffs = placement_coefficients(params, allocation)
    along, off_sq = user_axis_terms(geometry)

    x0 = grid[:, None]
    x1 = grid[None, :]
    x2 = total - x0 - x1
    feasible = x2 >= x_min - 1e-12
    a = x0 * x0 + geometry.irs_altitude ** 2
    b = x1 * x1
    worst = np.full((grid.size, grid.size), -np.inf)
    for offset, k in zip(along, off_sq):
        c = (x2 + offset) ** 2 + k
        value = (coeffs.d012 * a * b * c + coeffs.d01 * a * b
                 + coeffs.d02 * a * c + coeffs.d12 * b * c
                 + coeffs.d0 * a + coeffs.d1 * b + coeffs.d2 * c)
        np.maximum(worst, value, out=worst)
    worst[~feasible] = np.inf
    flat = int(np.argmin(worst))
    i, j = np.unravel_index(flat, worst.shape)
    best_x0, best_x1 = float(grid[i]), float(grid[j])
    return Placement(x0=best_x0, x1=best_x1, x2=total - best_x0 - best_x1)
