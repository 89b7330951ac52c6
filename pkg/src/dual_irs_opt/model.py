"""Geometry, LoS channel construction, and the exact matrix-arithmetic link model.

Everything downstream (closed forms, allocation/placement optimizers, scaling
benches) is checked against the functions in this module: channels are built
as explicit complex matrices and the received SNR and per-element radiated
powers are evaluated by direct matrix products, with no algebraic shortcuts.

Conventions:
- 3-D coordinates: BS at the origin, user zone centered at (D, 0, 0), both
  reflecting surfaces at altitude H above the axis.
- Propagation phase e^{-j 2 pi d / lambda}; amplitude sqrt(beta) / d^(alpha/2)
  with beta the power gain at 1 m.
- A panel of m elements is arranged as the most-square (n_h, n_v) factor pair;
  only steering-vector phases depend on this, never the aligned SNR.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np


class InvalidInputError(ValueError):
    """An argument violates a documented precondition."""


class SingularGeometryError(ValueError):
    """Two nodes coincide; path loss and angles are undefined."""


class InvariantBreach(RuntimeError):
    """An internal consistency check failed on a computed result."""


# ---------------------------------------------------------------------------
# Parameter containers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SystemParams:
    """Radio constants shared by every link in the system.

    Powers are linear watts, distances meters, `ref_gain` is the linear
    channel power gain at 1 m reference distance.
    """

    n_bs_antennas: int
    total_elements: int
    wavelength: float
    ref_gain: float
    pathloss_exp: float
    tx_power: float
    per_element_power: float
    irs_noise: float
    user_noise: float
    n_users: int
    element_spacing: float | None = None

    def __post_init__(self):
        if self.element_spacing is None:
            object.__setattr__(self, "element_spacing", self.wavelength / 2.0)
        if self.n_bs_antennas < 1 or self.total_elements < 1 or self.n_users < 1:
            raise InvalidInputError("antenna, element and user counts must be >= 1")
        for name in ("wavelength", "ref_gain", "pathloss_exp", "tx_power",
                     "per_element_power", "irs_noise", "user_noise",
                     "element_spacing"):
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0:
                raise InvalidInputError(f"{name} must be finite and > 0, got {value!r}")

    @property
    def spacing_over_wavelength(self) -> float:
        return self.element_spacing / self.wavelength


@dataclass(frozen=True)
class Geometry:
    """BS/user-zone layout: axis length, surface altitude, user offsets.

    `users` holds (radius, azimuth) polar offsets of each user from the zone
    center, radius in meters and azimuth in [0, 2*pi).
    """

    bs_user_distance: float
    irs_altitude: float
    users: tuple[tuple[float, float], ...]

    def __post_init__(self):
        if self.bs_user_distance <= 0:
            raise InvalidInputError("bs_user_distance must be > 0")
        if self.irs_altitude <= 0:
            raise InvalidInputError("irs_altitude must be > 0")
        if not self.users:
            raise InvalidInputError("at least one user is required")
        for r, theta in self.users:
            if r < 0:
                raise InvalidInputError(f"user radius must be >= 0, got {r}")
            if not 0.0 <= theta < 2.0 * np.pi:
                raise InvalidInputError(f"user azimuth must lie in [0, 2*pi), got {theta}")

    @property
    def n_users(self) -> int:
        return len(self.users)

    def user_offsets(self) -> np.ndarray:
        """(L, 2) array of horizontal offsets of the users from the zone center."""
        arr = np.asarray(self.users, dtype=float).reshape(-1, 2)
        return np.column_stack([arr[:, 0] * np.cos(arr[:, 1]),
                                arr[:, 0] * np.sin(arr[:, 1])])


@dataclass(frozen=True)
class Placement:
    """Horizontal split of the BS-user axis: BS->surface1, surface1->surface2,
    surface2->zone center. The three segments must sum to the axis length."""

    x0: float
    x1: float
    x2: float

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.x0, self.x1, self.x2)


def validate_placement(placement: Placement, bs_user_distance: float,
                       x_min: float = 1.0, tol: float = 1e-9) -> None:
    x0, x1, x2 = placement.as_tuple()
    if abs(x0 + x1 + x2 - bs_user_distance) > tol:
        raise InvalidInputError(
            f"segments sum to {x0 + x1 + x2!r}, expected {bs_user_distance!r}")
    for name, x in (("x0", x0), ("x1", x1), ("x2", x2)):
        if x < x_min - tol:
            raise InvalidInputError(f"{name}={x!r} below lower bound {x_min!r}")


@dataclass(frozen=True)
class Allocation:
    """Element split between the two surfaces, integer plus relaxed mirror."""

    m1: int
    m2: int
    m1_real: float | None = None
    m2_real: float | None = None

    def __post_init__(self):
        if self.m1 < 1 or self.m2 < 1:
            raise InvalidInputError("both surfaces need at least one element")


def validate_allocation(allocation: Allocation, total_elements: int) -> None:
    if allocation.m1 + allocation.m2 != total_elements:
        raise InvalidInputError(
            f"m1 + m2 = {allocation.m1 + allocation.m2}, budget is {total_elements}")


@dataclass(frozen=True)
class ChannelSet:
    """LoS channels of the double-reflection link for one user.

    `g_matrix` is rank one by construction and factors exactly as
    g1_vec @ g2_vec.conj().T; scalar complex gains and the three hop
    distances are kept alongside the matrices.
    """

    h1_matrix: np.ndarray   # (m1, n_bs)
    g_matrix: np.ndarray    # (m2, m1)
    g1_vec: np.ndarray      # (m2,)
    g2_vec: np.ndarray      # (m1,)
    h2_vec: np.ndarray      # (m2,)  column vector h2; the link row is h2^H
    h1_gain: complex
    g_gain: complex
    h2_gain: complex
    d0: float
    d1: float
    d2: float

    @property
    def m1(self) -> int:
        return self.h1_matrix.shape[0]

    @property
    def m2(self) -> int:
        return self.g_matrix.shape[0]


@dataclass(frozen=True)
class ReflectionConfig:
    """Per-surface phase profiles, uniform amplitude factors, and BS beam."""

    phases1: np.ndarray
    phases2: np.ndarray
    amp1: float
    amp2: float
    beam: np.ndarray

    def __post_init__(self):
        if self.amp1 < 0 or self.amp2 < 0:
            raise InvalidInputError("amplitude factors must be >= 0")
        norm_sq = float(np.vdot(self.beam, self.beam).real)
        if norm_sq > 1.0 + 1e-12:
            raise InvalidInputError(f"beam power {norm_sq} exceeds the unit budget")


# ---------------------------------------------------------------------------
# Array geometry
# ---------------------------------------------------------------------------

def panel_shape(count: int) -> tuple[int, int]:
    """Most-square (n_h, n_v) factorization of an element count, n_h >= n_v."""
    if count < 1:
        raise InvalidInputError("element count must be >= 1")
    n_v = int(np.sqrt(count))
    while count % n_v:
        n_v -= 1
    return count // n_v, n_v


PanelPolicy = Callable[[int], tuple[int, int]]


def steering_vector(azimuth: float, elevation: float, n_h: int, n_v: int,
                    spacing_over_wavelength: float) -> np.ndarray:
    """Array response of an (n_h x n_v) panel for a plane wave.

    Horizontal phase progression follows cos(azimuth)*sin(elevation),
    vertical follows cos(elevation); every entry has unit magnitude and the
    squared norm equals the element count.
    """
    if n_h < 1 or n_v < 1:
        raise InvalidInputError("panel dimensions must be >= 1")
    if not (np.isfinite(azimuth) and np.isfinite(elevation)):
        raise InvalidInputError("angles must be finite")

    def w(zeta: float, n: int) -> np.ndarray:
        return np.exp(-1j * np.pi * zeta * np.arange(n))

    s = spacing_over_wavelength
    horiz = w(2.0 * s * np.cos(azimuth) * np.sin(elevation), n_h)
    vert = w(2.0 * s * np.cos(elevation), n_v)
    return np.kron(horiz, vert)


def node_positions(geometry: Geometry, placement: Placement) -> dict[str, np.ndarray]:
    """3-D coordinates of BS, both surfaces, and every user."""
    d = geometry.bs_user_distance
    h = geometry.irs_altitude
    offsets = geometry.user_offsets()
    users = np.column_stack([d + offsets[:, 0], offsets[:, 1],
                             np.zeros(len(offsets))])
    return {
        "bs": np.array([0.0, 0.0, 0.0]),
        "irs1": np.array([placement.x0, 0.0, h]),
        "irs2": np.array([placement.x0 + placement.x1, 0.0, h]),
        "users": users,
    }


def link_angles(frm: np.ndarray, to: np.ndarray) -> tuple[float, float]:
    """(azimuth, elevation) of the propagation direction from one node to another.

    Elevation is measured from the vertical axis; for a perfectly vertical
    link the azimuth is undefined and pinned to 0.
    """
    v = to - frm
    d = float(np.linalg.norm(v))
    if d <= 0.0:
        raise SingularGeometryError("coincident nodes have no link direction")
    elevation = float(np.arccos(np.clip(v[2] / d, -1.0, 1.0)))
    sin_el = np.sin(elevation)
    if sin_el < 1e-15:
        azimuth = 0.0
    else:
        azimuth = float(np.arccos(np.clip(v[0] / (d * sin_el), -1.0, 1.0)))
    return azimuth, elevation


def distances(geometry: Geometry, placement: Placement,
              user_index: int) -> tuple[float, float, float]:
    """Hop lengths (BS->surface1, surface1->surface2, surface2->user)."""
    if not 0 <= user_index < geometry.n_users:
        raise InvalidInputError(f"user_index {user_index} out of range")
    h = geometry.irs_altitude
    r, theta = geometry.users[user_index]
    d0 = float(np.hypot(placement.x0, h))
    d1 = float(placement.x1)
    d2 = float(np.sqrt((placement.x2 + r * np.cos(theta)) ** 2
                       + h * h + (r * np.sin(theta)) ** 2))
    return d0, d1, d2


# ---------------------------------------------------------------------------
# Channel construction and exact link evaluation
# ---------------------------------------------------------------------------

def _complex_gain(params: SystemParams, d: float) -> complex:
    if d <= 0.0:
        raise SingularGeometryError(f"nonpositive hop distance {d}")
    return (np.sqrt(params.ref_gain)
            * np.exp(-2j * np.pi * d / params.wavelength)
            / d ** (params.pathloss_exp / 2.0))


def build_channels(params: SystemParams, geometry: Geometry, placement: Placement,
                   allocation: Allocation, user_index: int,
                   panel_policy: PanelPolicy = panel_shape) -> ChannelSet:
    """Construct the three LoS channel matrices for one user.

    Angles of departure/arrival are derived from the 3-D node coordinates;
    both ends of a hop use the propagation direction of that hop, a pure
    phase convention that cancels in every aligned magnitude.
    """
    pos = node_positions(geometry, placement)
    user = pos["users"][user_index] if 0 <= user_index < geometry.n_users else None
    if user is None:
        raise InvalidInputError(f"user_index {user_index} out of range")
    d0, d1, d2 = distances(geometry, placement, user_index)
    s = params.spacing_over_wavelength

    h1_gain = _complex_gain(params, d0)
    g_gain = _complex_gain(params, d1)
    h2_gain = _complex_gain(params, d2)

    az, el = link_angles(pos["bs"], pos["irs1"])
    recv1 = steering_vector(az, el, *panel_policy(allocation.m1), s)
    bs_out = steering_vector(az, el, *panel_policy(params.n_bs_antennas), s)
    h1_matrix = h1_gain * np.outer(recv1, bs_out.conj())

    az, el = link_angles(pos["irs1"], pos["irs2"])
    recv2 = steering_vector(az, el, *panel_policy(allocation.m2), s)
    out1 = steering_vector(az, el, *panel_policy(allocation.m1), s)
    root = np.sqrt(complex(g_gain))
    g1_vec = root * recv2
    g2_vec = (root * out1.conj()).conj()
    g_matrix = np.outer(g1_vec, g2_vec.conj())

    az, el = link_angles(pos["irs2"], user)
    out2 = steering_vector(az, el, *panel_policy(allocation.m2), s)
    h2_vec = (h2_gain * out2.conj()).conj()

    return ChannelSet(h1_matrix=h1_matrix, g_matrix=g_matrix, g1_vec=g1_vec,
                      g2_vec=g2_vec, h2_vec=h2_vec, h1_gain=h1_gain,
                      g_gain=g_gain, h2_gain=h2_gain, d0=d0, d1=d1, d2=d2)


def _reflection_matrices(channels: ChannelSet,
                         config: ReflectionConfig) -> tuple[np.ndarray, np.ndarray]:
    if config.phases1.shape != (channels.m1,) or config.phases2.shape != (channels.m2,):
        raise InvalidInputError("phase vector lengths do not match the channels")
    if config.beam.shape != (channels.h1_matrix.shape[1],):
        raise InvalidInputError("beam length does not match the BS array")
    psi1 = config.amp1 * np.diag(np.exp(1j * config.phases1))
    psi2 = config.amp2 * np.diag(np.exp(1j * config.phases2))
    return psi1, psi2


def snr_full(channels: ChannelSet, config: ReflectionConfig,
             params: SystemParams) -> float:
    """Received SNR by direct matrix evaluation of the double-reflection link.

    Numerator: transmit power times the squared magnitude of the composite
    scalar channel. Denominator: the two surfaces' amplification noise as
    propagated to the user, plus the user's own thermal noise.
    """
    psi1, psi2 = _reflection_matrices(channels, config)
    row2 = channels.h2_vec.conj() @ psi2                 # user-side combining row
    relay = row2 @ channels.g_matrix @ psi1              # second-hop noise path
    composite = relay @ channels.h1_matrix @ config.beam
    numerator = params.tx_power * abs(composite) ** 2
    denominator = (params.irs_noise * float(np.vdot(row2, row2).real)
                   + params.irs_noise * float(np.vdot(relay, relay).real)
                   + params.user_noise)
    return float(numerator / denominator)


def per_element_power(channels: ChannelSet, config: ReflectionConfig,
                      params: SystemParams) -> tuple[np.ndarray, np.ndarray]:
    """Radiated power of every element of each surface (signal plus noise)."""
    psi1, psi2 = _reflection_matrices(channels, config)
    fed1 = psi1 @ channels.h1_matrix @ config.beam
    power1 = (params.tx_power * np.abs(fed1) ** 2
              + params.irs_noise * config.amp1 ** 2)
    chain2 = psi2 @ channels.g_matrix @ psi1
    fed2 = chain2 @ channels.h1_matrix @ config.beam
    power2 = (params.tx_power * np.abs(fed2) ** 2
              + params.irs_noise * np.sum(np.abs(chain2) ** 2, axis=1)
              + params.irs_noise * config.amp2 ** 2)
    return power1, power2
