"""Scenario files: line-oriented `key = value` with explicit unit suffixes.

Missing keys fall back to the default scenario (200 m link, 5 m altitude,
four users in a 30 m disk, 128 elements, 1 mW per element, -80 dBm noise
floors). Unknown keys are an error. Values accept the suffixes dBm, dB, W,
mW and m; noise entries given in dBm convert to watts via
10^((x - 30) / 10).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .model import Geometry, SystemParams


class ScenarioError(ValueError):
    """Malformed scenario text or a field violating its bounds."""


_UNIT_FACTORS = {"W": 1.0, "mW": 1e-3, "m": 1.0}
_INT_KEYS = {"M", "N", "L", "seed"}
_FLOAT_KEYS = {
    "D", "H", "zone_radius", "lambda", "d_I", "beta", "alpha", "P_B", "P_e",
    "sigma0", "sigmaI", "x_min",
}
_KNOWN_KEYS = _INT_KEYS | _FLOAT_KEYS | {"users"}


@dataclass(frozen=True)
class Scenario:
    """Resolved SI-unit inputs plus the user-draw seed."""

    bs_user_distance: float = 200.0
    irs_altitude: float = 5.0
    n_users: int = 4
    zone_radius: float = 30.0
    total_elements: int = 128
    n_bs_antennas: int = 4
    wavelength: float = 0.4
    element_spacing: float | None = None
    ref_gain: float = 1e-3
    pathloss_exp: float = 2.0
    tx_power: float = 1.0
    per_element_power: float = 1e-3
    user_noise: float = 1e-11
    irs_noise: float = 1e-11
    seed: int = 0
    x_min: float = 1.0
    users: tuple[tuple[float, float], ...] | None = None

    def system_params(self) -> SystemParams:
        return SystemParams(
            n_bs_antennas=self.n_bs_antennas,
            total_elements=self.total_elements,
            wavelength=self.wavelength,
            element_spacing=self.element_spacing,
            ref_gain=self.ref_gain,
            pathloss_exp=self.pathloss_exp,
            tx_power=self.tx_power,
            per_element_power=self.per_element_power,
            irs_noise=self.irs_noise,
            user_noise=self.user_noise,
            n_users=self.n_users,
        )

    def geometry(self) -> Geometry:
        """User layout: the fixed list when given, else a seeded disk draw."""
        if self.users is not None:
            users = self.users
        else:
            rng = np.random.default_rng(self.seed)
            radius = self.zone_radius * np.sqrt(rng.uniform(size=self.n_users))
            azimuth = rng.uniform(0.0, 2.0 * np.pi, size=self.n_users)
            users = tuple((float(r), float(a)) for r, a in zip(radius, azimuth))
        return Geometry(bs_user_distance=self.bs_user_distance,
                        irs_altitude=self.irs_altitude, users=users)


DEFAULT_SCENARIO = Scenario()


def _parse_number(key: str, token: str, line_no: int) -> float:
    parts = token.split()
    if len(parts) not in (1, 2):
        raise ScenarioError(f"line {line_no}: cannot parse value {token!r}")
    try:
        value = float(parts[0])
    except ValueError:
        raise ScenarioError(f"line {line_no}: {parts[0]!r} is not a number") from None
    if len(parts) == 1:
        return value
    unit = parts[1]
    if unit == "dBm":
        return 10.0 ** ((value - 30.0) / 10.0)
    if unit == "dB":
        return 10.0 ** (value / 10.0)
    if unit in _UNIT_FACTORS:
        return value * _UNIT_FACTORS[unit]
    raise ScenarioError(f"line {line_no}: unknown unit {unit!r} for key {key!r}")


def _parse_users(token: str, line_no: int) -> tuple[tuple[float, float], ...]:
    users = []
    for chunk in token.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = chunk.split(":")
        if len(parts) != 2:
            raise ScenarioError(
                f"line {line_no}: user entry {chunk!r} is not 'radius:azimuth'")
        try:
            users.append((float(parts[0]), float(parts[1])))
        except ValueError:
            raise ScenarioError(
                f"line {line_no}: user entry {chunk!r} is not numeric") from None
    if not users:
        raise ScenarioError(f"line {line_no}: empty user list")
    return tuple(users)


def parse_scenario(text: str) -> Scenario:
    """Parse scenario text; unknown keys and malformed lines are errors."""
    values: dict[str, object] = {}
    unknown: list[str] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ScenarioError(f"line {line_no}: expected 'key = value', got {raw!r}")
        key, _, token = line.partition("=")
        key, token = key.strip(), token.strip()
        if key not in _KNOWN_KEYS:
            unknown.append(key)
            continue
        if key == "users":
            values[key] = _parse_users(token, line_no)
        elif key in _INT_KEYS:
            number = _parse_number(key, token, line_no)
            if not float(number).is_integer():
                raise ScenarioError(f"line {line_no}: {key} must be an integer")
            values[key] = int(number)
        else:
            values[key] = _parse_number(key, token, line_no)
    if unknown:
        raise ScenarioError("unknown keys: " + ", ".join(sorted(unknown)))

    mapping = {
        "D": "bs_user_distance", "H": "irs_altitude", "L": "n_users",
        "zone_radius": "zone_radius", "M": "total_elements",
        "N": "n_bs_antennas", "lambda": "wavelength", "d_I": "element_spacing",
        "beta": "ref_gain", "alpha": "pathloss_exp", "P_B": "tx_power",
        "P_e": "per_element_power", "sigma0": "user_noise",
        "sigmaI": "irs_noise", "seed": "seed", "x_min": "x_min",
        "users": "users",
    }
    scenario = replace(DEFAULT_SCENARIO,
                       **{mapping[k]: v for k, v in values.items()})
    _validate(scenario)
    return scenario


def _validate(sc: Scenario) -> None:
    checks = [
        ("D", sc.bs_user_distance > 0),
        ("H", sc.irs_altitude > 0),
        ("L", sc.n_users >= 1),
        ("zone_radius", sc.zone_radius >= 0),
        ("M", sc.total_elements >= 1),
        ("N", sc.n_bs_antennas >= 1),
        ("lambda", sc.wavelength > 0),
        ("beta", sc.ref_gain > 0),
        ("alpha", sc.pathloss_exp > 0),
        ("P_B", sc.tx_power > 0),
        ("P_e", sc.per_element_power > 0),
        ("sigma0", sc.user_noise > 0),
        ("sigmaI", sc.irs_noise > 0),
        ("x_min", sc.x_min > 0),
        ("x_min", 3 * sc.x_min <= sc.bs_user_distance),
    ]
    for field_name, ok in checks:
        if not ok:
            raise ScenarioError(f"invalid value for field {field_name}")
    if sc.users is not None:
        if len(sc.users) != sc.n_users:
            raise ScenarioError(
                f"invalid value for field users: {len(sc.users)} entries for L={sc.n_users}")
        for r, theta in sc.users:
            if r < 0 or not 0 <= theta < 2 * math.pi:
                raise ScenarioError("invalid value for field users")


def format_scenario(sc: Scenario) -> str:
    """Serialize so that parse_scenario round-trips to an equivalent scenario."""
    lines = [
        f"D = {sc.bs_user_distance!r} m",
        f"H = {sc.irs_altitude!r} m",
        f"L = {sc.n_users}",
        f"zone_radius = {sc.zone_radius!r} m",
        f"M = {sc.total_elements}",
        f"N = {sc.n_bs_antennas}",
        f"lambda = {sc.wavelength!r} m",
        f"beta = {sc.ref_gain!r}",
        f"alpha = {sc.pathloss_exp!r}",
        f"P_B = {sc.tx_power!r} W",
        f"P_e = {sc.per_element_power!r} W",
        f"sigma0 = {sc.user_noise!r} W",
        f"sigmaI = {sc.irs_noise!r} W",
        f"seed = {sc.seed}",
        f"x_min = {sc.x_min!r} m",
    ]
    if sc.element_spacing is not None:
        lines.append(f"d_I = {sc.element_spacing!r} m")
    if sc.users is not None:
        entries = "; ".join(f"{r!r}:{theta!r}" for r, theta in sc.users)
        lines.append(f"users = {entries}")
    return "\n".join(lines) + "\n"
