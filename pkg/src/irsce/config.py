"""System parameters, node geometry, and path-loss evaluation.

Everything downstream (channel synthesis, training design, estimation,
experiment harness) consumes the three types defined here. All types are
immutable after construction and all operations are pure.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields
from typing import Sequence

import numpy as np

from .errors import ConfigError, InvalidSize, ZeroDistance

SPEED_OF_LIGHT = 299792458.0

# 3GPP UMi path-loss constants (linear-scale intercept, distance exponent)
_NLOS_INTERCEPT = 10.0 ** (-2.8)
_NLOS_EXPONENT = 3.67
_LOS_INTERCEPT = 10.0 ** (-2.6)
_LOS_EXPONENT = 2.2

Coord = tuple[float, float]


def _as_coord(value) -> Coord:
    try:
        x, y = value
    except (TypeError, ValueError):
        raise ConfigError(f"expected a 2-D coordinate, got {value!r}") from None
    return (float(x), float(y))


@dataclass(frozen=True)
class SystemConfig:
    """All scalar system parameters plus node positions.

    Spacings ``delta_bs`` / ``delta_irs`` are in wavelengths. ``tau_s`` is the
    duration of one training sub-phase and ``tilde_tau`` one symbol, so the
    pilot length in symbols is ``t_s = tau_s / tilde_tau`` (must be an integer
    count of at least ``k_users`` so orthogonal pilots exist).
    """

    m_bs: int = 8
    k_users: int = 4
    l_irs: int = 4
    n_elements: int = 32
    s_subphases: int = 17
    tau_s: float = 50e-6
    tilde_tau: float = 5e-6
    p_tx: float = 0.1
    sigma2: float = 1e-15
    f_c: float = 2.5e9
    delta_bs: float = 0.5
    delta_irs: float = 0.5
    eta_bs: float = 0.0
    eta_irs: float = 0.95
    bs_position: Coord = (0.0, 0.0)
    irs_positions: tuple[Coord, ...] = ((100.0, 0.0), (0.0, 100.0), (-100.0, 0.0), (0.0, -100.0))
    user_positions: tuple[Coord, ...] = field(default=())

    def __post_init__(self):
        if not self.user_positions:
            # default: users evenly spread on a 30 m circle, offset 45 deg so
            # nobody sits on an IRS axis
            angles = [math.pi / 4 + 2 * math.pi * k / self.k_users for k in range(self.k_users)]
            object.__setattr__(
                self,
                "user_positions",
                tuple((30.0 * math.cos(a), 30.0 * math.sin(a)) for a in angles),
            )
        object.__setattr__(self, "bs_position", _as_coord(self.bs_position))
        object.__setattr__(self, "irs_positions", tuple(_as_coord(p) for p in self.irs_positions))
        object.__setattr__(self, "user_positions", tuple(_as_coord(p) for p in self.user_positions))
        self._validate()

    def _validate(self):
        for name in ("m_bs", "k_users", "l_irs", "n_elements", "s_subphases"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or v < 1:
                raise ConfigError(f"{name} must be an integer >= 1, got {v!r}")
        for name in ("tau_s", "tilde_tau", "p_tx", "f_c"):
            v = getattr(self, name)
            if not (v > 0):
                raise ConfigError(f"{name} must be strictly positive, got {v!r}")
        # sigma2 = 0 is legal: noiseless runs are part of the verification surface
        if not (self.sigma2 >= 0):
            raise ConfigError(f"sigma2 must be >= 0, got {self.sigma2!r}")
        for name in ("eta_bs", "eta_irs"):
            v = getattr(self, name)
            if not (0.0 <= v < 1.0):
                raise ConfigError(f"{name} must lie in [0, 1), got {v!r}")
        ratio = self.tau_s / self.tilde_tau
        if abs(ratio - round(ratio)) > 1e-9 * max(1.0, ratio):
            raise ConfigError(
                f"tau_s / tilde_tau = {ratio} is not an integer symbol count"
            )
        if round(ratio) < self.k_users:
            raise ConfigError(
                f"pilot length t_s = {round(ratio)} is shorter than k_users = {self.k_users}; "
                "orthogonal pilots do not exist"
            )
        if len(self.irs_positions) != self.l_irs:
            raise ConfigError(
                f"irs_positions has {len(self.irs_positions)} entries, expected l_irs = {self.l_irs}"
            )
        if len(self.user_positions) != self.k_users:
            raise ConfigError(
                f"user_positions has {len(self.user_positions)} entries, expected k_users = {self.k_users}"
            )

    @property
    def t_s(self) -> int:
        """Pilot length in symbols per sub-phase."""
        return round(self.tau_s / self.tilde_tau)

    @property
    def lambda_c(self) -> float:
        """Carrier wavelength in meters."""
        return SPEED_OF_LIGHT / self.f_c

    def to_dict(self) -> dict:
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        d["bs_position"] = list(d["bs_position"])
        d["irs_positions"] = [list(p) for p in d["irs_positions"]]
        d["user_positions"] = [list(p) for p in d["user_positions"]]
        return d

    def replace(self, **overrides) -> "SystemConfig":
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        d.update(overrides)
        return SystemConfig(**d)


@dataclass(frozen=True)
class Geometry:
    """Link distances (m) and azimuth angles (rad) derived from positions.

    ``aod_azimuth[l]`` is the departure azimuth at the BS toward IRS l;
    ``aoa_azimuth[l]`` the arrival azimuth at IRS l of the same path. The
    layout is 2-D, so elevation is identically zero.
    """

    d_bs_user: np.ndarray
    d_irs_user: np.ndarray
    d_bs_irs: np.ndarray
    aod_azimuth: np.ndarray
    aoa_azimuth: np.ndarray

    def __post_init__(self):
        for f_ in fields(self):
            arr = np.asarray(getattr(self, f_.name), dtype=np.float64)
            arr.setflags(write=False)
            object.__setattr__(self, f_.name, arr)


@dataclass(frozen=True)
class PathLossSet:
    """Linear-scale path losses for every link in the system."""

    beta_d: np.ndarray      # (K,) BS-user, NLoS
    beta_2: np.ndarray      # (L, K) IRS-user, NLoS
    beta_1: np.ndarray      # (L,) BS-IRS, LoS

    def __post_init__(self):
        for f_ in fields(self):
            arr = np.asarray(getattr(self, f_.name), dtype=np.float64)
            if arr.size and (np.any(arr <= 0.0) or np.any(arr > 1.0)):
                raise ConfigError(f"{f_.name} entries must lie in (0, 1]")
            arr.setflags(write=False)
            object.__setattr__(self, f_.name, arr)


def build_geometry(config: SystemConfig) -> Geometry:
    """Compute all link distances and BS-IRS azimuths from node positions.

    Raises ZeroDistance if any linked pair of nodes coincides.
    """
    bs = np.asarray(config.bs_position)
    irs = np.asarray(config.irs_positions, dtype=np.float64).reshape(config.l_irs, 2)
    users = np.asarray(config.user_positions, dtype=np.float64).reshape(config.k_users, 2)

    d_bs_user = np.linalg.norm(users - bs, axis=1)
    d_bs_irs = np.linalg.norm(irs - bs, axis=1)
    d_irs_user = np.linalg.norm(users[None, :, :] - irs[:, None, :], axis=2)

    for name, arr in (("BS-user", d_bs_user), ("BS-IRS", d_bs_irs), ("IRS-user", d_irs_user)):
        if np.any(arr == 0.0):
            raise ZeroDistance(f"{name} link has zero length")

    delta = irs - bs
    aod = np.arctan2(delta[:, 1], delta[:, 0])
    aoa = np.arctan2(-delta[:, 1], -delta[:, 0])
    # atan2's signed zero can land on -pi; keep angles in (-pi, pi]
    aod = np.where(aod <= -np.pi, aod + 2 * np.pi, aod)
    aoa = np.where(aoa <= -np.pi, aoa + 2 * np.pi, aoa)
    return Geometry(d_bs_user, d_irs_user, d_bs_irs, aod, aoa)


def pathloss_nlos(d):
    """Urban-micro NLoS path loss, linear scale: 10^(-2.8) * d^(-3.67)."""
    d = np.asarray(d, dtype=np.float64)
    if np.any(d <= 0.0):
        raise ZeroDistance("path loss undefined for d <= 0")
    out = _NLOS_INTERCEPT * d ** (-_NLOS_EXPONENT)
    return float(out) if out.ndim == 0 else out


def pathloss_los(d):
    """Urban-micro LoS path loss, linear scale: 10^(-2.6) * d^(-2.2)."""
    d = np.asarray(d, dtype=np.float64)
    if np.any(d <= 0.0):
        raise ZeroDistance("path loss undefined for d <= 0")
    out = _LOS_INTERCEPT * d ** (-_LOS_EXPONENT)
    return float(out) if out.ndim == 0 else out


def build_pathloss(geometry: Geometry) -> PathLossSet:
    """Evaluate the UMi path-loss model on every link of a geometry."""
    return PathLossSet(
        beta_d=pathloss_nlos(geometry.d_bs_user),
        beta_2=pathloss_nlos(geometry.d_irs_user),
        beta_1=pathloss_los(geometry.d_bs_irs),
    )


def min_subphases(n_elements: int, l_irs: int, m_bs: int, protocol: str) -> int:
    """Minimum sub-phase count for identifiability under each protocol.

    The reflect-then-split protocol needs ceil(N*L / M) + 1 sub-phases; the
    per-element cascaded protocol needs N*L + 1.
    """
    for name, v in (("n_elements", n_elements), ("l_irs", l_irs), ("m_bs", m_bs)):
        if v < 1:
            raise InvalidSize(f"{name} must be >= 1, got {v}")
    if protocol == "proposed":
        return -(-n_elements * l_irs // m_bs) + 1
    if protocol == "benchmark":
        return n_elements * l_irs + 1
    raise ValueError(f"unknown protocol {protocol!r}")


def config_from_dict(doc: dict) -> SystemConfig:
    """Build a SystemConfig from a plain dict (e.g. parsed JSON).

    Unknown keys are rejected so typos fail loudly instead of silently
    keeping a default.
    """
    if not isinstance(doc, dict):
        raise ConfigError(f"config document must be a JSON object, got {type(doc).__name__}")
    known = {f.name for f in fields(SystemConfig)}
    unknown = set(doc) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    coerced = dict(doc)
    for key in ("irs_positions", "user_positions"):
        if key in coerced:
            coerced[key] = tuple(_as_coord(p) for p in coerced[key])
    if "bs_position" in coerced:
        coerced["bs_position"] = _as_coord(coerced["bs_position"])
    try:
        return SystemConfig(**coerced)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path) -> SystemConfig:
    """Read a JSON config file mirroring SystemConfig field names."""
    # unreadable file stays an OSError (an I/O problem, not a config one);
    # only bad contents become ConfigError
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    return config_from_dict(doc)


def reference_config(**overrides) -> SystemConfig:
    """The documented default system: 8 BS antennas, 4 IRSs of 32 elements,
    4 users on a 30 m circle, IRSs on the axes at 100 m."""
    return SystemConfig(**overrides)
