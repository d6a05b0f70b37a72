"""Downlink multicloud network: layout, fading channels, SINR rewards.

Distances are in meters, powers in watts. Every cloud transmits at full
fixed power through the all-ones beamformer, so a user's reward for a cloud
never depends on how the other users are associated.
"""
from __future__ import annotations

import csv
import dataclasses
import hashlib
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .chcaa import solve_chcaa
from .gap import GapInstance, InvalidInputError

__all__ = [
    "SimConfig",
    "NetworkLayout",
    "ChannelRealization",
    "hex_centers",
    "generate_layout",
    "pathloss_db",
    "sample_channels",
    "beamformers",
    "sinr",
    "compute_rewards",
    "baseline_instance",
    "baseline_bs_association",
    "load_config",
    "dump_config",
    "write_rewards_csv",
]

MIN_DISTANCE = 10.0


def dbm_to_watt(dbm: float) -> float:
    return 10 ** ((dbm - 30) / 10)


@dataclass(frozen=True)
class SimConfig:
    num_clouds: int = 7
    bs_per_cloud: int = 3
    num_users: int = 28
    intercell_distance: float = 500.0
    tx_power_per_cloud: float = 1.0
    noise_power: float = dbm_to_watt(-100.0)
    pathloss_intercept_db: float = 128.1      # at 1 km
    pathloss_exponent: float = 3.76           # slope is 10 * exponent dB/decade
    shadowing_std_db: float = 0.0             # 0 disables log-normal shadowing
    rng_seed: int = 0

    def __post_init__(self):
        for name in ("num_clouds", "bs_per_cloud", "num_users"):
            if int(getattr(self, name)) < 1:
                raise InvalidInputError(f"{name} must be >= 1")
        for name in ("intercell_distance", "tx_power_per_cloud", "noise_power",
                     "pathloss_exponent"):
            if not getattr(self, name) > 0:
                raise InvalidInputError(f"{name} must be positive")
        if self.shadowing_std_db < 0:
            raise InvalidInputError("shadowing_std_db must be >= 0")

    def replace(self, **changes) -> "SimConfig":
        return dataclasses.replace(self, **changes)

    def digest(self) -> str:
        """Short stable hash of every field, used to tag result files."""
        return hashlib.sha256(dump_config(self).encode()).hexdigest()[:16]


@dataclass(frozen=True, eq=False)
class NetworkLayout:
    cloud_positions: np.ndarray   # (C, 2)
    bs_positions: np.ndarray      # (C, B, 2)
    user_positions: np.ndarray    # (U, 2)


@dataclass(frozen=True, eq=False)
class ChannelRealization:
    gains: np.ndarray             # (C, B, U) complex, h_cbu
    pathloss: np.ndarray          # (C, B, U) linear large-scale gain

    def cloud_vector(self, c: int, u: int) -> np.ndarray:
        """h_cu, the length-B channel from cloud c's base stations to user u."""
        return self.gains[c, :, u]


# -- layout -----------------------------------------------------------------

_AXIAL_DIRECTIONS = [(1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1)]


def hex_centers(n: int, spacing: float) -> np.ndarray:
    """First ``n`` cell centers of a hexagonal grid, ring by ring from the origin.

    Seven cells give the usual center cell plus six neighbors at ``spacing``.
    """
    axial = [(0, 0)]
    ring = 1
    while len(axial) < n:
        q, r = ring * _AXIAL_DIRECTIONS[4][0], ring * _AXIAL_DIRECTIONS[4][1]
        for side in range(6):
            for _ in range(ring):
                axial.append((q, r))
                dq, dr = _AXIAL_DIRECTIONS[side]
                q, r = q + dq, r + dr
        ring += 1
    axial = np.array(axial[:n], dtype=float)
    # pointy-side-up cells: neighbor centers at 0, 60, ..., 300 degrees
    x = spacing * (axial[:, 0] + axial[:, 1] / 2)
    y = spacing * (math.sqrt(3) / 2) * axial[:, 1]
    return np.column_stack([x, y])


def _in_hexagon(points: np.ndarray, apothem: float) -> np.ndarray:
    inside = np.ones(len(points), dtype=bool)
    for deg in (0.0, 60.0, 120.0):
        n = np.array([math.cos(math.radians(deg)), math.sin(math.radians(deg))])
        inside &= np.abs(points @ n) <= apothem
    return inside


def _drop_users(rng: np.random.Generator, centers: np.ndarray, spacing: float,
                count: int) -> np.ndarray:
    # all cells have equal area: pick a cell, then rejection-sample inside it
    apothem = spacing / 2
    circumradius = spacing / math.sqrt(3)
    cells = rng.integers(0, len(centers), size=count)
    out = np.empty((count, 2))
    filled = 0
    while filled < count:
        need = count - filled
        cand = rng.uniform(-circumradius, circumradius, size=(2 * need + 8, 2))
        cand = cand[_in_hexagon(cand, apothem)][:need]
        out[filled:filled + len(cand)] = cand
        filled += len(cand)
    return out + centers[cells]


def generate_layout(config: SimConfig, rng: Optional[np.random.Generator] = None) -> NetworkLayout:
    if rng is None:
        rng = np.random.default_rng(config.rng_seed)
    d = config.intercell_distance
    centers = hex_centers(config.num_clouds, d)
    B = config.bs_per_cloud
    angles = np.radians(90.0 + 360.0 * np.arange(B) / B)
    offsets = (d / 3) * np.column_stack([np.cos(angles), np.sin(angles)])
    bs = centers[:, None, :] + offsets[None, :, :]
    users = _drop_users(rng, centers, d, config.num_users)
    return NetworkLayout(centers, bs, users)


# -- channels ---------------------------------------------------------------

def pathloss_db(distance_m, config: SimConfig = SimConfig()) -> np.ndarray:
    """Large-scale loss in dB (positive number), distance clamped to 10 m."""
    d_km = np.maximum(np.asarray(distance_m, dtype=float), MIN_DISTANCE) / 1000.0
    return config.pathloss_intercept_db + 10 * config.pathloss_exponent * np.log10(d_km)


def sample_channels(layout: NetworkLayout, config: SimConfig,
                    rng: Optional[np.random.Generator] = None) -> ChannelRealization:
    """Rayleigh fading on top of distance pathloss (and optional shadowing)."""
    if rng is None:
        # independent of the layout stream so that channels alone can be redrawn
        rng = np.random.default_rng([config.rng_seed, 1])
    diff = layout.bs_positions[:, :, None, :] - layout.user_positions[None, None, :, :]
    dist = np.hypot(diff[..., 0], diff[..., 1])
    loss_db = pathloss_db(dist, config)
    if config.shadowing_std_db > 0:
        loss_db = loss_db + rng.normal(0.0, config.shadowing_std_db, size=dist.shape)
    large_scale = 10 ** (-loss_db / 10)
    fading = (rng.standard_normal(dist.shape) + 1j * rng.standard_normal(dist.shape)) / math.sqrt(2)
    return ChannelRealization(np.sqrt(large_scale) * fading, large_scale)


def beamformers(config: SimConfig) -> np.ndarray:
    """(C, B) fixed beamformers: the all-ones vector at total power P_c per cloud."""
    amp = math.sqrt(config.tx_power_per_cloud / config.bs_per_cloud)
    return np.full((config.num_clouds, config.bs_per_cloud), amp, dtype=complex)


def _received_power(gains: np.ndarray, w: np.ndarray) -> np.ndarray:
    # |h_cu^H w_c|^2 for every (c, u)
    return np.abs(np.einsum("cbu,cb->cu", gains.conj(), w)) ** 2


def sinr(received: np.ndarray, noise_power: float) -> np.ndarray:
    """Per-(transmitter, user) SINR, treating every other transmitter as interference."""
    interference = received.sum(axis=0, keepdims=True) - received
    return received / (noise_power + interference)


def compute_rewards(channels: ChannelRealization, config: SimConfig) -> GapInstance:
    """Spectral-efficiency rewards log2(1 + SINR_cu) with unit weights and K_c = B."""
    received = _received_power(channels.gains, beamformers(config))
    r = np.log2(1 + sinr(received, config.noise_power))
    C, U = r.shape
    return GapInstance(r, np.ones((C, U), dtype=np.int64),
                       np.full(C, config.bs_per_cloud, dtype=np.int64))


def baseline_instance(channels: ChannelRealization, config: SimConfig) -> GapInstance:
    """Cloud-less network: every base station is its own single-antenna cell."""
    C, B, U = channels.gains.shape
    per_bs = config.tx_power_per_cloud / config.bs_per_cloud
    received = per_bs * np.abs(channels.gains.reshape(C * B, U)) ** 2
    r = np.log2(1 + sinr(received, config.noise_power))
    return GapInstance(r, np.ones((C * B, U), dtype=np.int64), np.ones(C * B, dtype=np.int64))


def baseline_bs_association(channels: ChannelRealization, config: SimConfig) -> tuple:
    """Greedy single-BS association; BS index is ``c * B + b``."""
    return solve_chcaa(baseline_instance(channels, config))


# -- config and export ------------------------------------------------------

_FIELDS = {f.name: f.type for f in dataclasses.fields(SimConfig)}
_INT_FIELDS = {"num_clouds", "bs_per_cloud", "num_users", "rng_seed"}


def load_config(path, **overrides) -> SimConfig:
    """Read a ``key = value`` file. Blank lines and ``#`` comments are ignored."""
    values = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, val = (s.strip() for s in line.partition("="))
            if not sep or key not in _FIELDS:
                raise InvalidInputError(f"{path}:{lineno}: expected one of "
                                        f"{', '.join(_FIELDS)} as 'key = value'")
            try:
                values[key] = int(val) if key in _INT_FIELDS else float(val)
            except ValueError:
                raise InvalidInputError(f"{path}:{lineno}: bad value for {key}: {val!r}") from None
    values.update({k: v for k, v in overrides.items() if v is not None})
    return SimConfig(**values)


def dump_config(config: SimConfig) -> str:
    return "".join(f"{name} = {getattr(config, name)!r}\n" for name in _FIELDS)


def write_rewards_csv(instance: GapInstance, path) -> None:
    """One row per cloud, one column per user."""
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["cloud"] + [f"user{u + 1}" for u in range(instance.num_users)])
        for c, row in enumerate(instance.rewards):
            out.writerow([c + 1] + [repr(float(x)) for x in row])
