"""Policy observation assembly: noise injection, scaling, history stacking,
and the action-to-joint-target conversion.

One step's observation is 58 entries:

    object state   13  position (3), quaternion wxyz (4), linear velocity (3),
                       angular velocity (3), all in the robot frame
    proprioception 30  gravity direction (3), base angular velocity (3),
                       joint positions (12), joint velocities (12)
    command         3
    last action    12

Each group receives symmetric uniform noise and a fixed scale; orientation
noise is applied on the Euler angles *before* conversion to a quaternion.
Until the object first touches the sensor, the 13 object entries are replaced
by standard-normal noise so the policy cannot exploit ground truth it would
not have on hardware.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

STEP_DIM = 58
HISTORY_LEN = 6
FLAT_DIM = 340

_OBJ_SLICE = slice(0, 13)


@dataclass(frozen=True)
class GroupNoise:
    noise: float
    scale: float


@dataclass(frozen=True)
class ObsNoiseSpec:
    obj_pos: GroupNoise = GroupNoise(0.01, 1.0)
    obj_linvel: GroupNoise = GroupNoise(0.2, 0.5)
    obj_euler: GroupNoise = GroupNoise(0.05, 1.0)  # scale applies to the quaternion
    obj_angvel: GroupNoise = GroupNoise(0.2, 0.25)
    gravity: GroupNoise = GroupNoise(0.05, 1.0)
    base_angvel: GroupNoise = GroupNoise(0.2, 0.25)
    joint_pos: GroupNoise = GroupNoise(0.01, 1.0)
    joint_vel: GroupNoise = GroupNoise(1.5, 0.05)
    command: GroupNoise = GroupNoise(0.0, 1.0)
    last_action: GroupNoise = GroupNoise(0.0, 1.0)

    def __post_init__(self):
        for name, g in self.__dict__.items():
            if g.noise < 0.0 or g.scale <= 0.0:
                raise ValueError(f"bad noise/scale for group {name}")


@dataclass
class RawObservation:
    """Un-noised simulator readings for one tick."""

    obj_pos: np.ndarray  # (3,)
    obj_euler: np.ndarray  # (3,) roll, pitch, yaw
    obj_linvel: np.ndarray  # (3,)
    obj_angvel: np.ndarray  # (3,)
    gravity: np.ndarray  # (3,)
    base_angvel: np.ndarray  # (3,)
    joint_pos: np.ndarray  # (12,)
    joint_vel: np.ndarray  # (12,)
    command: np.ndarray  # (3,)
    last_action: np.ndarray  # (12,)


def quat_from_euler(roll: float, pitch: float, yaw: float) -> np.ndarray:
    """Unit quaternion (w, x, y, z) from roll-pitch-yaw."""
    cr, sr = math.cos(roll / 2), math.sin(roll / 2)
    cp, sp = math.cos(pitch / 2), math.sin(pitch / 2)
    cy, sy = math.cos(yaw / 2), math.sin(yaw / 2)
    w = cr * cp * cy + sr * sp * sy
    x = sr * cp * cy - cr * sp * sy
    y = cr * sp * cy + sr * cp * sy
    z = cr * cp * sy - sr * sp * cy
    norm = math.sqrt(w * w + x * x + y * y + z * z)
    return np.array([w / norm, x / norm, y / norm, z / norm])


_RAW_GROUPS = (
    ("obj_pos", "obj_pos", 3),
    ("obj_euler", "obj_euler", 3),
    ("obj_linvel", "obj_linvel", 3),
    ("obj_angvel", "obj_angvel", 3),
    ("gravity", "gravity", 3),
    ("base_angvel", "base_angvel", 3),
    ("joint_pos", "joint_pos", 12),
    ("joint_vel", "joint_vel", 12),
    ("command", "command", 3),
    ("last_action", "last_action", 12),
)
_RAW_DIM = sum(n for _, _, n in _RAW_GROUPS)  # 57: euler not yet a quaternion

_layout_cache: dict[ObsNoiseSpec, tuple[np.ndarray, np.ndarray]] = {}


def _noise_and_scale(spec: ObsNoiseSpec) -> tuple[np.ndarray, np.ndarray]:
    """Per-entry noise ranges and scales over the 57 raw entries."""
    cached = _layout_cache.get(spec)
    if cached is None:
        noise = np.concatenate(
            [np.full(n, getattr(spec, g).noise) for g, _, n in _RAW_GROUPS]
        )
        scale = np.concatenate(
            [np.full(n, getattr(spec, g).scale) for g, _, n in _RAW_GROUPS]
        )
        cached = _layout_cache[spec] = (noise, scale)
    return cached


def build_observation(
    raw: RawObservation,
    spec: ObsNoiseSpec,
    rng: np.random.Generator,
    object_contacted: bool = True,
) -> np.ndarray:
    """Assemble the 58-entry observation for one tick.

    All uniform noise for the tick comes from one rng draw over the 57 raw
    entries (positions, Euler orientation, velocities, proprioception,
    command, action); before first object contact a second draw of 13
    standard normals replaces the object block.  Keep this draw order stable:
    replays rely on it for bit-exact determinism.
    """
    noise_range, scale = _noise_and_scale(spec)
    flat = np.concatenate(
        [np.asarray(getattr(raw, attr), dtype=np.float64) for _, attr, _ in _RAW_GROUPS]
    )
    if flat.shape != (_RAW_DIM,):
        raise ValueError("raw observation groups have wrong dimensions")
    noised = flat + noise_range * rng.uniform(-1.0, 1.0, _RAW_DIM)
    scaled = scale * noised

    obs = np.empty(STEP_DIM)
    obs[0:3] = scaled[0:3]
    obs[3:7] = spec.obj_euler.scale * quat_from_euler(*noised[3:6])
    obs[7:13] = scaled[6:12]
    obs[13:] = scaled[12:]
    if not object_contacted:
        obs[_OBJ_SLICE] = rng.standard_normal(13)
    return obs


class ObsWindow:
    """Fixed-length observation history with a pinned flattened layout.

    Internally the newest ``history_len`` steps are kept in full.  The
    flattened policy input concatenates them oldest to newest and clips the
    tail to ``flat_dim`` entries, so the newest step's trailing action entries
    are the ones not repeated.  Missing history (cold start) reads as zeros.
    """

    def __init__(
        self,
        history_len: int = HISTORY_LEN,
        step_dim: int = STEP_DIM,
        flat_dim: int = FLAT_DIM,
    ):
        if not 0 < flat_dim <= history_len * step_dim:
            raise ValueError("flat_dim must lie in (0, history_len * step_dim]")
        self.history_len = history_len
        self.step_dim = step_dim
        self.flat_dim = flat_dim
        self._steps: deque[np.ndarray] = deque(
            (np.zeros(step_dim) for _ in range(history_len)), maxlen=history_len
        )

    def push(self, obs) -> "ObsWindow":
        obs = np.asarray(obs, dtype=np.float64)
        if obs.shape != (self.step_dim,):
            raise ValueError(f"observation must have shape ({self.step_dim},)")
        self._steps.append(obs.copy())
        return self

    def history(self) -> np.ndarray:
        """Retained steps, oldest first, shape (history_len, step_dim)."""
        return np.stack(list(self._steps))

    def flattened(self) -> np.ndarray:
        return np.concatenate(list(self._steps))[: self.flat_dim]


@dataclass(frozen=True)
class ActionSpec:
    alpha_action: float = 0.25
    clip: float = 100.0
    kp: float = 25.0
    kd: float = 0.5
    q_default: np.ndarray = field(
        default_factory=lambda: np.array((0.0, 0.9, -1.8) * 4)
    )

    def __post_init__(self):
        if self.clip <= 0.0:
            raise ValueError("clip bound must be positive")


def action_to_target(a, spec: ActionSpec) -> np.ndarray:
    """Joint position targets: clip, scale, offset from the default pose."""
    a = np.asarray(a, dtype=np.float64)
    return spec.q_default + spec.alpha_action * np.clip(a, -spec.clip, spec.clip)


def pd_torque(q, q_dot, target, spec: ActionSpec) -> np.ndarray:
    """Torque of the position controller tracking ``target``."""
    return spec.kp * (np.asarray(target) - np.asarray(q)) - spec.kd * np.asarray(q_dot)
