"""Per-tick reward suite for the transport task.

Every term is returned unweighted in a :class:`RewardBreakdown`; ``total`` is
the weighted sum.  Tracking terms use exponential kernels, everything else is
a penalty (non-negative value, negative weight).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

_DEFAULT_Q = (0.0, 0.9, -1.8) * 4  # hip, thigh, calf per leg
_DEFAULT_QMIN = (-0.86, -0.69, -2.82) * 4
_DEFAULT_QMAX = (0.86, 4.5, -0.89) * 4


def _vec(x, n: int) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if arr.shape != (n,):
        raise ValueError(f"expected shape ({n},), got {arr.shape}")
    return arr


def _mat(x, r: int, c: int) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if arr.shape != (r, c):
        raise ValueError(f"expected shape ({r}, {c}), got {arr.shape}")
    return arr


@dataclass
class RobotState:
    """Torso, joint and foot state for one control tick.

    Positions/orientations marked world are in the world frame; velocities of
    the torso are expressed in the robot frame.  ``body_ground_force`` is the
    magnitude of any ground contact force on the torso or hips (used for
    termination only).
    """

    p_w: np.ndarray
    v_r: np.ndarray
    theta_w: np.ndarray
    w_r: np.ndarray
    q: np.ndarray
    q_dot: np.ndarray
    q_ddot: np.ndarray
    tau: np.ndarray
    foot_pos_w: np.ndarray  # (4, 3)
    foot_vel_w: np.ndarray  # (4, 3)
    foot_force_w: np.ndarray  # (4, 3)
    thigh_calf_force: np.ndarray  # (8,) contact force magnitudes
    body_ground_force: float = 0.0
    q_default: np.ndarray = field(default_factory=lambda: np.array(_DEFAULT_Q))
    q_min: np.ndarray = field(default_factory=lambda: np.array(_DEFAULT_QMIN))
    q_max: np.ndarray = field(default_factory=lambda: np.array(_DEFAULT_QMAX))

    def __post_init__(self):
        self.p_w = _vec(self.p_w, 3)
        self.v_r = _vec(self.v_r, 3)
        self.theta_w = _vec(self.theta_w, 3)
        self.w_r = _vec(self.w_r, 3)
        for name in ("q", "q_dot", "q_ddot", "tau", "q_default", "q_min", "q_max"):
            setattr(self, name, _vec(getattr(self, name), 12))
        self.foot_pos_w = _mat(self.foot_pos_w, 4, 3)
        self.foot_vel_w = _mat(self.foot_vel_w, 4, 3)
        self.foot_force_w = _mat(self.foot_force_w, 4, 3)
        self.thigh_calf_force = _vec(self.thigh_calf_force, 8)
        if np.any(self.q_min > self.q_max):
            raise ValueError("q_min must not exceed q_max")

    @classmethod
    def unchecked(cls, **kwargs) -> "RobotState":
        """Construct without re-validating shapes (hot replay loops feed
        pre-validated array views)."""
        self = object.__new__(cls)
        self.__dict__.update(kwargs)
        return self


@dataclass
class ObjectState:
    """Object pose/velocity in the robot frame plus its world xy position."""

    p_r: np.ndarray
    v_r: np.ndarray
    theta_r: np.ndarray
    w_r: np.ndarray
    p_w_xy: np.ndarray

    def __post_init__(self):
        self.p_r = _vec(self.p_r, 3)
        self.v_r = _vec(self.v_r, 3)
        self.theta_r = _vec(self.theta_r, 3)
        self.w_r = _vec(self.w_r, 3)
        self.p_w_xy = _vec(self.p_w_xy, 2)
        for name in ("p_r", "v_r", "theta_r", "w_r", "p_w_xy"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise ValueError(f"non-finite object state in {name}")

    @classmethod
    def unchecked(cls, **kwargs) -> "ObjectState":
        self = object.__new__(cls)
        self.__dict__.update(kwargs)
        return self


@dataclass(frozen=True)
class RewardConfig:
    # weights, one per term
    w_alive: float = 10.0
    w_track_vxy: float = 1.0
    w_track_wz: float = 0.5
    w_obj_xy: float = -50.0
    w_obj_yaw: float = -0.1
    w_drag: float = -1.0
    w_slip: float = -0.1
    w_gait: float = 0.5
    w_obj_zvel: float = -0.5
    w_obj_roll: float = -0.05
    w_obj_danger: float = -50.0
    w_base_height: float = -0.5
    w_base_zvel: float = -1.0
    w_base_rp: float = -1.0
    w_base_rpvel: float = -0.2
    w_joint_dev: float = -0.5
    w_joint_limits: float = -10.0
    w_joint_vel: float = -5e-3
    w_joint_acc: float = -5e-6
    w_torque: float = -2.5e-4
    w_action_rate: float = -0.75
    w_collision: float = -5.0
    # kernels and thresholds
    sigma_vxy: float = 0.25
    sigma_wz: float = 0.25
    h_z_th: float = 0.03  # m, foot height below which dragging is checked
    v_xy_th: float = 0.25  # (m/s)^2, squared lateral foot speed threshold
    F_z_th: float = 1.0  # N, vertical force that counts as stance for slip
    f_th: float = 0.1  # N, thigh/calf collision force threshold
    h_target: float = 0.30  # m, nominal torso height
    alpha_stance: float = 1.5  # joint-deviation multiplier while standing
    # object danger bounds (robot frame)
    x_max: float = 0.15
    y_max: float = 0.12
    z_max: float = 0.20
    v_xy_max: float = 1.0
    v_th: float = 0.1  # m/s, actual-motion threshold for move/stand split
    object_fall_offset: float = 0.05  # m below torso plane that terminates
    # action-to-target conversion for the action-rate term
    action_scale: float = 0.25
    action_clip: float = 100.0


_TERMS = (
    "alive", "track_vxy", "track_wz", "obj_xy", "obj_yaw", "drag", "slip",
    "gait", "obj_zvel", "obj_roll", "obj_danger", "base_height", "base_zvel",
    "base_rp", "base_rpvel", "joint_dev", "joint_limits", "joint_vel",
    "joint_acc", "torque", "action_rate", "collision",
)


@dataclass
class RewardBreakdown:
    alive: float = 0.0
    track_vxy: float = 0.0
    track_wz: float = 0.0
    obj_xy: float = 0.0
    obj_yaw: float = 0.0
    drag: float = 0.0
    slip: float = 0.0
    gait: float = 0.0
    obj_zvel: float = 0.0
    obj_roll: float = 0.0
    obj_danger: float = 0.0
    base_height: float = 0.0
    base_zvel: float = 0.0
    base_rp: float = 0.0
    base_rpvel: float = 0.0
    joint_dev: float = 0.0
    joint_limits: float = 0.0
    joint_vel: float = 0.0
    joint_acc: float = 0.0
    torque: float = 0.0
    action_rate: float = 0.0
    collision: float = 0.0
    total: float = 0.0

    @staticmethod
    def term_names() -> tuple[str, ...]:
        return _TERMS

    def as_row(self) -> list[float]:
        return [float(getattr(self, t)) for t in _TERMS] + [float(self.total)]


def term_weights(cfg: RewardConfig) -> dict[str, float]:
    return {t: getattr(cfg, "w_" + t) for t in _TERMS}


def eval_rewards(
    robot: RobotState,
    obj: ObjectState,
    contacts,
    gait_r: float,
    cmd,
    action,
    last_action,
    cfg: RewardConfig,
    terminated: bool = False,
) -> RewardBreakdown:
    """Evaluate every reward term for one tick.

    ``contacts`` is unused by the terms themselves (the gait reward arrives
    pre-computed) but kept in the signature so callers pass one consistent
    tick snapshot.
    """
    cmd = _vec(cmd, 3)
    action = _vec(action, 12)
    last_action = _vec(last_action, 12)

    # scalar math on the small fixed-size pieces keeps replaying long logs
    # cheap; the formulas are unchanged
    v_r = robot.v_r.tolist()
    w_r = robot.w_r.tolist()
    p_w = robot.p_w.tolist()
    theta_w = robot.theta_w.tolist()
    obj_p_r = obj.p_r.tolist()
    obj_v_r = obj.v_r.tolist()
    obj_theta_r = obj.theta_r.tolist()
    obj_w_r = obj.w_r.tolist()
    obj_p_w = obj.p_w_xy.tolist()
    cmd_l = cmd.tolist()

    b = RewardBreakdown()
    b.alive = 0.0 if terminated else 1.0
    b.track_vxy = math.exp(
        -math.hypot(v_r[0] - cmd_l[0], v_r[1] - cmd_l[1]) / cfg.sigma_vxy
    )
    b.track_wz = math.exp(-abs(w_r[2] - cmd_l[2]) / cfg.sigma_wz)
    b.obj_xy = math.hypot(obj_p_w[0] - p_w[0], obj_p_w[1] - p_w[1])
    b.obj_yaw = abs(obj_theta_r[2])

    lat_speed_sq = robot.foot_vel_w[:, 0] ** 2 + robot.foot_vel_w[:, 1] ** 2
    low = robot.foot_pos_w[:, 2] <= cfg.h_z_th
    b.drag = float(np.count_nonzero(low & (lat_speed_sq >= cfg.v_xy_th)))
    loaded = robot.foot_force_w[:, 2] >= cfg.F_z_th
    b.slip = float(np.sqrt(lat_speed_sq) @ loaded)

    b.gait = gait_r
    b.obj_zvel = abs(obj_v_r[2])
    b.obj_roll = abs(obj_theta_r[0]) + abs(obj_w_r[0])
    danger = (
        abs(obj_p_r[0]) > cfg.x_max
        or abs(obj_p_r[1]) > cfg.y_max
        or abs(obj_p_r[2]) > cfg.z_max
        or math.hypot(obj_v_r[0], obj_v_r[1]) > cfg.v_xy_max
    )
    b.obj_danger = 1.0 if danger else 0.0

    b.base_height = (p_w[2] - cfg.h_target) ** 2
    b.base_zvel = v_r[2] ** 2
    b.base_rp = theta_w[0] ** 2 + theta_w[1] ** 2
    b.base_rpvel = abs(w_r[0]) + abs(w_r[1])

    moving = (
        cmd_l[0] != 0.0 or cmd_l[1] != 0.0 or cmd_l[2] != 0.0
        or math.hypot(v_r[0], v_r[1]) > cfg.v_th
    )
    dq = robot.q - robot.q_default
    b.joint_dev = math.sqrt(dq @ dq) * (1.0 if moving else cfg.alpha_stance)
    b.joint_limits = float(
        np.maximum(robot.q_min - robot.q, 0.0).sum()
        + np.maximum(robot.q - robot.q_max, 0.0).sum()
    )
    b.joint_vel = math.sqrt(robot.q_dot @ robot.q_dot)
    b.joint_acc = math.sqrt(robot.q_ddot @ robot.q_ddot)
    b.torque = math.sqrt(robot.tau @ robot.tau)

    # target deltas: q_default cancels, only the clipped-scaled actions differ
    clipped = np.clip(action, -cfg.action_clip, cfg.action_clip)
    clipped_last = np.clip(last_action, -cfg.action_clip, cfg.action_clip)
    b.action_rate = float(np.abs(cfg.action_scale * (clipped - clipped_last)).sum())

    b.collision = float(np.count_nonzero(robot.thigh_calf_force > cfg.f_th))

    b.total = (
        cfg.w_alive * b.alive + cfg.w_track_vxy * b.track_vxy
        + cfg.w_track_wz * b.track_wz + cfg.w_obj_xy * b.obj_xy
        + cfg.w_obj_yaw * b.obj_yaw + cfg.w_drag * b.drag + cfg.w_slip * b.slip
        + cfg.w_gait * b.gait + cfg.w_obj_zvel * b.obj_zvel
        + cfg.w_obj_roll * b.obj_roll + cfg.w_obj_danger * b.obj_danger
        + cfg.w_base_height * b.base_height + cfg.w_base_zvel * b.base_zvel
        + cfg.w_base_rp * b.base_rp + cfg.w_base_rpvel * b.base_rpvel
        + cfg.w_joint_dev * b.joint_dev + cfg.w_joint_limits * b.joint_limits
        + cfg.w_joint_vel * b.joint_vel + cfg.w_joint_acc * b.joint_acc
        + cfg.w_torque * b.torque + cfg.w_action_rate * b.action_rate
        + cfg.w_collision * b.collision
    )
    return b


def check_termination(
    robot: RobotState, obj: ObjectState, cfg: RewardConfig
) -> tuple[bool, Optional[str]]:
    """Early-termination test: object fell below the torso, or the torso/hips
    touch the ground."""
    if obj.p_r[2] < -cfg.object_fall_offset:
        return True, "object_fallen"
    if robot.body_ground_force > 0.0:
        return True, "body_ground_contact"
    return False, None
