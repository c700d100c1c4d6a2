"""Trajectory replay: CSV schemas, the per-tick episode engine, and the
fidelity / gait-symmetry reports.

A trajectory file is a headed CSV with one row per tick.  The planar object
pose drives the tactile models; optional column groups add a reference
tactile map (fidelity scoring), foot contacts (gait analysis) and the full
robot/object state (reward replay).  Groups are all-or-nothing so a file
either supports an analysis or fails loudly.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace as dc_replace
from typing import Optional

import numpy as np

from .config import SchemaError, SimConfig, TaskScoreParams
from .curriculum import sample_command, sample_episode, saturate
from .gait import LEG_NAMES, GaitTracker, gait_reward
from .observations import ObsWindow, RawObservation, action_to_target, build_observation, pd_torque
from .rewards import ObjectState, RewardBreakdown, RobotState, check_termination, eval_rewards
from .signals import DelayBuffer, TactileFrame, binarize, flip_noise
from .tactile import (
    GRAVITY,
    CylinderPose,
    active_taxels,
    active_taxels_batch,
    force_from_active,
    force_map,
)

# --------------------------------------------------------------------------
# trajectory schema

BASE_COLS = ("timestamp", "obj_x", "obj_y", "obj_yaw")
IGNORED_COLS = ("obj_z", "obj_roll", "obj_pitch")
CONTACT_COLS = tuple(f"contact_{leg}" for leg in LEG_NAMES)


def reference_cols(rows: int, cols: int) -> tuple[str, ...]:
    return tuple(f"ref_taxel_{i}" for i in range(rows * cols))


def state_cols() -> tuple[str, ...]:
    cols = [f"base_pos_{a}" for a in "xyz"]
    cols += [f"base_vel_{a}" for a in "xyz"]
    cols += ["base_roll", "base_pitch", "base_yaw"]
    cols += [f"base_angvel_{a}" for a in "xyz"]
    for group in ("joint_pos", "joint_vel", "joint_acc", "joint_torque"):
        cols += [f"{group}_{i}" for i in range(12)]
    for group in ("foot_pos", "foot_vel", "foot_force"):
        cols += [f"{group}_{leg}_{a}" for leg in LEG_NAMES for a in "xyz"]
    cols += [f"limb_force_{i}" for i in range(8)]
    cols += ["body_ground_force"]
    for group in ("obj_pos_r", "obj_vel_r", "obj_euler_r", "obj_angvel_r"):
        cols += [f"{group}_{a}" for a in "xyz"]
    cols += ["obj_world_x", "obj_world_y"]
    cols += ["cmd_vx", "cmd_vy", "cmd_wz"]
    cols += [f"action_{i}" for i in range(12)]
    return tuple(cols)


STATE_COLS = state_cols()


@dataclass
class Trajectory:
    columns: dict[str, np.ndarray]
    grid_shape: tuple[int, int]

    @property
    def n_ticks(self) -> int:
        return len(self.columns["timestamp"])

    @property
    def timestamps(self) -> np.ndarray:
        return self.columns["timestamp"]

    @property
    def has_reference(self) -> bool:
        return "ref_taxel_0" in self.columns

    @property
    def has_contacts(self) -> bool:
        return CONTACT_COLS[0] in self.columns

    @property
    def has_state(self) -> bool:
        return "base_pos_x" in self.columns

    def pose(self, t: int, radius: float, length: float, mass: float) -> CylinderPose:
        c = self.columns
        return CylinderPose(
            x=float(c["obj_x"][t]), y=float(c["obj_y"][t]), yaw=float(c["obj_yaw"][t]),
            radius=radius, length=length, mass=mass,
        )

    def reference_map(self, t: int) -> np.ndarray:
        r, c = self.grid_shape
        flat = np.array(
            [self.columns[f"ref_taxel_{i}"][t] for i in range(r * c)], dtype=np.uint8
        )
        return flat.reshape(r, c)

    def reference_maps(self) -> np.ndarray:
        r, c = self.grid_shape
        flat = np.stack(
            [self.columns[f"ref_taxel_{i}"] for i in range(r * c)], axis=1
        ).astype(np.uint8)
        return flat.reshape(self.n_ticks, r, c)

    def contacts(self, t: int) -> tuple[bool, bool, bool, bool]:
        return tuple(bool(self.columns[c][t]) for c in CONTACT_COLS)

    def contact_matrix(self) -> np.ndarray:
        return np.stack([self.columns[c] for c in CONTACT_COLS], axis=1).astype(bool)

    def _vec(self, t: int, names) -> np.ndarray:
        return np.array([self.columns[n][t] for n in names])

    def _stack(self, names) -> np.ndarray:
        return np.stack([self.columns[n] for n in names], axis=1)

    def state_views(self, q_default=None, q_min=None, q_max=None) -> "StateViews":
        """Pre-stacked per-tick state accessors (one-time cost, cheap slicing)."""
        return StateViews(self, q_default, q_min, q_max)

    def robot_state(self, t: int, q_default=None, q_min=None, q_max=None) -> RobotState:
        return self.state_views(q_default, q_min, q_max).robot_state(t)

    def object_state(self, t: int) -> ObjectState:
        return self.state_views().object_state(t)

    def command(self, t: int) -> np.ndarray:
        return self._vec(t, ["cmd_vx", "cmd_vy", "cmd_wz"])

    def action(self, t: int) -> np.ndarray:
        return self._vec(t, [f"action_{i}" for i in range(12)])


class StateViews:
    """Stacks the state column group into contiguous (n_ticks, ...) arrays so
    per-tick :class:`RobotState` / :class:`ObjectState` construction is just
    slicing -- replaying long logs tick by tick stays cheap."""

    def __init__(self, traj: Trajectory, q_default=None, q_min=None, q_max=None):
        s = traj._stack
        self._p_w = s([f"base_pos_{a}" for a in "xyz"])
        self._v_r = s([f"base_vel_{a}" for a in "xyz"])
        self._theta_w = s(["base_roll", "base_pitch", "base_yaw"])
        self._w_r = s([f"base_angvel_{a}" for a in "xyz"])
        self._q = s([f"joint_pos_{i}" for i in range(12)])
        self._q_dot = s([f"joint_vel_{i}" for i in range(12)])
        self._q_ddot = s([f"joint_acc_{i}" for i in range(12)])
        self._tau = s([f"joint_torque_{i}" for i in range(12)])
        self._feet = {
            group: s([f"{group}_{leg}_{a}" for leg in LEG_NAMES for a in "xyz"]).reshape(-1, 4, 3)
            for group in ("foot_pos", "foot_vel", "foot_force")
        }
        self._limb = s([f"limb_force_{i}" for i in range(8)])
        self._body_ground = traj.columns["body_ground_force"]
        self._obj = {
            group: s([f"{group}_{a}" for a in "xyz"])
            for group in ("obj_pos_r", "obj_vel_r", "obj_euler_r", "obj_angvel_r")
        }
        self._obj_world = s(["obj_world_x", "obj_world_y"])
        self._cmd = s(["cmd_vx", "cmd_vy", "cmd_wz"])
        self._action = s([f"action_{i}" for i in range(12)])
        fields = RobotState.__dataclass_fields__
        self._q_default = (
            np.asarray(q_default, dtype=np.float64)
            if q_default is not None
            else fields["q_default"].default_factory()
        )
        self._q_min = (
            np.asarray(q_min, dtype=np.float64)
            if q_min is not None
            else fields["q_min"].default_factory()
        )
        self._q_max = (
            np.asarray(q_max, dtype=np.float64)
            if q_max is not None
            else fields["q_max"].default_factory()
        )
        # validate once, then per-tick construction can skip the checks
        RobotState(
            p_w=self._p_w[0], v_r=self._v_r[0], theta_w=self._theta_w[0],
            w_r=self._w_r[0], q=self._q[0], q_dot=self._q_dot[0],
            q_ddot=self._q_ddot[0], tau=self._tau[0],
            foot_pos_w=self._feet["foot_pos"][0],
            foot_vel_w=self._feet["foot_vel"][0],
            foot_force_w=self._feet["foot_force"][0],
            thigh_calf_force=self._limb[0],
            q_default=self._q_default, q_min=self._q_min, q_max=self._q_max,
        )
        ObjectState(
            p_r=self._obj["obj_pos_r"][0], v_r=self._obj["obj_vel_r"][0],
            theta_r=self._obj["obj_euler_r"][0], w_r=self._obj["obj_angvel_r"][0],
            p_w_xy=self._obj_world[0],
        )
        for arr in (*self._obj.values(), self._obj_world):
            if not np.isfinite(arr).all():
                raise SchemaError("non-finite object state values in trajectory")

    def robot_state(self, t: int) -> RobotState:
        return RobotState.unchecked(
            p_w=self._p_w[t], v_r=self._v_r[t], theta_w=self._theta_w[t],
            w_r=self._w_r[t], q=self._q[t], q_dot=self._q_dot[t],
            q_ddot=self._q_ddot[t], tau=self._tau[t],
            foot_pos_w=self._feet["foot_pos"][t],
            foot_vel_w=self._feet["foot_vel"][t],
            foot_force_w=self._feet["foot_force"][t],
            thigh_calf_force=self._limb[t],
            body_ground_force=float(self._body_ground[t]),
            q_default=self._q_default, q_min=self._q_min, q_max=self._q_max,
        )

    def object_state(self, t: int) -> ObjectState:
        return ObjectState.unchecked(
            p_r=self._obj["obj_pos_r"][t], v_r=self._obj["obj_vel_r"][t],
            theta_r=self._obj["obj_euler_r"][t], w_r=self._obj["obj_angvel_r"][t],
            p_w_xy=self._obj_world[t],
        )

    def command(self, t: int) -> np.ndarray:
        return self._cmd[t]

    def action(self, t: int) -> np.ndarray:
        return self._action[t]


def read_trajectory(path, grid_shape: tuple[int, int] = (17, 13)) -> Trajectory:
    """Parse and validate a trajectory CSV.

    Raises :class:`SchemaError` with a line number for malformed rows,
    missing/unknown columns, broken group atomicity, or non-increasing
    timestamps.
    """
    ref_cols = reference_cols(*grid_shape)
    known = set(BASE_COLS) | set(IGNORED_COLS) | set(ref_cols) | set(CONTACT_COLS) | set(STATE_COLS)

    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file") from None

        for col in BASE_COLS:
            if col not in header:
                raise SchemaError(f"{path}: missing required column {col!r}")
        for col in header:
            if col not in known:
                raise SchemaError(f"{path}: unknown column {col!r}")
        if len(set(header)) != len(header):
            raise SchemaError(f"{path}: duplicate columns in header")
        for name, group in (("reference", ref_cols), ("contact", CONTACT_COLS),
                            ("state", STATE_COLS)):
            present = sum(1 for col in group if col in header)
            if present not in (0, len(group)):
                raise SchemaError(
                    f"{path}: {name} column group is incomplete "
                    f"({present} of {len(group)} columns)"
                )

        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise SchemaError(
                    f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}"
                )
            try:
                rows.append([float(v) for v in row])
            except ValueError as exc:
                raise SchemaError(f"{path}:{lineno}: {exc}") from None

    if not rows:
        raise SchemaError(f"{path}: no data rows")
    data = np.asarray(rows)
    columns = {name: data[:, i] for i, name in enumerate(header)}

    ts = columns["timestamp"]
    bad = np.nonzero(np.diff(ts) <= 0.0)[0]
    if bad.size:
        raise SchemaError(
            f"{path}:{bad[0] + 3}: timestamps must be strictly increasing"
        )
    for col in list(ref_cols) + list(CONTACT_COLS):
        if col in columns and not np.isin(columns[col], (0.0, 1.0)).all():
            raise SchemaError(f"{path}: column {col!r} must be binary")
    return Trajectory(columns=columns, grid_shape=grid_shape)


def write_trajectory(path, columns: dict[str, np.ndarray], grid_shape=(17, 13)):
    """Write a trajectory CSV in canonical column order (UTF-8, LF)."""
    order = [c for c in BASE_COLS if c in columns]
    order += [c for c in IGNORED_COLS if c in columns]
    order += [c for c in reference_cols(*grid_shape) if c in columns]
    order += [c for c in CONTACT_COLS if c in columns]
    order += [c for c in STATE_COLS if c in columns]
    leftover = set(columns) - set(order)
    if leftover:
        raise SchemaError(f"unknown trajectory columns: {sorted(leftover)}")
    n = len(columns["timestamp"])
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(order)
        for t in range(n):
            writer.writerow([repr(float(columns[c][t])) for c in order])


# --------------------------------------------------------------------------
# fidelity

def iou(a: np.ndarray, b: np.ndarray) -> float:
    """Intersection over union of two binary maps; identical maps score 1."""
    a = np.asarray(a, dtype=bool)
    b = np.asarray(b, dtype=bool)
    union = np.logical_or(a, b).sum()
    if union == 0:
        return 1.0
    return float(np.logical_and(a, b).sum() / union)


@dataclass
class FidelityReport:
    per_frame_iou: np.ndarray
    mean_iou: float
    sim_active_counts: np.ndarray
    ref_active_counts: np.ndarray


def replay_tactile(
    traj: Trajectory,
    config: SimConfig,
    seed: int = 0,
    augment: bool = False,
    object_params: Optional[tuple[float, float, float]] = None,
) -> tuple[list[TactileFrame], Optional[FidelityReport]]:
    """Generate per-frame tactile maps for a pose trajectory.

    By default the clean binarised maps are produced (what a fidelity
    comparison against recorded sensor data wants); ``augment`` additionally
    applies flip noise and the latency buffer, as seen in training.
    """
    radius, length, mass = object_params or (0.05, 0.3, 1.0)
    rng = np.random.default_rng(seed)
    buffer = DelayBuffer(config.pipeline, rng) if augment else None

    frames = []
    for t in range(traj.n_ticks):
        pose = traj.pose(t, radius, length, mass)
        fm = force_map(config.grid, pose, config.contact_model)
        frame = binarize(fm.values, config.pipeline, timestamp=float(traj.timestamps[t]))
        if augment:
            frame = flip_noise(frame, config.pipeline, rng)
            frame = buffer.push(frame)
        frames.append(frame)

    report = None
    if traj.has_reference:
        refs = traj.reference_maps()
        series = np.array([iou(frames[t].binary, refs[t]) for t in range(traj.n_ticks)])
        report = FidelityReport(
            per_frame_iou=series,
            mean_iou=float(series.mean()),
            sim_active_counts=np.array([int(f.binary.sum()) for f in frames]),
            ref_active_counts=refs.reshape(traj.n_ticks, -1).sum(axis=1),
        )
    return frames, report


# --------------------------------------------------------------------------
# gait metrics

@dataclass
class GaitReport:
    air_times: tuple[list[float], list[float]]
    means: tuple[float, float]
    stds: tuple[float, float]
    symmetry_ratio: Optional[float]
    stepping_freq: Optional[float]
    insufficient_data: bool

    def to_dict(self) -> dict:
        return {
            "air_times_pair0": self.air_times[0],
            "air_times_pair1": self.air_times[1],
            "means": list(self.means),
            "stds": list(self.stds),
            "symmetry_ratio": self.symmetry_ratio,
            "stepping_freq": self.stepping_freq,
            "insufficient_data": self.insufficient_data,
        }


def _completed_swings(airborne: np.ndarray, dt: float) -> list[float]:
    """Durations of airborne runs that end with a touchdown inside the series."""
    times = []
    run = 0
    for value in airborne:
        if value:
            run += 1
        elif run:
            times.append(run * dt)
            run = 0
    return times


def gait_metrics(contacts: np.ndarray, dt: float) -> GaitReport:
    """Air-time statistics per diagonal pair from a foot-contact series.

    A pair is airborne while both its feet are off the ground.  With fewer
    than one completed swing per pair (or fewer than two overall) the report
    is flagged as insufficient.
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    contacts = np.asarray(contacts, dtype=bool)
    airborne0 = ~contacts[:, 0] & ~contacts[:, 3]  # FR + RL
    airborne1 = ~contacts[:, 1] & ~contacts[:, 2]  # FL + RR
    swings = (_completed_swings(airborne0, dt), _completed_swings(airborne1, dt))

    n0, n1 = len(swings[0]), len(swings[1])
    insufficient = n0 == 0 or n1 == 0 or n0 + n1 < 2
    means = (
        float(np.mean(swings[0])) if n0 else 0.0,
        float(np.mean(swings[1])) if n1 else 0.0,
    )
    stds = (
        float(np.std(swings[0])) if n0 else 0.0,
        float(np.std(swings[1])) if n1 else 0.0,
    )
    ratio = None
    freq = None
    if not insufficient:
        ratio = abs(means[0] - means[1]) / max(means[0], means[1])
        duration = len(contacts) * dt
        freq = (n0 + n1) / (2.0 * duration)
    return GaitReport(
        air_times=swings, means=means, stds=stds,
        symmetry_ratio=ratio, stepping_freq=freq, insufficient_data=insufficient,
    )


# --------------------------------------------------------------------------
# per-tick episode engine

def task_score(v_xy, cmd_xy, obj_xy_r, p: TaskScoreParams) -> float:
    """Normalized tracking/balancing score in [0, 1] gating the gait reward."""
    track = math.exp(-math.hypot(v_xy[0] - cmd_xy[0], v_xy[1] - cmd_xy[1]) / p.sigma_vxy)
    balance = math.exp(-math.hypot(obj_xy_r[0], obj_xy_r[1]) / p.sigma_obj)
    return min(max(0.5 * track + 0.5 * balance, 0.0), 1.0)


def gravity_direction(theta_w) -> np.ndarray:
    """World down-vector expressed in the robot frame (projected gravity)."""
    roll, pitch, _ = np.asarray(theta_w).tolist()
    # rows of R(world->robot) applied to (0, 0, -1): only the last column matters
    sr, cr = math.sin(roll), math.cos(roll)
    sp, cp = math.sin(pitch), math.cos(pitch)
    return np.array([sp, -sr * cp, -cr * cp])


@dataclass
class TickResult:
    frame: TactileFrame  # what the policy sees: flipped + delayed
    true_binary: np.ndarray  # clean binarised contact, pre augmentation
    observation: np.ndarray  # 58-entry single-step observation
    window: np.ndarray  # flattened policy input
    breakdown: RewardBreakdown
    terminated: bool
    reason: Optional[str]
    alpha_task: float
    gait_r: float


class EpisodeEngine:
    """Composes the tactile, observation, gait and reward paths for one
    environment, one tick at a time.

    The internal RNG consumption order is part of the engine contract
    (latency draw at construction/reset; per tick: flip noise, then
    observation noise), so identical seeds and inputs reproduce outputs
    bit-exactly across entry points.
    """

    def __init__(self, config: SimConfig, seed: int, object_params=None):
        self.config = config
        self.seed = seed
        self.object_params = tuple(object_params) if object_params else (0.05, 0.3, 1.0)
        self.reset()

    def reset(self):
        self.rng = np.random.default_rng(self.seed)
        self.buffer = DelayBuffer(self.config.pipeline, self.rng)
        self.tracker = GaitTracker()
        self.window = ObsWindow()
        self.object_contacted = False
        self.prev_command: Optional[np.ndarray] = None
        self.last_action = np.zeros(12)
        self.terminated = False
        self.ticks = 0
        self._frozen: Optional[TickResult] = None

    @property
    def dt(self) -> float:
        return 1.0 / self.config.pipeline.sample_rate

    def tick(
        self,
        timestamp: float,
        pose: CylinderPose,
        robot: RobotState,
        obj: ObjectState,
        contacts,
        command,
        action,
        active_map: Optional[np.ndarray] = None,
    ) -> TickResult:
        """Advance one tick.

        ``active_map`` may carry this pose's precomputed activation map (from
        :func:`tactile.active_taxels_batch`); the contact geometry is
        deterministic, so precomputing it changes nothing but the runtime.
        """
        if self._frozen is not None:
            return self._frozen
        command = np.asarray(command, dtype=np.float64)
        action = np.asarray(action, dtype=np.float64)

        if active_map is None:
            active_map = active_taxels(self.config.grid, pose, self.config.contact_model)
        # weight is spread uniformly, so binarisation reduces to one scalar
        # test: every active taxel carries mass*g/n
        n_active = int(np.count_nonzero(active_map))
        if n_active and pose.mass * GRAVITY / n_active >= self.config.pipeline.force_threshold:
            clean = TactileFrame(binary=active_map, timestamp=timestamp)
        else:
            clean = TactileFrame(
                binary=np.zeros_like(active_map), timestamp=timestamp
            )
        if not self.object_contacted and n_active:
            self.object_contacted = bool(clean.binary.any())
        noisy = flip_noise(clean, self.config.pipeline, self.rng)
        delayed = self.buffer.push(noisy)

        command_changed = self.prev_command is not None and bool(
            np.any(command != self.prev_command)
        )
        self.tracker.update(contacts, self.dt, command_changed)
        alpha = task_score(robot.v_r[:2], command[:2], obj.p_r[:2], self.config.task_score)
        gait_r = gait_reward(contacts, self.tracker, alpha, self.config.sym)

        terminated, reason = check_termination(robot, obj, self.config.rewards)
        breakdown = eval_rewards(
            robot, obj, contacts, gait_r, command, action, self.last_action,
            self.config.rewards, terminated=terminated,
        )

        raw = RawObservation(
            obj_pos=obj.p_r,
            obj_euler=obj.theta_r,
            obj_linvel=obj.v_r,
            obj_angvel=obj.w_r,
            gravity=gravity_direction(robot.theta_w),
            base_angvel=robot.w_r,
            joint_pos=robot.q - robot.q_default,
            joint_vel=robot.q_dot,
            command=command,
            last_action=self.last_action,
        )
        obs = build_observation(raw, self.config.obs_noise, self.rng, self.object_contacted)
        self.window.push(obs)

        self.last_action = action
        self.prev_command = command
        self.ticks += 1

        result = TickResult(
            frame=delayed,
            true_binary=clean.binary,
            observation=obs,
            window=self.window.flattened(),
            breakdown=breakdown,
            terminated=terminated,
            reason=reason,
            alpha_task=alpha,
            gait_r=gait_r,
        )
        if terminated:
            self.terminated = True
            self._frozen = result
        return result


def replay_rewards(traj: Trajectory, config: SimConfig, seed: int = 0):
    """Reward replay over a trajectory with full state columns.

    Returns (breakdown rows, termination tick or None, reason).  Rows stop at
    the first terminating tick, which is still included.
    """
    if not traj.has_state or not traj.has_contacts:
        raise SchemaError("reward replay needs the state and contact column groups")
    engine = EpisodeEngine(config, seed)
    views = traj.state_views(q_default=config.action.q_default)
    contact_rows = traj.contact_matrix()

    rows = []
    term_tick = None
    reason = None
    radius, length, mass = engine.object_params
    for t in range(traj.n_ticks):
        result = engine.tick(
            float(traj.timestamps[t]),
            traj.pose(t, radius, length, mass),
            views.robot_state(t),
            views.object_state(t),
            contact_rows[t],
            views.command(t),
            views.action(t),
        )
        rows.append(result.breakdown)
        if result.terminated:
            term_tick = t
            reason = result.reason
            break
    return rows, term_tick, reason


# --------------------------------------------------------------------------
# synthetic episodes

def _trot_contacts(n: int, dt: float, swing_time: float, standing: bool,
                   zero_steps: int) -> np.ndarray:
    """Alternating diagonal-pair contact schedule; all-stance while standing
    or during the zero-command warm-up."""
    contacts = np.ones((n, 4), dtype=bool)
    if standing:
        return contacts
    period = 2.0 * swing_time
    for t in range(zero_steps, n):
        phase = ((t - zero_steps) * dt) % period
        if phase < swing_time:
            contacts[t, 0] = contacts[t, 3] = False  # FR + RL swing
        else:
            contacts[t, 1] = contacts[t, 2] = False  # FL + RR swing
    return contacts


def synth_trajectory(config: SimConfig, seed: int, n_ticks: int) -> tuple[dict, dict]:
    """Scripted but plausible episode: curriculum-sampled setup, smooth object
    drift, trot contacts, and kinematically consistent robot state columns.

    Returns (columns, meta).  Everything is a deterministic function of the
    seed.
    """
    master = np.random.default_rng(seed)
    script_seed = int(master.integers(2**63))
    engine_seed = int(master.integers(2**63))
    rng = np.random.default_rng(script_seed)

    cur = saturate(config.curriculum)
    setup = sample_episode(config.randomization, config.zero_command, rng,
                           fully_expanded=True)
    command = sample_command(cur, rng)
    if setup.standing:
        command = np.zeros(3)

    dt = 1.0 / config.pipeline.sample_rate
    t = np.arange(n_ticks) * dt
    zero_steps = min(setup.zero_command_steps, n_ticks)

    cmd = np.tile(command, (n_ticks, 1))
    cmd[:zero_steps] = 0.0

    # object pose: slow drift around the sampled initial placement
    obj_x = setup.init_x + 0.01 * np.sin(2 * np.pi * 0.5 * t)
    obj_y = setup.init_y + 0.008 * np.sin(2 * np.pi * 0.3 * t + 1.0)
    obj_yaw = setup.init_yaw + 0.1 * np.sin(2 * np.pi * 0.2 * t)

    contacts = _trot_contacts(n_ticks, dt, 0.3, setup.standing, zero_steps)

    # torso follows the command with a small tracking wobble
    vel_err = 0.02 * np.sin(2 * np.pi * 0.7 * t)
    v_xy = cmd[:, :2] + vel_err[:, None]
    base_pos = np.zeros((n_ticks, 3))
    base_pos[:, :2] = np.cumsum(v_xy * dt, axis=0)
    base_pos[:, 2] = config.rewards.h_target + 0.002 * np.sin(2 * np.pi * 1.1 * t)
    base_vel = np.zeros((n_ticks, 3))
    base_vel[:, :2] = v_xy
    base_vel[:, 2] = np.gradient(base_pos[:, 2], dt)
    base_euler = np.stack(
        [0.01 * np.sin(2 * np.pi * 0.9 * t),
         0.015 * np.sin(2 * np.pi * 0.6 * t + 0.5),
         np.cumsum(cmd[:, 2] * dt)],
        axis=1,
    )
    base_angvel = np.stack(
        [np.gradient(base_euler[:, 0], dt),
         np.gradient(base_euler[:, 1], dt),
         cmd[:, 2]],
        axis=1,
    )

    # joints wiggle around the defaults; torques from the PD law
    q_default = config.action.q_default
    phases = np.linspace(0.0, 2.0 * np.pi, 12, endpoint=False)
    action = 0.2 * np.sin(2 * np.pi * 1.4 * t[:, None] + phases[None, :])
    if setup.standing:
        action *= 0.05
    q = q_default[None, :] + 0.05 * np.sin(2 * np.pi * 1.4 * t[:, None] + phases[None, :])
    q[0] = q_default + setup.joint_pos_delta
    q_dot = np.gradient(q, dt, axis=0)
    q_dot[0] = setup.joint_vel
    q_ddot = np.gradient(q_dot, dt, axis=0)
    targets = np.stack([action_to_target(a, config.action) for a in action])
    tau = np.stack(
        [pd_torque(q[i], q_dot[i], targets[i], config.action) for i in range(n_ticks)]
    )

    # feet: stance feet carry weight near the ground, swing feet lift
    foot_xy = np.array([[0.19, -0.13], [0.19, 0.13], [-0.19, -0.13], [-0.19, 0.13]])
    foot_pos = np.zeros((n_ticks, 4, 3))
    foot_vel = np.zeros((n_ticks, 4, 3))
    foot_force = np.zeros((n_ticks, 4, 3))
    swing_z = 0.05
    robot_weight = setup.trunk_mass * GRAVITY
    stance_counts = contacts.sum(axis=1)
    for leg in range(4):
        in_contact = contacts[:, leg]
        foot_pos[:, leg, 0] = base_pos[:, 0] + foot_xy[leg, 0]
        foot_pos[:, leg, 1] = base_pos[:, 1] + foot_xy[leg, 1]
        foot_pos[:, leg, 2] = np.where(in_contact, 0.01, swing_z)
        # stance feet creep a little (exercises the slipping term), swing feet
        # move with the gait but stay above the dragging height threshold
        foot_vel[:, leg, 0] = np.where(in_contact, 0.05, 2.0 * np.abs(cmd[:, 0]) + 0.1)
        foot_force[:, leg, 2] = np.where(in_contact, robot_weight / stance_counts, 0.0)

    obj_z_r = 0.08 + 0.002 * np.sin(2 * np.pi * 0.8 * t)
    obj_pos_r = np.stack([obj_x, obj_y, obj_z_r], axis=1)
    obj_vel_r = np.gradient(obj_pos_r, dt, axis=0)
    obj_euler_r = np.stack(
        [0.02 * np.sin(2 * np.pi * 0.4 * t), 0.01 * np.sin(2 * np.pi * 0.35 * t), obj_yaw],
        axis=1,
    )
    obj_angvel_r = np.gradient(obj_euler_r, dt, axis=0)
    obj_world = base_pos[:, :2] + obj_pos_r[:, :2]

    columns = {
        "timestamp": t,
        "obj_x": obj_x, "obj_y": obj_y, "obj_yaw": obj_yaw,
        "base_pos_x": base_pos[:, 0], "base_pos_y": base_pos[:, 1], "base_pos_z": base_pos[:, 2],
        "base_vel_x": base_vel[:, 0], "base_vel_y": base_vel[:, 1], "base_vel_z": base_vel[:, 2],
        "base_roll": base_euler[:, 0], "base_pitch": base_euler[:, 1], "base_yaw": base_euler[:, 2],
        "base_angvel_x": base_angvel[:, 0], "base_angvel_y": base_angvel[:, 1],
        "base_angvel_z": base_angvel[:, 2],
        "body_ground_force": np.zeros(n_ticks),
        "obj_world_x": obj_world[:, 0], "obj_world_y": obj_world[:, 1],
        "cmd_vx": cmd[:, 0], "cmd_vy": cmd[:, 1], "cmd_wz": cmd[:, 2],
    }
    for i in range(12):
        columns[f"joint_pos_{i}"] = q[:, i]
        columns[f"joint_vel_{i}"] = q_dot[:, i]
        columns[f"joint_acc_{i}"] = q_ddot[:, i]
        columns[f"joint_torque_{i}"] = tau[:, i]
        columns[f"action_{i}"] = action[:, i]
    for li, leg in enumerate(LEG_NAMES):
        for ai, a in enumerate("xyz"):
            columns[f"foot_pos_{leg}_{a}"] = foot_pos[:, li, ai]
            columns[f"foot_vel_{leg}_{a}"] = foot_vel[:, li, ai]
            columns[f"foot_force_{leg}_{a}"] = foot_force[:, li, ai]
    for i in range(8):
        columns[f"limb_force_{i}"] = np.zeros(n_ticks)
    for li, name in enumerate(CONTACT_COLS):
        columns[name] = contacts[:, li].astype(np.float64)
    for group in ("obj_pos_r", "obj_vel_r", "obj_euler_r", "obj_angvel_r"):
        arr = {"obj_pos_r": obj_pos_r, "obj_vel_r": obj_vel_r,
               "obj_euler_r": obj_euler_r, "obj_angvel_r": obj_angvel_r}[group]
        for ai, a in enumerate("xyz"):
            columns[f"{group}_{a}"] = arr[:, ai]

    meta = {
        "seed": seed,
        "script_seed": script_seed,
        "engine_seed": engine_seed,
        "radius": setup.radius,
        "length": setup.length,
        "mass": setup.mass,
        "standing": setup.standing,
        "zero_command_steps": setup.zero_command_steps,
        "n_ticks": n_ticks,
        "dt": dt,
    }
    return columns, meta


def run_episode(traj: Trajectory, config: SimConfig, engine_seed: int,
                object_params) -> tuple[list[TickResult], GaitReport]:
    """Drive the engine over a full trajectory (state + contacts required)."""
    if not traj.has_state or not traj.has_contacts:
        raise SchemaError("episode replay needs the state and contact column groups")
    engine = EpisodeEngine(config, engine_seed, object_params=object_params)
    views = traj.state_views(q_default=config.action.q_default)
    contact_rows = traj.contact_matrix()
    radius, length, mass = engine.object_params
    timestamps = traj.timestamps
    poses = np.stack(
        [traj.columns["obj_x"], traj.columns["obj_y"], traj.columns["obj_yaw"]], axis=1
    )
    active_maps = active_taxels_batch(config.grid, poses, length, config.contact_model)
    # with precomputed maps the pose argument only carries the constant mass
    pose0 = traj.pose(0, radius, length, mass)

    results = []
    for t in range(traj.n_ticks):
        result = engine.tick(
            float(timestamps[t]),
            pose0,
            views.robot_state(t),
            views.object_state(t),
            contact_rows[t],
            views.command(t),
            views.action(t),
            active_map=active_maps[t],
        )
        results.append(result)
        if result.terminated:
            break
    report = gait_metrics(contact_rows[: len(results)], engine.dt)
    return results, report
