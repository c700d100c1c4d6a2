"""Episode-setup machinery: velocity-command curriculum, the zero-command
warm-up schedule, and domain-randomization sampling."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np


@dataclass(frozen=True)
class VelocityCurriculum:
    """Symmetric command ranges that expand as tracking and survival improve.

    Stages count completed expansions; the ranges are ``init + stage * step``,
    clamped at the maxima.  Expansion of one axis pauses whenever it would
    leave the other behind by more than ``max_stage_gap`` stages.
    """

    lin_init: float = 0.2  # m/s
    ang_init: float = 0.2  # rad/s
    lin_max: float = 0.6
    ang_max: float = 1.0
    expand_step: float = 0.1
    perf_threshold: float = 0.8
    survival_threshold: float = 0.9
    max_stage_gap: int = 2
    lin_stage: int = 0
    ang_stage: int = 0

    def __post_init__(self):
        if self.lin_init > self.lin_max or self.ang_init > self.ang_max:
            raise ValueError("initial ranges must not exceed the maxima")
        if self.expand_step <= 0.0:
            raise ValueError("expand_step must be positive")
        if abs(self.lin_stage - self.ang_stage) > self.max_stage_gap:
            raise ValueError("stage gap invariant violated")
        if self.lin_stage > self.lin_max_stage or self.ang_stage > self.ang_max_stage:
            raise ValueError("stage beyond the admissible maximum")

    @property
    def lin_max_stage(self) -> int:
        return math.ceil(round((self.lin_max - self.lin_init) / self.expand_step, 9))

    @property
    def ang_max_stage(self) -> int:
        return math.ceil(round((self.ang_max - self.ang_init) / self.expand_step, 9))

    @property
    def lin_range(self) -> float:
        return min(self.lin_init + self.lin_stage * self.expand_step, self.lin_max)

    @property
    def ang_range(self) -> float:
        return min(self.ang_init + self.ang_stage * self.expand_step, self.ang_max)

    def _candidates(self) -> tuple[bool, bool]:
        """Which axes would expand right now, metrics permitting.

        Each axis assumes the other takes its own eligible step, then checks
        the stage-gap bound.  A maxed-out axis keeps constraining its partner,
        so the gap invariant holds unconditionally -- the price is that the
        partner may saturate below its own maximum.
        """
        lin_eligible = self.lin_stage < self.lin_max_stage
        ang_eligible = self.ang_stage < self.ang_max_stage
        ang_assumed = self.ang_stage + (1 if ang_eligible else 0)
        lin_assumed = self.lin_stage + (1 if lin_eligible else 0)
        lin_ok = lin_eligible and abs(self.lin_stage + 1 - ang_assumed) <= self.max_stage_gap
        ang_ok = ang_eligible and abs(self.ang_stage + 1 - lin_assumed) <= self.max_stage_gap
        return lin_ok, ang_ok

    @property
    def fully_expanded(self) -> bool:
        """True once no expansion remains, whether an axis reached its maximum
        or saturated against the stage-gap bound."""
        lin_ok, ang_ok = self._candidates()
        return not lin_ok and not ang_ok

    def to_dict(self) -> dict:
        return {
            "lin_init": self.lin_init, "ang_init": self.ang_init,
            "lin_max": self.lin_max, "ang_max": self.ang_max,
            "expand_step": self.expand_step,
            "perf_threshold": self.perf_threshold,
            "survival_threshold": self.survival_threshold,
            "max_stage_gap": self.max_stage_gap,
            "lin_stage": self.lin_stage, "ang_stage": self.ang_stage,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "VelocityCurriculum":
        return cls(**d)


def maybe_expand(
    cur: VelocityCurriculum, tracking_score: float, survival_rate: float
) -> VelocityCurriculum:
    """One curriculum update; returns the (possibly unchanged) new state.

    Both axes expand independently once both metrics reach their thresholds.
    Each axis first assumes the other completes its own eligible expansion,
    then expands only if the resulting stage gap stays within bounds -- this
    keeps the invariant without ever blocking the lagging axis.
    """
    if not 0.0 <= tracking_score <= 1.0 or not 0.0 <= survival_rate <= 1.0:
        raise ValueError("metrics must lie in [0, 1]")
    if tracking_score < cur.perf_threshold or survival_rate < cur.survival_threshold:
        return cur
    lin_ok, ang_ok = cur._candidates()
    return replace(
        cur,
        lin_stage=cur.lin_stage + (1 if lin_ok else 0),
        ang_stage=cur.ang_stage + (1 if ang_ok else 0),
    )


def saturate(cur: VelocityCurriculum) -> VelocityCurriculum:
    """Fixed point of the expansion rule: the end-of-training command ranges."""
    while True:
        nxt = maybe_expand(cur, 1.0, 1.0)
        if nxt == cur:
            return cur
        cur = nxt


@dataclass(frozen=True)
class ZeroCommandSchedule:
    """Warm-up scheduling: how many initial steps are forced to zero command
    and how often an all-standing episode is sampled, before and after the
    velocity curriculum is fully expanded."""

    initial_steps: int = 0
    final_steps: int = 50
    initial_stand_prob: float = 0.10
    final_stand_prob: float = 0.05

    def steps(self, fully_expanded: bool) -> int:
        return self.final_steps if fully_expanded else self.initial_steps

    def stand_prob(self, fully_expanded: bool) -> float:
        return self.final_stand_prob if fully_expanded else self.initial_stand_prob


@dataclass(frozen=True)
class RandomizationSpec:
    """Uniform sampling ranges for episode setup (units: m, kg, rad unless
    noted; yaw is sampled in degrees and converted)."""

    radius: tuple = (0.03, 0.07)
    length: tuple = (0.1, 0.4)
    mass: tuple = (0.5, 2.5)
    friction: tuple = (0.3, 1.0)
    init_x: tuple = (-0.05, 0.05)
    init_y: tuple = (-0.04, 0.04)
    init_yaw_deg: tuple = (-30.0, 30.0)
    trunk_mass: tuple = (4.2, 6.2)
    trunk_friction: tuple = (0.3, 1.0)
    foot_friction: tuple = (0.6, 1.5)
    init_joint_pos_delta: tuple = (-0.03, 0.03)
    init_joint_vel: tuple = (-0.1, 0.1)
    push_obj_vx: tuple = (-0.3, 0.3)
    push_obj_vy: tuple = (-0.3, 0.3)
    push_obj_vz: tuple = (-0.2, 0.2)
    push_trunk_vx: tuple = (-0.4, 0.4)
    push_trunk_vy: tuple = (-0.3, 0.3)
    push_trunk_vz: tuple = (-0.1, 0.1)
    push_interval_s: float = 5.0  # one random push per window of this length


@dataclass
class EpisodeSetup:
    radius: float
    length: float
    mass: float
    friction: float
    init_x: float
    init_y: float
    init_yaw: float  # rad
    trunk_mass: float
    trunk_friction: float
    foot_friction: float
    joint_pos_delta: np.ndarray
    joint_vel: np.ndarray
    standing: bool
    zero_command_steps: int


def _draw(rng: np.random.Generator, bounds, size=None) -> float | np.ndarray:
    lo, hi = bounds
    out = rng.uniform(lo, hi, size)
    return out if size else float(out)


def sample_episode(
    spec: RandomizationSpec,
    sched: ZeroCommandSchedule,
    rng: np.random.Generator,
    fully_expanded: bool = False,
) -> EpisodeSetup:
    """Draw one episode configuration.  Draw order is fixed for determinism."""
    return EpisodeSetup(
        radius=_draw(rng, spec.radius),
        length=_draw(rng, spec.length),
        mass=_draw(rng, spec.mass),
        friction=_draw(rng, spec.friction),
        init_x=_draw(rng, spec.init_x),
        init_y=_draw(rng, spec.init_y),
        init_yaw=math.radians(_draw(rng, spec.init_yaw_deg)),
        trunk_mass=_draw(rng, spec.trunk_mass),
        trunk_friction=_draw(rng, spec.trunk_friction),
        foot_friction=_draw(rng, spec.foot_friction),
        joint_pos_delta=_draw(rng, spec.init_joint_pos_delta, 12),
        joint_vel=_draw(rng, spec.init_joint_vel, 12),
        standing=bool(rng.random() < sched.stand_prob(fully_expanded)),
        zero_command_steps=sched.steps(fully_expanded),
    )


def sample_push(spec: RandomizationSpec, rng: np.random.Generator):
    """Velocity kicks for the object and the trunk (one per push window)."""
    obj = np.array([_draw(rng, spec.push_obj_vx), _draw(rng, spec.push_obj_vy),
                    _draw(rng, spec.push_obj_vz)])
    trunk = np.array([_draw(rng, spec.push_trunk_vx), _draw(rng, spec.push_trunk_vy),
                      _draw(rng, spec.push_trunk_vz)])
    return obj, trunk


def sample_command(cur: VelocityCurriculum, rng: np.random.Generator) -> np.ndarray:
    """Velocity command (vx, vy, wz) from the current curriculum ranges."""
    return np.array(
        [
            rng.uniform(-cur.lin_range, cur.lin_range),
            rng.uniform(-cur.lin_range, cur.lin_range),
            rng.uniform(-cur.ang_range, cur.ang_range),
        ]
    )
