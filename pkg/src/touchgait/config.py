"""Shared JSON configuration for every subsystem.

One file configures the whole stack; each top-level section maps onto one
parameter dataclass and unknown keys are rejected so typos fail loudly.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .curriculum import RandomizationSpec, VelocityCurriculum, ZeroCommandSchedule
from .gait import SymParams
from .observations import ActionSpec, GroupNoise, ObsNoiseSpec
from .rewards import RewardConfig
from .signals import PipelineConfig
from .tactile import ContactModel, TaxelGrid


class ConfigError(Exception):
    """Invalid or unreadable configuration."""


class SchemaError(Exception):
    """Malformed input data file (CSV schema, column or value errors)."""


@dataclass(frozen=True)
class TaskScoreParams:
    """Gate for the positive symmetricity reward: mean of a velocity-tracking
    kernel and an object-centering kernel, clamped to [0, 1]."""

    sigma_vxy: float = 0.25  # m/s
    sigma_obj: float = 0.05  # m


@dataclass
class SimConfig:
    grid: TaxelGrid = field(default_factory=TaxelGrid)
    contact_model: ContactModel = field(default_factory=ContactModel)
    pipeline: PipelineConfig = field(default_factory=PipelineConfig)
    sym: SymParams = field(default_factory=SymParams)
    task_score: TaskScoreParams = field(default_factory=TaskScoreParams)
    rewards: RewardConfig = field(default_factory=RewardConfig)
    obs_noise: ObsNoiseSpec = field(default_factory=ObsNoiseSpec)
    action: ActionSpec = field(default_factory=ActionSpec)
    curriculum: VelocityCurriculum = field(default_factory=VelocityCurriculum)
    zero_command: ZeroCommandSchedule = field(default_factory=ZeroCommandSchedule)
    randomization: RandomizationSpec = field(default_factory=RandomizationSpec)


_SECTIONS = {
    "grid": TaxelGrid,
    "contact_model": ContactModel,
    "pipeline": PipelineConfig,
    "sym": SymParams,
    "task_score": TaskScoreParams,
    "rewards": RewardConfig,
    "obs_noise": ObsNoiseSpec,
    "action": ActionSpec,
    "curriculum": VelocityCurriculum,
    "zero_command": ZeroCommandSchedule,
    "randomization": RandomizationSpec,
}


def _build_section(cls, data: dict, section: str):
    if not isinstance(data, dict):
        raise ConfigError(f"section {section!r} must be a JSON object")
    known = {f.name: f for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, value in data.items():
        if key not in known:
            raise ConfigError(f"unknown key {key!r} in section {section!r}")
        if cls is ObsNoiseSpec:
            if not (isinstance(value, (list, tuple)) and len(value) == 2):
                raise ConfigError(
                    f"{section}.{key} must be a [noise, scale] pair"
                )
            value = GroupNoise(float(value[0]), float(value[1]))
        elif cls is RandomizationSpec and isinstance(value, list):
            value = tuple(float(v) for v in value)
        elif cls is ActionSpec and key == "q_default":
            value = np.asarray(value, dtype=np.float64)
        kwargs[key] = value
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid section {section!r}: {exc}") from exc


def config_from_dict(data: dict) -> SimConfig:
    if not isinstance(data, dict):
        raise ConfigError("configuration root must be a JSON object")
    sections = {}
    for key, value in data.items():
        if key not in _SECTIONS:
            raise ConfigError(f"unknown configuration section {key!r}")
        sections[key] = _build_section(_SECTIONS[key], value, key)
    return SimConfig(**sections)


def load_config(path) -> SimConfig:
    """Load a config file; missing sections keep their defaults."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    return config_from_dict(data)


def config_to_dict(cfg: SimConfig) -> dict:
    out = {}
    for section, cls in _SECTIONS.items():
        value = getattr(cfg, section)
        entry = {}
        for f in dataclasses.fields(cls):
            v = getattr(value, f.name)
            if isinstance(v, GroupNoise):
                v = [v.noise, v.scale]
            elif isinstance(v, np.ndarray):
                v = v.tolist()
            elif isinstance(v, tuple):
                v = list(v)
            entry[f.name] = v
        out[section] = entry
    return out


def save_config(cfg: SimConfig, path):
    Path(path).write_text(json.dumps(config_to_dict(cfg), indent=2) + "\n", encoding="utf-8")
