"""Desk-scale tactile transport simulation: taxel contact models, the binary
signal pipeline, adaptive gait rewards, the full training reward suite,
observation assembly, curricula, and a trajectory replay harness."""

from .config import ConfigError, SchemaError, SimConfig, load_config, save_config
from .curriculum import (
    EpisodeSetup,
    RandomizationSpec,
    VelocityCurriculum,
    ZeroCommandSchedule,
    maybe_expand,
    sample_command,
    sample_episode,
    sample_push,
)
from .gait import (
    DIAG_PAIRS,
    FL,
    FR,
    LAT_PAIRS,
    RL,
    RR,
    GaitTracker,
    SymParams,
    gait_reward,
    gamma_sym,
    symmetricity,
)
from .observations import (
    ActionSpec,
    ObsNoiseSpec,
    ObsWindow,
    RawObservation,
    action_to_target,
    build_observation,
    pd_torque,
    quat_from_euler,
)
from .replay import (
    EpisodeEngine,
    FidelityReport,
    GaitReport,
    Trajectory,
    gait_metrics,
    iou,
    read_trajectory,
    replay_rewards,
    replay_tactile,
    run_episode,
    synth_trajectory,
    write_trajectory,
)
from .rewards import (
    ObjectState,
    RewardBreakdown,
    RewardConfig,
    RobotState,
    check_termination,
    eval_rewards,
)
from .signals import DelayBuffer, PipelineConfig, TactileFrame, binarize, flip_noise
from .tactile import (
    GRAVITY,
    ContactModel,
    CylinderPose,
    ForceMap,
    TaxelGrid,
    active_taxels,
    ascii_map,
    contact_segment,
    force_map,
)

__version__ = "0.1.0"
