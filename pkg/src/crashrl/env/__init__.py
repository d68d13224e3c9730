"""The accident-anticipation MDP: episodes, attention pipeline, rewards."""

from .bandit import QuadraticBandit
from .config import EnvConfig
from .episode import (
    BLOB_GAIN,
    BLOB_RAMP_FRAMES,
    BLOB_SIGMA,
    Episode,
    EpisodeFormatError,
    blob_onset,
    generate_episode,
    load_episode_file,
    write_episode_file,
)
from .mdp import IMAGE_CENTER, AccidentEnv, DualAction, Observation, StepResult
from .rewards import (
    accident_weight,
    fixation_window_active,
    reward_accident,
    reward_fixation,
)
from .saliency import (
    SaliencyField,
    cell_centers,
    combine_attention,
    foveate,
    normalize_field,
    pool_features,
)

__all__ = [
    "AccidentEnv",
    "BLOB_GAIN",
    "BLOB_RAMP_FRAMES",
    "BLOB_SIGMA",
    "DualAction",
    "EnvConfig",
    "Episode",
    "EpisodeFormatError",
    "IMAGE_CENTER",
    "Observation",
    "QuadraticBandit",
    "SaliencyField",
    "StepResult",
    "accident_weight",
    "blob_onset",
    "cell_centers",
    "combine_attention",
    "fixation_window_active",
    "foveate",
    "generate_episode",
    "load_episode_file",
    "normalize_field",
    "pool_features",
    "reward_accident",
    "reward_fixation",
    "write_episode_file",
]
