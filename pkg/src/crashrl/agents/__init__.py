"""Off-policy continuous-control agents: DDPG, TD3, SAC, and DARC."""

from .agent import (
    CHECKPOINT_TAG,
    LOG_STD_MAX,
    LOG_STD_MIN,
    Agent,
    config_hash,
    squash01,
)
from .config import ALGOS, AgentConfig
from .replay import ACTION_DIM, Batch, ReplayBuffer, Transition
from .targets import (
    DarcTargetParts,
    compute_targets,
    darc_target,
    ddpg_target,
    sac_target,
    tanh_gaussian_logprob,
    td3_target,
)
from .updates import StepLog, actor_update, critic_update, train_step, update

__all__ = [
    "ACTION_DIM",
    "ALGOS",
    "Agent",
    "AgentConfig",
    "Batch",
    "CHECKPOINT_TAG",
    "DarcTargetParts",
    "LOG_STD_MAX",
    "LOG_STD_MIN",
    "ReplayBuffer",
    "StepLog",
    "Transition",
    "actor_update",
    "compute_targets",
    "config_hash",
    "critic_update",
    "darc_target",
    "ddpg_target",
    "sac_target",
    "squash01",
    "tanh_gaussian_logprob",
    "td3_target",
    "train_step",
    "update",
]
