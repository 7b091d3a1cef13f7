"""Dueling double-DQN packing agent, implemented from scratch on numpy."""

from .network import (
    ACTION_COUNT,
    INPUT_SIZE,
    Adam,
    QNetwork,
    huber_loss,
    load_checkpoint,
    save_checkpoint,
    soft_update,
)
from .agent import (
    EnvConfig,
    EpisodeLog,
    PackingEnv,
    ReplayBuffer,
    TrainerConfig,
    Transition,
    act_greedy,
    boltzmann_sample,
    double_dqn_target,
    encode_observation,
    reward,
    train,
    training_log_text,
    write_training_log,
)

__all__ = [
    "ACTION_COUNT",
    "INPUT_SIZE",
    "Adam",
    "QNetwork",
    "huber_loss",
    "load_checkpoint",
    "save_checkpoint",
    "soft_update",
    "EnvConfig",
    "EpisodeLog",
    "PackingEnv",
    "ReplayBuffer",
    "TrainerConfig",
    "Transition",
    "act_greedy",
    "boltzmann_sample",
    "double_dqn_target",
    "encode_observation",
    "reward",
    "train",
    "training_log_text",
    "write_training_log",
]
