from meqc.marl.mlp import Mlp, forward, gradients
from meqc.marl.policy import HybridPolicy, HybridSample, sample_hybrid_action
from meqc.marl.buffer import RolloutBuffer, gae
from meqc.marl.ppo import Adam, LossStats, TrainConfig, ppo_update
from meqc.marl.trainer import EpochStats, MarlPolicy, TrainResult, load_checkpoint, save_checkpoint, train

__all__ = [
    "Adam",
    "EpochStats",
    "HybridPolicy",
    "HybridSample",
    "LossStats",
    "MarlPolicy",
    "Mlp",
    "RolloutBuffer",
    "TrainConfig",
    "TrainResult",
    "forward",
    "gae",
    "gradients",
    "load_checkpoint",
    "ppo_update",
    "sample_hybrid_action",
    "save_checkpoint",
    "train",
]
