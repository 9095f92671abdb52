# meqc/marl/buffer.py - Per-agent rollout storage and generalized advantage estimation

import numpy as np

from meqc.errors import ContractViolationError
from meqc.marl.policy import HybridSample


def gae(
    rewards: np.ndarray,
    values: np.ndarray,
    discount: float,
    lam: float,
    last_value: float = 0.0,
    dones: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Advantages and returns; values[t] is V(s_t) and last_value bootstraps the final step."""
    rewards = np.asarray(rewards, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    if rewards.shape != values.shape:
        raise ContractViolationError(f"rewards {rewards.shape} and values {values.shape} are not aligned")
    dones = np.zeros_like(rewards) if dones is None else np.asarray(dones, dtype=np.float64)

    advantages = np.zeros_like(rewards)
    running = 0.0
    next_value = last_value
    for t in range(len(rewards) - 1, -1, -1):
        alive = 1.0 - dones[t]
        delta = rewards[t] + discount * next_value * alive - values[t]
        running = delta + discount * lam * alive * running
        advantages[t] = running
        next_value = values[t]
    return advantages, advantages + values


def normalize_advantages(advantages: np.ndarray) -> np.ndarray:
    return (advantages - advantages.mean()) / max(float(advantages.std()), 1e-8)


class RolloutBuffer:
    def __init__(self, capacity: int, obs_size: int):
        if capacity < 1:
            raise ContractViolationError(f"buffer capacity must be >= 1, got {capacity}")
        self.capacity = capacity
        self.obs = np.zeros((capacity, obs_size))
        self.servers = np.zeros(capacity, dtype=np.int64)
        self.ratios = np.zeros(capacity)
        self.pre_squash = np.zeros(capacity)
        self.logp_server = np.zeros(capacity)
        self.logp_ratio = np.zeros(capacity)
        self.rewards = np.zeros(capacity)
        self.dones = np.zeros(capacity)
        self.value_server = np.zeros(capacity)
        self.value_ratio = np.zeros(capacity)
        self.cursor = 0

    def __len__(self) -> int:
        return self.cursor

    @property
    def full(self) -> bool:
        return self.cursor == self.capacity

    def add(self, obs: np.ndarray, sample: HybridSample, reward: float, done: bool = False) -> None:
        if self.full:
            raise ContractViolationError("rollout buffer is full")
        i = self.cursor
        self.obs[i] = obs
        self.servers[i] = sample.server
        self.ratios[i] = sample.ratio
        self.pre_squash[i] = sample.pre_squash
        self.logp_server[i] = sample.logp_server
        self.logp_ratio[i] = sample.logp_ratio
        self.rewards[i] = reward
        self.dones[i] = float(done)
        self.cursor += 1

    def set_values(self, value_server: np.ndarray, value_ratio: np.ndarray) -> None:
        n = self.cursor
        self.value_server[:n] = value_server
        self.value_ratio[:n] = value_ratio

    def view(self, name: str) -> np.ndarray:
        return getattr(self, name)[: self.cursor]

    def clear(self) -> None:
        self.cursor = 0
