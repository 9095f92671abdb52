# meqc/marl/ppo.py - Clipped-surrogate PPO update for the hybrid actor-critic pair

from dataclasses import dataclass
import logging

import numpy as np
from pydantic import BaseModel, ConfigDict
from scipy.special import softmax

from meqc.errors import ContractViolationError, InvalidConfigError, TrainingError
from meqc.marl.buffer import RolloutBuffer, gae, normalize_advantages
from meqc.marl.policy import (
    LOG_STD_MAX,
    LOG_STD_MIN,
    NETWORKS,
    HybridPolicy,
    categorical_log_probs,
    gaussian_log_prob,
    squash_correction,
)

logger = logging.getLogger(__name__)


class TrainConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    epochs: int = 500
    steps_per_epoch: int = 2000
    updates_per_epoch: int = 2
    batch_size: int = 128
    discount: float = 0.95
    learning_rate: float = 0.001
    gae_lambda: float = 0.95
    clip_epsilon: float = 0.2
    entropy_coef: float = 0.01
    value_coef: float = 0.5
    max_grad_norm: float | None = 0.5
    normalize_advantages: bool = True
    normalize_reward: bool = True
    # decision slots do not influence later observations, so each one ends its own episode
    terminal_steps: bool = True
    hidden_sizes: tuple[int, ...] = (256, 256)
    activation: str = "tanh"

    def check(self) -> "TrainConfig":
        for name in ("epochs", "steps_per_epoch", "updates_per_epoch", "batch_size"):
            if getattr(self, name) < 1:
                raise InvalidConfigError(f"{name} must be >= 1, got {getattr(self, name)}")
        for name in ("discount", "gae_lambda"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise InvalidConfigError(f"{name} must lie in [0, 1], got {getattr(self, name)}")
        if self.learning_rate < 0 or self.clip_epsilon <= 0:
            raise InvalidConfigError("learning_rate must be >= 0 and clip_epsilon > 0")
        if self.entropy_coef < 0 or self.value_coef < 0:
            raise InvalidConfigError("loss coefficients must be >= 0")
        if self.max_grad_norm is not None and self.max_grad_norm <= 0:
            raise InvalidConfigError("max_grad_norm must be > 0 when set")
        if self.activation not in ("tanh", "relu", "linear"):
            raise InvalidConfigError(f"unknown activation {self.activation!r}")
        return self


class Adam:
    def __init__(self, size: int, lr: float, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.m = np.zeros(size)
        self.v = np.zeros(size)
        self.t = 0

    def step(self, params: np.ndarray, grad: np.ndarray) -> None:
        self.t += 1
        self.m = self.beta1 * self.m + (1 - self.beta1) * grad
        self.v = self.beta2 * self.v + (1 - self.beta2) * grad**2
        m_hat = self.m / (1 - self.beta1**self.t)
        v_hat = self.v / (1 - self.beta2**self.t)
        params -= self.lr * (m_hat / (np.sqrt(v_hat) + self.eps))


def make_optimizers(policy: HybridPolicy, lr: float) -> dict[str, Adam]:
    return {name: Adam(net.n_params, lr) for name, net in policy.networks.items()}


@dataclass(frozen=True)
class LossStats:
    policy_loss: float
    value_loss: float
    entropy: float
    clip_fraction: float


@dataclass(frozen=True)
class PpoBatch:
    obs: np.ndarray
    servers: np.ndarray
    pre_squash: np.ndarray
    logp_server: np.ndarray
    logp_ratio: np.ndarray
    adv_server: np.ndarray
    adv_ratio: np.ndarray
    ret_server: np.ndarray
    ret_ratio: np.ndarray

    def __len__(self) -> int:
        return len(self.servers)

    def take(self, idx: np.ndarray) -> "PpoBatch":
        return PpoBatch(**{name: getattr(self, name)[idx] for name in self.__dataclass_fields__})


def build_batch(
    buffer: RolloutBuffer, cfg: TrainConfig, last_values: tuple[float, float] = (0.0, 0.0)
) -> PpoBatch:
    rewards = buffer.view("rewards")
    dones = buffer.view("dones")
    adv_server, ret_server = gae(
        rewards, buffer.view("value_server"), cfg.discount, cfg.gae_lambda, last_values[0], dones
    )
    adv_ratio, ret_ratio = gae(
        rewards, buffer.view("value_ratio"), cfg.discount, cfg.gae_lambda, last_values[1], dones
    )
    # the squash log-det depends on z alone and cancels in the probability ratio
    pre_squash = buffer.view("pre_squash")
    gaussian_logp = buffer.view("logp_ratio") + squash_correction(pre_squash)
    return PpoBatch(
        obs=buffer.view("obs"),
        servers=buffer.view("servers"),
        pre_squash=pre_squash,
        logp_server=buffer.view("logp_server"),
        logp_ratio=gaussian_logp,
        adv_server=adv_server,
        adv_ratio=adv_ratio,
        ret_server=ret_server,
        ret_ratio=ret_ratio,
    )


def clipped_surrogate(
    logp: np.ndarray, logp_old: np.ndarray, adv: np.ndarray, clip_epsilon: float
) -> tuple[float, np.ndarray, np.ndarray]:
    """Loss -mean(min(r A, clip(r) A)), its derivative w.r.t. logp, and the clipped mask."""
    ratio = np.exp(logp - logp_old)
    clipped = np.clip(ratio, 1.0 - clip_epsilon, 1.0 + clip_epsilon)
    loss = -np.mean(np.minimum(ratio * adv, clipped * adv))
    active = ((adv > 0) & (ratio > 1.0 + clip_epsilon)) | ((adv < 0) & (ratio < 1.0 - clip_epsilon))
    dlogp = np.where(active, 0.0, -adv * ratio) / len(logp)
    return float(loss), dlogp, active


def _clip_norm(grad: np.ndarray, max_norm: float | None) -> np.ndarray:
    if max_norm is None:
        return grad
    norm = float(np.linalg.norm(grad))
    if norm > max_norm:
        return grad * (max_norm / norm)
    return grad


def loss_and_gradients(
    policy: HybridPolicy, batch: PpoBatch, cfg: TrainConfig
) -> tuple[dict[str, float], dict[str, np.ndarray]]:
    n = len(batch)
    rows = np.arange(n)
    grads: dict[str, np.ndarray] = {}

    # server head: categorical over servers
    logits, cache = policy.server_actor.forward_cache(batch.obs)
    log_probs = categorical_log_probs(logits)
    probs = softmax(logits, axis=-1)
    logp = log_probs[rows, batch.servers]
    loss_server, dlogp, active_server = clipped_surrogate(logp, batch.logp_server, batch.adv_server, cfg.clip_epsilon)
    entropy_server = -np.sum(probs * log_probs, axis=-1)
    onehot = np.zeros_like(probs)
    onehot[rows, batch.servers] = 1.0
    d_logits = dlogp[:, None] * (onehot - probs)
    d_logits += cfg.entropy_coef / n * probs * (log_probs + entropy_server[:, None])
    grads["server_actor"] = policy.server_actor.backward(cache, d_logits)

    # ratio head: Gaussian on the pre-squash variable
    out, cache = policy.ratio_actor.forward_cache(batch.obs)
    mean, raw_log_std = out[:, 0], out[:, 1]
    log_std = np.clip(raw_log_std, LOG_STD_MIN, LOG_STD_MAX)
    inside = (raw_log_std > LOG_STD_MIN) & (raw_log_std < LOG_STD_MAX)
    var = np.exp(2.0 * log_std)
    diff = batch.pre_squash - mean
    logp = gaussian_log_prob(batch.pre_squash, mean, log_std)
    loss_ratio, dlogp, active_ratio = clipped_surrogate(logp, batch.logp_ratio, batch.adv_ratio, cfg.clip_epsilon)
    entropy_ratio = log_std + 0.5 * np.log(2.0 * np.pi * np.e)
    d_out = np.zeros_like(out)
    d_out[:, 0] = dlogp * diff / var
    d_out[:, 1] = (dlogp * (diff**2 / var - 1.0) - cfg.entropy_coef / n) * inside
    grads["ratio_actor"] = policy.ratio_actor.backward(cache, d_out)

    # critics: squared error against the GAE returns
    value_losses = 0.0
    for name, returns in (("server_critic", batch.ret_server), ("ratio_critic", batch.ret_ratio)):
        net = policy.networks[name]
        values, cache = net.forward_cache(batch.obs)
        err = values[:, 0] - returns
        value_losses += cfg.value_coef * 0.5 * float(np.mean(err**2))
        grads[name] = net.backward(cache, (cfg.value_coef * err / n)[:, None])

    entropy = float(np.mean(entropy_server) + np.mean(entropy_ratio))
    stats = {
        "policy_loss": loss_server + loss_ratio,
        "value_loss": value_losses,
        "entropy": entropy,
        "clip_fraction": float(np.mean(active_server | active_ratio)),
    }
    return stats, grads


def ppo_update(
    policy: HybridPolicy,
    optimizers: dict[str, Adam],
    buffer: RolloutBuffer,
    cfg: TrainConfig,
    rng: np.random.Generator,
    last_values: tuple[float, float] = (0.0, 0.0),
) -> LossStats:
    if not buffer.full:
        raise ContractViolationError(f"ppo_update needs a full buffer, have {len(buffer)}/{buffer.capacity}")
    batch = build_batch(buffer, cfg, last_values)
    n = len(batch)

    totals = {"policy_loss": 0.0, "value_loss": 0.0, "entropy": 0.0, "clip_fraction": 0.0}
    count = 0
    for _ in range(cfg.updates_per_epoch):
        order = rng.permutation(n)
        for start in range(0, n, cfg.batch_size):
            minibatch = batch.take(order[start : start + cfg.batch_size])
            if cfg.normalize_advantages and len(minibatch) > 1:
                minibatch = PpoBatch(
                    **{
                        **{k: getattr(minibatch, k) for k in minibatch.__dataclass_fields__},
                        "adv_server": normalize_advantages(minibatch.adv_server),
                        "adv_ratio": normalize_advantages(minibatch.adv_ratio),
                    }
                )
            stats, grads = loss_and_gradients(policy, minibatch, cfg)
            loss = stats["policy_loss"] + stats["value_loss"] - cfg.entropy_coef * stats["entropy"]
            if not np.isfinite(loss) or not all(np.all(np.isfinite(g)) for g in grads.values()):
                raise TrainingError("non-finite PPO loss", {**stats, "minibatch_start": start})
            for name in NETWORKS:
                grad = _clip_norm(grads[name], cfg.max_grad_norm)
                optimizers[name].step(policy.networks[name].params, grad)
            for key in totals:
                totals[key] += stats[key]
            count += 1

    return LossStats(**{key: value / count for key, value in totals.items()})
