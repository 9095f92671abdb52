# meqc/marl/policy.py - Hybrid discrete (server) / continuous (local ratio) actor-critic pair

from dataclasses import dataclass
import logging
import math

import numpy as np
from scipy.special import expit, logsumexp, softmax

from meqc.marl.mlp import Mlp

logger = logging.getLogger(__name__)

LOG_STD_MIN = -5.0
LOG_STD_MAX = 2.0
# sigmoid(+-30) stays strictly inside (0, 1) in float64
PRE_SQUASH_LIMIT = 30.0
NETWORKS = ("server_actor", "server_critic", "ratio_actor", "ratio_critic")
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


@dataclass(frozen=True)
class HybridSample:
    server: int
    ratio: float
    pre_squash: float
    logp_server: float
    logp_ratio: float


def categorical_log_probs(logits: np.ndarray) -> np.ndarray:
    return logits - logsumexp(logits, axis=-1, keepdims=True)


def gaussian_log_prob(z, mean, log_std):
    return -0.5 * ((z - mean) / np.exp(log_std)) ** 2 - log_std - _HALF_LOG_2PI


def squashed_log_prob(phi, mean, log_std):
    """Density of phi = sigmoid(z), z ~ N(mean, exp(log_std)^2), on (0, 1)."""
    phi = np.asarray(phi, dtype=np.float64)
    z = np.log(phi) - np.log1p(-phi)
    return gaussian_log_prob(z, mean, log_std) - np.log(phi) - np.log1p(-phi)


def squash_correction(z):
    # log(sigmoid(z) * (1 - sigmoid(z))) computed without cancellation
    return -np.logaddexp(0.0, z) - np.logaddexp(0.0, -z)


class HybridPolicy:
    def __init__(
        self,
        obs_size: int,
        n_servers: int,
        hidden_sizes: tuple[int, ...] = (256, 256),
        activation: str = "tanh",
        rng: np.random.Generator | None = None,
    ):
        rng = rng or np.random.default_rng(0)
        self.obs_size = obs_size
        self.n_servers = n_servers
        hidden = tuple(hidden_sizes)
        self.server_actor = Mlp((obs_size, *hidden, n_servers), activation, rng, output_scale=0.01)
        self.server_critic = Mlp((obs_size, *hidden, 1), activation, rng)
        self.ratio_actor = Mlp((obs_size, *hidden, 2), activation, rng, output_scale=0.01)
        self.ratio_critic = Mlp((obs_size, *hidden, 1), activation, rng)

    @property
    def networks(self) -> dict[str, Mlp]:
        return {name: getattr(self, name) for name in NETWORKS}

    def server_probs(self, obs: np.ndarray) -> np.ndarray:
        return softmax(self.server_actor.forward(obs), axis=-1)

    def ratio_params(self, obs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        out = self.ratio_actor.forward(obs)
        return out[..., 0], np.clip(out[..., 1], LOG_STD_MIN, LOG_STD_MAX)

    def values(self, obs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return self.server_critic.forward(obs)[..., 0], self.ratio_critic.forward(obs)[..., 0]

    def act(self, obs: np.ndarray, rng: np.random.Generator, greedy: bool = False) -> HybridSample:
        logits = self.server_actor.forward(obs)
        log_probs = categorical_log_probs(logits)
        mean, log_std = self.ratio_params(obs)
        mean, log_std = float(mean), float(log_std)

        if greedy:
            server = int(np.argmax(logits))
            z = mean
        else:
            server = int(rng.choice(self.n_servers, p=np.exp(log_probs)))
            z = mean + math.exp(log_std) * float(rng.standard_normal())
        z = float(np.clip(z, -PRE_SQUASH_LIMIT, PRE_SQUASH_LIMIT))
        logp_ratio = float(gaussian_log_prob(z, mean, log_std) - squash_correction(z))
        return HybridSample(
            server=server,
            ratio=float(expit(z)),
            pre_squash=z,
            logp_server=float(log_probs[server]),
            logp_ratio=logp_ratio,
        )

    def snapshot(self) -> dict[str, np.ndarray]:
        return {name: net.params.copy() for name, net in self.networks.items()}

    def restore(self, snapshot: dict[str, np.ndarray]) -> None:
        for name, net in self.networks.items():
            net.set_params(snapshot[name])

    def is_finite(self) -> bool:
        return all(np.all(np.isfinite(net.params)) for net in self.networks.values())


def sample_hybrid_action(
    policy: HybridPolicy, obs: np.ndarray, rng: np.random.Generator, greedy: bool = False
) -> tuple[int, float, float, float]:
    sample = policy.act(obs, rng, greedy=greedy)
    return sample.server, sample.ratio, sample.logp_server, sample.logp_ratio
