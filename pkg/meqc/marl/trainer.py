# meqc/marl/trainer.py - Independent multi-agent PPO training, checkpoints and the trained policy

from dataclasses import dataclass, field
import json
import logging
from pathlib import Path

import numpy as np

from meqc.cost_models import CostModel
from meqc.environment import EnvConfig, JointAction, MeqcEnv
from meqc.errors import InvalidConfigError, TrainingError
from meqc.marl.buffer import RolloutBuffer
from meqc.marl.policy import NETWORKS, HybridPolicy
from meqc.marl.ppo import LossStats, TrainConfig, make_optimizers, ppo_update
from meqc.utils.csv_export import LEARNING_CURVE_COLUMNS, emit_csv
from meqc.workload import Scenario, ScenarioSettings

logger = logging.getLogger(__name__)

CHECKPOINT_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class EpochStats:
    epoch: int
    mean_cost: float
    policy_loss: float
    value_loss: float
    entropy: float

    def as_row(self) -> dict:
        return {name: getattr(self, name) for name in LEARNING_CURVE_COLUMNS}


@dataclass
class TrainResult:
    agents: list[HybridPolicy]
    curve: list[EpochStats] = field(default_factory=list)
    checkpoint_path: Path | None = None
    curve_path: Path | None = None


class MarlPolicy:
    """Runs one trained agent per user; greedy mode takes the argmax server and the mean ratio."""

    def __init__(self, agents: list[HybridPolicy], greedy: bool = True):
        self.agents = agents
        self.greedy = greedy

    def __call__(self, env: MeqcEnv, rng: np.random.Generator) -> JointAction:
        if len(self.agents) != env.n_users:
            raise InvalidConfigError(f"{len(self.agents)} agents cannot act for {env.n_users} users")
        samples = [agent.act(obs, rng, greedy=self.greedy) for agent, obs in zip(self.agents, env.observations())]
        return JointAction(tuple(s.server for s in samples), tuple(s.ratio for s in samples))


def _checkpoint_document(agents: list[HybridPolicy], cfg: TrainConfig, seed: int, epoch: int) -> dict:
    return {
        "schema_version": CHECKPOINT_SCHEMA_VERSION,
        "seed": seed,
        "epoch": epoch,
        "activation": cfg.activation,
        "agents": [
            {
                "obs_size": agent.obs_size,
                "n_servers": agent.n_servers,
                "networks": {
                    name: {"sizes": list(net.sizes), "params": net.params.tolist()}
                    for name, net in agent.networks.items()
                },
            }
            for agent in agents
        ],
    }


def save_checkpoint(agents: list[HybridPolicy], path: str | Path, cfg: TrainConfig, seed: int, epoch: int) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_checkpoint_document(agents, cfg, seed, epoch)), encoding="utf-8")
    logger.info(f"Saved checkpoint for {len(agents)} agents at epoch {epoch} to {path}")
    return path


def load_checkpoint(path: str | Path) -> list[HybridPolicy]:
    document = json.loads(Path(path).read_text(encoding="utf-8"))
    if document.get("schema_version") != CHECKPOINT_SCHEMA_VERSION:
        raise InvalidConfigError(f"unsupported checkpoint schema_version {document.get('schema_version')}")
    agents = []
    for entry in document["agents"]:
        hidden = tuple(entry["networks"]["server_actor"]["sizes"][1:-1])
        agent = HybridPolicy(entry["obs_size"], entry["n_servers"], hidden, document["activation"])
        for name in NETWORKS:
            net_entry = entry["networks"][name]
            if tuple(net_entry["sizes"]) != agent.networks[name].sizes:
                raise InvalidConfigError(f"checkpoint shape mismatch for {name}: {net_entry['sizes']}")
            agent.networks[name].set_params(np.asarray(net_entry["params"]))
        agents.append(agent)
    return agents


def train(
    scenario: Scenario,
    cfg: TrainConfig,
    seed: int,
    env_config: EnvConfig | None = None,
    output_dir: str | Path | None = None,
    settings: ScenarioSettings | None = None,
) -> TrainResult:
    cfg.check()
    env = MeqcEnv(scenario, env_config, settings)
    n_users = env.n_users
    streams = np.random.SeedSequence(seed).spawn(n_users + 1)
    agent_rngs = [np.random.default_rng(s) for s in streams[:n_users]]
    update_rng = np.random.default_rng(streams[n_users])

    agents = [
        HybridPolicy(env.observation_size, env.n_servers, cfg.hidden_sizes, cfg.activation, agent_rngs[u])
        for u in range(n_users)
    ]
    optimizers = [make_optimizers(agent, cfg.learning_rate) for agent in agents]
    buffers = [RolloutBuffer(cfg.steps_per_epoch, env.observation_size) for _ in range(n_users)]

    reward_scale = 1.0
    if cfg.normalize_reward:
        local_cost = float(np.sum(CostModel(scenario).endpoint_table().local))
        reward_scale = 1.0 / local_cost if local_cost > 0 else 1.0

    output_dir = Path(output_dir) if output_dir is not None else None
    result = TrainResult(agents=agents)
    last_good = [agent.snapshot() for agent in agents]
    observations = env.reset()
    logger.info(
        f"Training {n_users} agents on {env.n_servers} servers: "
        f"{cfg.epochs} epochs x {cfg.steps_per_epoch} steps, seed={seed}"
    )

    for epoch in range(cfg.epochs):
        costs = []
        for buffer in buffers:
            buffer.clear()
        for _ in range(cfg.steps_per_epoch):
            samples = [agent.act(obs, rng) for agent, obs, rng in zip(agents, observations, agent_rngs)]
            step = env.step(JointAction(tuple(s.server for s in samples), tuple(s.ratio for s in samples)))
            for buffer, obs, sample in zip(buffers, observations, samples):
                buffer.add(obs, sample, step.reward * reward_scale, done=cfg.terminal_steps)
            observations = step.observations
            costs.append(step.total_cost)

        epoch_losses: list[LossStats] = []
        try:
            for agent, optimizer, buffer, obs in zip(agents, optimizers, buffers, observations):
                value_server, value_ratio = agent.values(buffer.view("obs"))
                buffer.set_values(value_server, value_ratio)
                last_server, last_ratio = agent.values(obs)
                epoch_losses.append(
                    ppo_update(agent, optimizer, buffer, cfg, update_rng, (float(last_server), float(last_ratio)))
                )
            if not all(agent.is_finite() for agent in agents):
                raise TrainingError("non-finite parameters after update", {"epoch": epoch})
        except TrainingError as e:
            for agent, snapshot in zip(agents, last_good):
                agent.restore(snapshot)
            if output_dir is not None:
                result.checkpoint_path = save_checkpoint(agents, output_dir / "checkpoint.json", cfg, seed, epoch - 1)
            logger.error(f"Training halted at epoch {epoch}: {e} {e.diagnostics}")
            e.diagnostics.setdefault("epoch", epoch)
            raise

        last_good = [agent.snapshot() for agent in agents]
        stats = EpochStats(
            epoch=epoch,
            mean_cost=float(np.mean(costs)),
            policy_loss=float(np.mean([s.policy_loss for s in epoch_losses])),
            value_loss=float(np.mean([s.value_loss for s in epoch_losses])),
            entropy=float(np.mean([s.entropy for s in epoch_losses])),
        )
        result.curve.append(stats)
        logger.info(
            f"epoch {epoch}: mean_cost={stats.mean_cost:.6g} policy_loss={stats.policy_loss:.4g} "
            f"value_loss={stats.value_loss:.4g} entropy={stats.entropy:.4g}"
        )

    if output_dir is not None:
        result.checkpoint_path = save_checkpoint(agents, output_dir / "checkpoint.json", cfg, seed, cfg.epochs - 1)
        result.curve_path = emit_csv(
            [s.as_row() for s in result.curve], output_dir / "learning_curve.csv", columns=LEARNING_CURVE_COLUMNS
        )
    return result
