# meqc/environment.py - Multi-agent offloading environment (one decision slot per step)

from dataclasses import dataclass, field
from enum import Enum
import logging

import numpy as np
from pydantic import BaseModel, ConfigDict

from meqc.cost_models import CostBreakdown, CostModel
from meqc.errors import ContractViolationError, UnknownServerError
from meqc.utils.csv_export import emit_csv
from meqc.workload import Scenario, ScenarioSettings, redraw_tasks

logger = logging.getLogger(__name__)


class AllocationRule(str, Enum):
    LARGEST_SAVING = "largest_saving"
    FIRST_INDEX = "first_index"


class EnvConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    redraw_tasks: bool = False
    allocation_rule: AllocationRule = AllocationRule.LARGEST_SAVING
    quantum_enabled: bool = True
    record_trajectory: bool = False


@dataclass(frozen=True)
class JointAction:
    servers: tuple[int, ...]
    local_ratios: tuple[float, ...]
    indicators: tuple[int, ...] | None = None

    def with_indicators(self, indicators) -> "JointAction":
        return JointAction(self.servers, self.local_ratios, tuple(int(i) for i in indicators))


@dataclass(frozen=True)
class StepResult:
    observations: list[np.ndarray]
    reward: float
    costs: list[CostBreakdown]
    indicators: tuple[int, ...]
    success_probabilities: tuple[float, ...]
    action: JointAction = field(repr=False, default=None)

    @property
    def total_cost(self) -> float:
        return -self.reward


def observation_size(n_servers: int) -> int:
    return 5 + 2 + n_servers + 1 + n_servers


def raw_observation(scenario: Scenario, user: int) -> np.ndarray:
    scales = scenario.observation_scales
    entry = scenario.users[user]
    profile = entry.profile
    local_block = [
        profile.local_cpu_hz / scales.local_cpu_hz,
        entry.task.data_size / scales.data_size,
        entry.task.cycles_per_byte / scales.cycles_per_byte,
        entry.quantum_task.logical_qubits / scales.logical_qubits,
        entry.quantum_task.logical_depth / scales.logical_depth,
    ]
    edge_block = [
        profile.edge_cpu_hz / scales.edge_cpu_hz,
        profile.subscribed_logical_qubits / scales.subscribed_logical_qubits,
    ] + [s.concatenation_level / scales.concatenation_level for s in scenario.servers]
    wireless_block = [profile.tx_power / scales.tx_power] + [
        g / scales.channel_gain for g in profile.channel_gains
    ]
    return np.asarray(local_block + edge_block + wireless_block, dtype=np.float64)


def build_observation(scenario: Scenario, user: int) -> np.ndarray:
    return np.clip(raw_observation(scenario, user), 0.0, 1.0)


def resolve_quantum_allocation(
    model: CostModel,
    action: JointAction,
    rule: AllocationRule = AllocationRule.LARGEST_SAVING,
) -> tuple[int, ...]:
    indicators = [0] * model.n_users
    candidates: dict[int, list[int]] = {}
    for u, server in enumerate(action.servers):
        if model.eligible[u, server]:
            candidates.setdefault(server, []).append(u)

    for server, users in candidates.items():
        if rule == AllocationRule.FIRST_INDEX:
            indicators[users[0]] = 1
            continue
        winner, best = None, 0.0
        for u in users:
            saving = model.saving(u, server, action.local_ratios[u])
            if saving > best:
                winner, best = u, saving
        if winner is not None:
            indicators[winner] = 1
    return tuple(indicators)


class MeqcEnv:
    """Shared-reward environment; one instance belongs to one caller."""

    def __init__(
        self,
        scenario: Scenario,
        config: EnvConfig | None = None,
        settings: ScenarioSettings | None = None,
    ):
        self.config = config or EnvConfig()
        self.settings = settings or ScenarioSettings()
        self.base_scenario = scenario.check()
        self.scenario = self.base_scenario
        self.model = CostModel(self.scenario, quantum_enabled=self.config.quantum_enabled)
        self.episode = 0
        self.steps = 0
        self._ready = False
        self.trajectory: list[dict] = []

    @property
    def n_users(self) -> int:
        return len(self.scenario.users)

    @property
    def n_servers(self) -> int:
        return len(self.scenario.servers)

    @property
    def observation_size(self) -> int:
        return observation_size(self.n_servers)

    def observations(self) -> list[np.ndarray]:
        return [build_observation(self.scenario, u) for u in range(self.n_users)]

    def _load(self, scenario: Scenario) -> None:
        self.scenario = scenario
        self.model = CostModel(scenario, quantum_enabled=self.config.quantum_enabled)

    def reset(self, scenario: Scenario | None = None) -> list[np.ndarray]:
        if scenario is not None:
            self.base_scenario = scenario.check()
            self.episode = 0
        if self.config.redraw_tasks:
            self._load(redraw_tasks(self.base_scenario, self.episode, self.settings))
        elif self.scenario is not self.base_scenario:
            self._load(self.base_scenario)
        self._ready = True
        return self.observations()

    def _validate(self, action: JointAction) -> JointAction:
        if len(action.servers) != self.n_users or len(action.local_ratios) != self.n_users:
            raise ContractViolationError(
                f"expected {self.n_users} actions, got {len(action.servers)} servers "
                f"and {len(action.local_ratios)} ratios"
            )
        for server in action.servers:
            if not 0 <= server < self.n_servers:
                raise UnknownServerError(f"unknown server id {server}")
        ratios = tuple(float(np.clip(phi, 0.0, 1.0)) for phi in action.local_ratios)
        return JointAction(tuple(int(s) for s in action.servers), ratios)

    def resolve_quantum_allocation(self, action: JointAction) -> tuple[int, ...]:
        return resolve_quantum_allocation(self.model, self._validate(action), self.config.allocation_rule)

    def evaluate(self, action: JointAction) -> StepResult:
        """Cost of an action on the current scenario without advancing the environment."""
        action = self._validate(action)
        resolved = action.with_indicators(
            resolve_quantum_allocation(self.model, action, self.config.allocation_rule)
        )
        total, costs = self.model.total(resolved)
        success = tuple(float(self.model.success[u, e]) for u, e in enumerate(resolved.servers))
        return StepResult(
            observations=[],
            reward=-total,
            costs=costs,
            indicators=resolved.indicators,
            success_probabilities=success,
            action=resolved,
        )

    def step(self, action: JointAction) -> StepResult:
        if not self._ready:
            raise ContractViolationError("reset() must be called before step()")
        observed = self.observations() if self.config.record_trajectory else None
        result = self.evaluate(action)
        if observed is not None:
            self._record(observed, result)

        self.steps += 1
        if self.config.redraw_tasks:
            self.episode += 1
            self._load(redraw_tasks(self.base_scenario, self.episode, self.settings))
        logger.debug(f"step={self.steps} reward={result.reward:.6g} indicators={result.indicators}")
        return StepResult(
            observations=self.observations(),
            reward=result.reward,
            costs=result.costs,
            indicators=result.indicators,
            success_probabilities=result.success_probabilities,
            action=result.action,
        )

    def _record(self, observed: list[np.ndarray], result: StepResult) -> None:
        for u, obs in enumerate(observed):
            row = {
                "step": self.steps,
                "user": u,
                "server": result.action.servers[u],
                "local_ratio": result.action.local_ratios[u],
                "indicator": result.indicators[u],
                "reward": result.reward,
            }
            row.update({f"obs_{i}": float(v) for i, v in enumerate(obs)})
            self.trajectory.append(row)

    def dump_trajectory(self, path):
        columns = ["step", "user", "server", "local_ratio", "indicator", "reward"] + [
            f"obs_{i}" for i in range(self.observation_size)
        ]
        return emit_csv(self.trajectory, path, columns=columns)
