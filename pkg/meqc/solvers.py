# meqc/solvers.py - Baseline policies, exhaustive oracle and policy evaluation

from dataclasses import dataclass
from enum import Enum
import itertools
import logging
from typing import Callable, Iterator

import numpy as np

from meqc.cost_models import CostModel
from meqc.environment import AllocationRule, EnvConfig, JointAction, MeqcEnv, resolve_quantum_allocation
from meqc.errors import InstanceTooLargeError, InvalidConfigError
from meqc.workload import Scenario, ScenarioSettings

logger = logging.getLogger(__name__)

# bound on E^U * 2^U; covers U <= 5 users with E <= 4 servers
DEFAULT_ENUMERATION_BUDGET = 4**5 * 2**5


class PolicyKind(str, Enum):
    LOCAL = "local"
    RANDOM = "random"
    RANDOM_CLOUD = "random_cloud"
    GREEDY = "greedy"
    ORACLE = "oracle"


Policy = Callable[[MeqcEnv, np.random.Generator], JointAction]


def solve_baseline(kind: PolicyKind, scenario: Scenario, rng: np.random.Generator) -> JointAction:
    kind = PolicyKind(kind)
    n_users, n_servers = len(scenario.users), len(scenario.servers)
    if kind == PolicyKind.LOCAL:
        return JointAction(tuple([0] * n_users), tuple([1.0] * n_users))
    if kind == PolicyKind.RANDOM:
        servers = rng.integers(n_servers, size=n_users)
        ratios = rng.uniform(0.0, 1.0, size=n_users)
        return JointAction(tuple(int(s) for s in servers), tuple(float(r) for r in ratios))
    if kind == PolicyKind.RANDOM_CLOUD:
        servers = rng.integers(n_servers, size=n_users)
        return JointAction(tuple(int(s) for s in servers), tuple([0.0] * n_users))
    if kind == PolicyKind.GREEDY:
        return solve_greedy(scenario)
    return solve_exhaustive(scenario)[0]


def solve_greedy(scenario: Scenario, quantum_enabled: bool = True) -> JointAction:
    """Users in descending workload order each take their cheapest (server, endpoint ratio)."""
    model = CostModel(scenario, quantum_enabled=quantum_enabled)
    table = model.endpoint_table()
    n_users, n_servers = model.n_users, model.n_servers

    workload = [entry.task.data_size * entry.task.cycles_per_byte for entry in scenario.users]
    order = sorted(range(n_users), key=lambda u: (-workload[u], u))

    servers = [0] * n_users
    ratios = [1.0] * n_users
    indicators = [0] * n_users
    used_slots: set[int] = set()
    for u in order:
        best = (table.local[u], 0, 1.0, 0)
        for e in range(n_servers):
            options = [(table.edge[u, e], 0)]
            if table.eligible[u, e] and e not in used_slots and table.quantum[u, e] < table.edge[u, e]:
                options.append((table.quantum[u, e], 1))
            for cost, flag in options:
                if cost < best[0]:
                    best = (cost, e, 0.0, flag)
        _, servers[u], ratios[u], indicators[u] = best
        if indicators[u]:
            used_slots.add(servers[u])
    return JointAction(tuple(servers), tuple(ratios), tuple(indicators))


def enumerate_grants(assignment: tuple[int, ...], eligible: np.ndarray) -> Iterator[tuple[int, ...]]:
    """Every indicator vector with at most one eligible grant per server."""
    per_server: dict[int, list[int]] = {}
    for u, server in enumerate(assignment):
        if eligible[u, server]:
            per_server.setdefault(server, []).append(u)
    choices = [[None] + users for _, users in sorted(per_server.items())]
    for picks in itertools.product(*choices):
        indicators = [0] * len(assignment)
        for u in picks:
            if u is not None:
                indicators[u] = 1
        yield tuple(indicators)


def enumeration_size(n_users: int, n_servers: int) -> int:
    return n_servers**n_users * 2**n_users


def solve_exhaustive(
    scenario: Scenario,
    budget: int = DEFAULT_ENUMERATION_BUDGET,
    quantum_enabled: bool = True,
) -> tuple[JointAction, float]:
    """Global minimum over assignments, QPU grants and endpoint ratios.

    Cost is affine in each ratio once the assignment and grants are fixed, so only
    phi in {0, 1} is searched. Ties keep the lexicographically first candidate.
    """
    model = CostModel(scenario, quantum_enabled=quantum_enabled)
    n_users, n_servers = model.n_users, model.n_servers
    size = enumeration_size(n_users, n_servers)
    if size > budget:
        raise InstanceTooLargeError(
            f"exhaustive search over U={n_users}, E={n_servers} needs {size} evaluations (budget {budget})"
        )
    table = model.endpoint_table()

    best_cost, best_servers, best_ratios = np.inf, None, None
    for assignment in itertools.product(range(n_servers), repeat=n_users):
        for grants in enumerate_grants(assignment, table.eligible):
            total = 0.0
            ratios = []
            for u, (server, flag) in enumerate(zip(assignment, grants)):
                offload = table.quantum[u, server] if flag else table.edge[u, server]
                if offload < table.local[u]:
                    total += offload
                    ratios.append(0.0)
                else:
                    total += table.local[u]
                    ratios.append(1.0)
            if total < best_cost:
                best_cost, best_servers, best_ratios = total, assignment, tuple(ratios)

    action = JointAction(best_servers, best_ratios)
    indicators = resolve_quantum_allocation(model, action, AllocationRule.LARGEST_SAVING)
    logger.debug(f"Exhaustive search over {size} candidates: C*={best_cost:.6g}")
    return action.with_indicators(indicators), float(best_cost)


class SolverPolicy:
    """Adapter running a solver kind inside evaluate; deterministic solvers reuse their last answer."""

    def __init__(self, kind: PolicyKind, quantum_enabled: bool = True):
        self.kind = PolicyKind(kind)
        self.quantum_enabled = quantum_enabled
        self._cached: tuple[Scenario, JointAction] | None = None

    def __call__(self, env: MeqcEnv, rng: np.random.Generator) -> JointAction:
        if self.kind in (PolicyKind.LOCAL, PolicyKind.RANDOM, PolicyKind.RANDOM_CLOUD):
            return solve_baseline(self.kind, env.scenario, rng)
        if self._cached is not None and self._cached[0] is env.scenario:
            return self._cached[1]
        if self.kind == PolicyKind.GREEDY:
            action = solve_greedy(env.scenario, quantum_enabled=self.quantum_enabled)
        else:
            action = solve_exhaustive(env.scenario, quantum_enabled=self.quantum_enabled)[0]
        self._cached = (env.scenario, action)
        return action


def make_policy(kind: PolicyKind | str, env_config: EnvConfig | None = None) -> SolverPolicy:
    quantum_enabled = env_config.quantum_enabled if env_config else True
    return SolverPolicy(PolicyKind(kind), quantum_enabled=quantum_enabled)


@dataclass(frozen=True)
class EvaluationStats:
    episodes: int
    mean_cost: float
    std_cost: float
    latency_cost: float
    latency_std: float
    energy_cost: float
    energy_std: float
    qpu_grant_rate: float
    mean_success_prob: float


def evaluate(
    policy: Policy,
    scenario: Scenario,
    episodes: int,
    rng: np.random.Generator,
    env_config: EnvConfig | None = None,
    settings: ScenarioSettings | None = None,
) -> EvaluationStats:
    if episodes < 1:
        raise InvalidConfigError(f"episodes must be >= 1, got {episodes}")
    env = MeqcEnv(scenario, env_config, settings)
    env.reset()

    costs, latency, energy, grants, success = [], [], [], [], []
    for _ in range(episodes):
        result = env.step(policy(env, rng))
        costs.append(result.total_cost)
        latency.append(sum(c.weighted_latency for c in result.costs))
        energy.append(sum(c.weighted_energy for c in result.costs))
        grants.append(float(np.mean(result.indicators)))
        success.append(float(np.mean(result.success_probabilities)))

    return EvaluationStats(
        episodes=episodes,
        mean_cost=float(np.mean(costs)),
        std_cost=float(np.std(costs)),
        latency_cost=float(np.mean(latency)),
        latency_std=float(np.std(latency)),
        energy_cost=float(np.mean(energy)),
        energy_std=float(np.std(energy)),
        qpu_grant_rate=float(np.mean(grants)),
        mean_success_prob=float(np.mean(success)),
    )
