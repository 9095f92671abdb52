# meqc/cost_models.py - Per-user latency/energy costs for local, edge CPU and edge QPU execution

from __future__ import annotations

from dataclasses import dataclass, fields
import logging
import math
from typing import TYPE_CHECKING

import numpy as np
from pydantic import BaseModel, ConfigDict

from meqc.device_models import (
    SUPPORTED_LEVELS,
    DeviceCharacterization,
    GatePowerProfile,
    LogicalResources,
    QubitTech,
    characterize_device,
    logical_resources,
    success_probability,
)
from meqc.errors import (
    ContractViolationError,
    InfeasibleLinkError,
    InvalidConfigError,
    UnknownServerError,
)

if TYPE_CHECKING:
    from meqc.environment import JointAction
    from meqc.workload import Scenario

logger = logging.getLogger(__name__)

BITS_PER_BYTE = 8
SUCCESS_THRESHOLD = 2.0 / 3.0


class UserProfile(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    local_cpu_hz: float
    tx_power: float
    weight_latency: float = 0.5
    weight_energy: float = 0.5
    channel_gains: tuple[float, ...]
    edge_cpu_hz: float
    subscribed_logical_qubits: int = 0

    def check(self) -> "UserProfile":
        if not self.local_cpu_hz > 0:
            raise InvalidConfigError(f"local_cpu_hz must be > 0, got {self.local_cpu_hz}")
        if not self.tx_power > 0:
            raise InvalidConfigError(f"tx_power must be > 0, got {self.tx_power}")
        if not self.edge_cpu_hz > 0:
            raise InvalidConfigError(f"edge_cpu_hz must be > 0, got {self.edge_cpu_hz}")
        for name in ("weight_latency", "weight_energy"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise InvalidConfigError(f"{name} must lie in [0, 1], got {value}")
        if not self.channel_gains or min(self.channel_gains) <= 0:
            raise InvalidConfigError("channel_gains must be non-empty and positive")
        if self.subscribed_logical_qubits < 0:
            raise InvalidConfigError("subscribed_logical_qubits must be >= 0")
        return self


class TaskSpec(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    data_size: float
    cycles_per_byte: float

    def check(self) -> "TaskSpec":
        if not (self.data_size > 0 and self.cycles_per_byte > 0):
            raise InvalidConfigError("task data_size and cycles_per_byte must be > 0")
        return self


class QuantumTaskSpec(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    data_size: float
    logical_qubits: int
    logical_depth: int

    @property
    def error_locations(self) -> int:
        return self.logical_qubits * self.logical_depth

    def check(self) -> "QuantumTaskSpec":
        if not (self.data_size > 0 and self.logical_qubits > 0 and self.logical_depth > 0):
            raise InvalidConfigError("quantum task size, qubits and depth must be > 0")
        return self


class ServerProfile(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    noise_power: float = 1e-6
    bandwidth: float = 20e6
    concatenation_level: int = 1
    physical_qubits: int = 1000

    @property
    def logical_capacity(self) -> int:
        return self.physical_qubits // logical_resources(self.concatenation_level).physical_per_logical

    def check(self) -> "ServerProfile":
        if not self.noise_power > 0:
            raise InvalidConfigError(f"noise_power must be > 0, got {self.noise_power}")
        if not self.bandwidth > 0:
            raise InvalidConfigError(f"bandwidth must be > 0, got {self.bandwidth}")
        if self.concatenation_level not in SUPPORTED_LEVELS:
            raise InvalidConfigError(
                f"concatenation_level must be one of {SUPPORTED_LEVELS}, got {self.concatenation_level}"
            )
        if self.physical_qubits < 0:
            raise InvalidConfigError("physical_qubits must be >= 0")
        return self


@dataclass(frozen=True)
class CostBreakdown:
    local_latency: float = 0.0
    transmit_latency: float = 0.0
    edge_latency: float = 0.0
    quantum_latency: float = 0.0
    local_energy: float = 0.0
    transmit_energy: float = 0.0
    edge_energy: float = 0.0
    quantum_energy: float = 0.0
    # lambda-weighted sums of the components above
    weighted_latency: float = 0.0
    weighted_energy: float = 0.0

    @property
    def latency(self) -> float:
        return self.local_latency + self.transmit_latency + self.edge_latency + self.quantum_latency

    @property
    def energy(self) -> float:
        return self.local_energy + self.transmit_energy + self.edge_energy + self.quantum_energy

    @property
    def cost(self) -> float:
        return self.weighted_latency + self.weighted_energy

    def __add__(self, other: "CostBreakdown") -> "CostBreakdown":
        return CostBreakdown(
            **{f.name: getattr(self, f.name) + getattr(other, f.name) for f in fields(self)}
        )


def _check_ratio(phi: float) -> None:
    if not 0.0 <= phi <= 1.0:
        raise ContractViolationError(f"local ratio must lie in [0, 1], got {phi}")


def uplink_rate(user: UserProfile, server: ServerProfile, target: int) -> float:
    if not 0 <= target < len(user.channel_gains):
        raise UnknownServerError(f"unknown server id {target}")
    snr = user.tx_power * user.channel_gains[target] / server.noise_power
    return server.bandwidth * math.log2(1.0 + snr)


def local_cost(user: UserProfile, task: TaskSpec, phi: float, chip_energy: float) -> CostBreakdown:
    _check_ratio(phi)
    cycles = phi * task.data_size * task.cycles_per_byte
    latency = cycles / user.local_cpu_hz
    energy = chip_energy * cycles
    return CostBreakdown(
        local_latency=latency,
        local_energy=energy,
        weighted_latency=user.weight_latency * latency,
        weighted_energy=user.weight_energy * energy,
    )


def transmission_cost(
    user: UserProfile, server: ServerProfile, target: int, task: TaskSpec | QuantumTaskSpec, phi: float
) -> tuple[float, float]:
    _check_ratio(phi)
    if phi == 1.0:
        return 0.0, 0.0
    rate = uplink_rate(user, server, target)
    if not rate > 0:
        raise InfeasibleLinkError(f"uplink rate to server {target} is zero")
    latency = (1.0 - phi) * task.data_size * BITS_PER_BYTE / rate
    return latency, user.tx_power * latency


def edge_classical_cost(
    user: UserProfile,
    server: ServerProfile,
    target: int,
    task: TaskSpec,
    phi: float,
    chip_energy: float,
) -> CostBreakdown:
    d_tx, e_tx = transmission_cost(user, server, target, task, phi)
    cycles = (1.0 - phi) * task.data_size * task.cycles_per_byte
    latency = cycles / user.edge_cpu_hz
    energy = chip_energy * cycles
    return CostBreakdown(
        transmit_latency=d_tx,
        edge_latency=latency,
        transmit_energy=e_tx,
        edge_energy=energy,
        weighted_latency=user.weight_latency * (d_tx + latency),
        weighted_energy=user.weight_energy * (e_tx + energy),
    )


def edge_quantum_cost(
    user: UserProfile,
    server: ServerProfile,
    target: int,
    qtask: QuantumTaskSpec,
    phi: float,
    resources: LogicalResources,
    powers: GatePowerProfile,
    tech: QubitTech,
) -> CostBreakdown:
    d_tx, e_tx = transmission_cost(user, server, target, qtask, phi)
    scale = (1.0 - phi) * qtask.data_size * qtask.logical_qubits
    step_time = (
        tech.tau_1qb * resources.n_1qb + tech.tau_2qb * resources.n_2qb + tech.tau_meas * resources.n_meas
    )
    step_energy = (
        powers.e_1qb * resources.n_1qb
        + powers.e_2qb * resources.n_2qb
        + powers.e_meas * resources.n_meas
        + powers.e_qubit * resources.physical_per_logical
    )
    latency = scale * step_time
    energy = scale * step_energy
    return CostBreakdown(
        transmit_latency=d_tx,
        quantum_latency=latency,
        transmit_energy=e_tx,
        quantum_energy=energy,
        weighted_latency=user.weight_latency * (d_tx + latency),
        weighted_energy=user.weight_energy * (e_tx + energy),
    )


def quantum_feasible(
    qtask: QuantumTaskSpec, user: UserProfile, server: ServerProfile, success_prob: float
) -> int:
    capacity = min(user.subscribed_logical_qubits, server.logical_capacity)
    return int(qtask.logical_qubits <= capacity and success_prob >= SUCCESS_THRESHOLD)


@dataclass(frozen=True)
class EndpointTable:
    """Per-user costs at the two endpoints of the local ratio.

    local[u] is c^L at phi=1; edge[u, e] and quantum[u, e] are c^E and c^Q at phi=0
    (transmission included). Every cost is affine in phi, so
    c_u(phi) = phi * local[u] + (1 - phi) * offload[u, e].
    """

    local: np.ndarray
    edge: np.ndarray
    quantum: np.ndarray
    eligible: np.ndarray

    def user_cost(self, user: int, server: int, phi: float, indicator: int) -> float:
        offload = self.quantum[user, server] if indicator else self.edge[user, server]
        if phi == 1.0:
            return float(self.local[user])
        if phi == 0.0:
            return float(offload)
        return float(phi * self.local[user] + (1.0 - phi) * offload)


class CostModel:
    def __init__(self, scenario: "Scenario", quantum_enabled: bool = True):
        self.scenario = scenario
        self.quantum_enabled = quantum_enabled
        self.device: DeviceCharacterization = characterize_device(scenario.device)
        self.chip_energy = scenario.chip_energy_per_cycle
        self.resources = {
            k: logical_resources(k) for k in {s.concatenation_level for s in scenario.servers}
        }
        n_users, n_servers = len(scenario.users), len(scenario.servers)
        self.success = np.zeros((n_users, n_servers))
        self.eligible = np.zeros((n_users, n_servers), dtype=bool)
        for u, entry in enumerate(scenario.users):
            for e, server in enumerate(scenario.servers):
                prob = success_probability(
                    entry.quantum_task.logical_qubits,
                    entry.quantum_task.logical_depth,
                    server.concatenation_level,
                    self.device.error_rate,
                    self.device.error_threshold,
                )
                self.success[u, e] = prob
                if quantum_enabled:
                    self.eligible[u, e] = bool(
                        quantum_feasible(entry.quantum_task, entry.profile, server, prob)
                    )
        logger.debug(
            f"Cost model ready: eps_err={self.device.error_rate:.3e}, "
            f"eligible pairs={int(self.eligible.sum())}/{self.eligible.size}"
        )

    @property
    def n_users(self) -> int:
        return len(self.scenario.users)

    @property
    def n_servers(self) -> int:
        return len(self.scenario.servers)

    def local(self, user: int, phi: float) -> CostBreakdown:
        entry = self.scenario.users[user]
        return local_cost(entry.profile, entry.task, phi, self.chip_energy)

    def edge(self, user: int, server: int, phi: float) -> CostBreakdown:
        entry = self.scenario.users[user]
        return edge_classical_cost(
            entry.profile, self.scenario.servers[server], server, entry.task, phi, self.chip_energy
        )

    def quantum(self, user: int, server: int, phi: float) -> CostBreakdown:
        entry = self.scenario.users[user]
        profile = self.scenario.servers[server]
        return edge_quantum_cost(
            entry.profile,
            profile,
            server,
            entry.quantum_task,
            phi,
            self.resources[profile.concatenation_level],
            self.device.powers,
            self.scenario.device.qubit,
        )

    def saving(self, user: int, server: int, phi: float) -> float:
        """c^E - c^Q for one user on one server; positive when the QPU is cheaper."""
        return self.edge(user, server, phi).cost - self.quantum(user, server, phi).cost

    def user_cost(self, user: int, server: int, phi: float, indicator: int) -> CostBreakdown:
        offload = self.quantum(user, server, phi) if indicator else self.edge(user, server, phi)
        return self.local(user, phi) + offload

    def check_indicators(self, servers, indicators) -> None:
        granted: dict[int, int] = {}
        for u, (server, flag) in enumerate(zip(servers, indicators)):
            if not flag:
                continue
            if not self.eligible[u, server]:
                raise ContractViolationError(f"user {u} granted a QPU it cannot run on at server {server}")
            if server in granted:
                raise ContractViolationError(
                    f"server {server} granted its QPU to users {granted[server]} and {u}"
                )
            granted[server] = u

    def total(self, action: "JointAction") -> tuple[float, list[CostBreakdown]]:
        if action.indicators is None:
            raise ContractViolationError("indicators must be resolved before costing")
        if not len(action.servers) == len(action.local_ratios) == len(action.indicators) == self.n_users:
            raise ContractViolationError("action length does not match the number of users")
        self.check_indicators(action.servers, action.indicators)
        breakdowns = [
            self.user_cost(u, server, phi, flag)
            for u, (server, phi, flag) in enumerate(
                zip(action.servers, action.local_ratios, action.indicators)
            )
        ]
        return sum(b.cost for b in breakdowns), breakdowns

    def endpoint_table(self) -> EndpointTable:
        n_users, n_servers = self.n_users, self.n_servers
        local = np.array([self.local(u, 1.0).cost for u in range(n_users)])
        edge = np.full((n_users, n_servers), np.inf)
        quantum = np.full((n_users, n_servers), np.inf)
        for u in range(n_users):
            for e in range(n_servers):
                try:
                    edge[u, e] = self.edge(u, e, 0.0).cost
                    quantum[u, e] = self.quantum(u, e, 0.0).cost
                except InfeasibleLinkError:
                    logger.warning(f"User {u} has no usable link to server {e}; offloading disabled")
        return EndpointTable(local=local, edge=edge, quantum=quantum, eligible=self.eligible.copy())


def total_cost(scenario: "Scenario", action: "JointAction") -> tuple[float, list[CostBreakdown]]:
    return CostModel(scenario).total(action)
