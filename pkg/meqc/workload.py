# meqc/workload.py - Ray-tracing task generation, quantum footprint and scenario sampling

from enum import Enum
import logging
import math

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from meqc.cost_models import QuantumTaskSpec, ServerProfile, TaskSpec, UserProfile
from meqc.device_models import DeviceConfig
from meqc.errors import InvalidConfigError

logger = logging.getLogger(__name__)

SCENARIO_SCHEMA_VERSION = 1
BYTES_PER_MB = 1e6
RAYS_PER_PRIMITIVE = 3
RESOLUTIONS = (1280 * 720, 1920 * 1080, 2560 * 1440, 3840 * 2160)

# spawn-key codes; never renumber, scenario draws depend on them
_ENTITY_CODES = {"user": 1, "server": 2}
_FIELD_CODES = {
    "primitives": 1,
    "frames": 2,
    "resolution": 3,
    "data_size": 4,
    "local_cpu": 5,
    "tx_power": 6,
    "gain": 7,
    "edge_cpu": 8,
    "physical_qubits": 9,
    "level": 10,
}


class RayTracingParams(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    primitive_exponent: int
    coord_bits: int = 6
    frames: int = 1024
    resolution: int = 1920 * 1080
    rays_per_primitive: int = RAYS_PER_PRIMITIVE

    @property
    def primitives(self) -> int:
        return 2**self.primitive_exponent

    def check(self) -> "RayTracingParams":
        if not 3 <= self.primitive_exponent <= 9:
            raise InvalidConfigError(f"primitive_exponent must lie in 3..9, got {self.primitive_exponent}")
        if self.coord_bits < 1:
            raise InvalidConfigError(f"coord_bits must be >= 1, got {self.coord_bits}")
        if not 1024 <= self.frames <= 10240:
            raise InvalidConfigError(f"frames must lie in [1024, 10240], got {self.frames}")
        return self


class UserEntry(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    profile: UserProfile
    task: TaskSpec
    quantum_task: QuantumTaskSpec
    ray_tracing: RayTracingParams


class ObservationScales(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    local_cpu_hz: float = 3e9
    data_size: float = 1600 * BYTES_PER_MB
    cycles_per_byte: float = 3 * 2**9
    logical_qubits: float = 26
    logical_depth: float = 6460
    edge_cpu_hz: float = 20e9
    subscribed_logical_qubits: float = 5000 // 91
    concatenation_level: float = 3
    tx_power: float = 0.2e-3
    channel_gain: float = 8.0


class ScenarioSettings(BaseModel):
    """Sampling ranges for generated scenarios; defaults are the published simulation settings."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    users: int = 10
    servers: int = 10
    seed: int = 0
    channel_gain_range: tuple[float, float] = (4.0, 8.0)
    tx_power_range: tuple[float, float] = (0.01e-3, 0.2e-3)
    bandwidth: float = 20e6
    noise_power: float = 1e-6
    local_cpu_choices: tuple[float, ...] = (1e9, 2e9, 3e9)
    edge_cpu_choices: tuple[float, ...] = (10e9, 15e9, 20e9)
    chip_energy_per_cycle: float = 1e-11
    physical_qubit_range: tuple[int, int] = (1000, 5000)
    level_choices: tuple[int, ...] = (1, 2, 3)
    weight_latency: float = 0.5
    weight_energy: float = 0.5
    data_size_mb_range: tuple[float, float] = (160.0, 1600.0)
    primitive_exponent_range: tuple[int, int] = (3, 9)
    coord_bits: int = 6
    frame_range: tuple[int, int] = (1024, 10240)

    def check(self) -> "ScenarioSettings":
        if self.users < 1 or self.servers < 1:
            raise InvalidConfigError("a scenario needs at least one user and one server")
        ranges = {
            "channel_gain_range": self.channel_gain_range,
            "tx_power_range": self.tx_power_range,
            "physical_qubit_range": self.physical_qubit_range,
            "data_size_mb_range": self.data_size_mb_range,
            "primitive_exponent_range": self.primitive_exponent_range,
            "frame_range": self.frame_range,
        }
        for name, (low, high) in ranges.items():
            if low > high:
                raise InvalidConfigError(f"{name} must be ordered low <= high, got {(low, high)}")
        if min(self.channel_gain_range) <= 0 or min(self.tx_power_range) <= 0:
            raise InvalidConfigError("channel gains and transmit powers must be > 0")
        if not self.bandwidth > 0:
            raise InvalidConfigError(f"bandwidth must be > 0, got {self.bandwidth}")
        if not self.noise_power > 0:
            raise InvalidConfigError(f"noise_power must be > 0, got {self.noise_power}")
        if not self.local_cpu_choices or min(self.local_cpu_choices) <= 0:
            raise InvalidConfigError("local_cpu_choices must be non-empty and positive")
        if not self.edge_cpu_choices or min(self.edge_cpu_choices) <= 0:
            raise InvalidConfigError("edge_cpu_choices must be non-empty and positive")
        if self.chip_energy_per_cycle < 0:
            raise InvalidConfigError("chip_energy_per_cycle must be >= 0")
        if self.physical_qubit_range[0] < 0:
            raise InvalidConfigError("physical_qubit_range must be non-negative")
        if not self.level_choices or not set(self.level_choices) <= {1, 2, 3}:
            raise InvalidConfigError("level_choices must be a non-empty subset of {1, 2, 3}")
        for name in ("weight_latency", "weight_energy"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise InvalidConfigError(f"{name} must lie in [0, 1]")
        if self.data_size_mb_range[0] <= 0:
            raise InvalidConfigError("data sizes must be > 0")
        if self.coord_bits < 1:
            raise InvalidConfigError("coord_bits must be >= 1")
        return self


class Scenario(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    schema_version: int = SCENARIO_SCHEMA_VERSION
    seed: int = 0
    users: tuple[UserEntry, ...]
    servers: tuple[ServerProfile, ...]
    device: DeviceConfig = Field(default_factory=DeviceConfig)
    chip_energy_per_cycle: float = 1e-11
    observation_scales: ObservationScales = Field(default_factory=ObservationScales)

    def check(self) -> "Scenario":
        if self.schema_version != SCENARIO_SCHEMA_VERSION:
            raise InvalidConfigError(f"unsupported scenario schema_version {self.schema_version}")
        if not self.users or not self.servers:
            raise InvalidConfigError("a scenario needs at least one user and one server")
        for entry in self.users:
            entry.profile.check()
            entry.task.check()
            entry.quantum_task.check()
            if len(entry.profile.channel_gains) != len(self.servers):
                raise InvalidConfigError("every user needs one channel gain per server")
        for server in self.servers:
            server.check()
        self.device.check()
        return self


def field_rng(seed: int, entity: str, index: int, field: str, sub: int = 0) -> np.random.Generator:
    """Independent stream for one field of one entity, stable under changes to U and E."""
    sequence = np.random.SeedSequence(
        entropy=seed, spawn_key=(_ENTITY_CODES[entity], index, _FIELD_CODES[field], sub)
    )
    return np.random.Generator(np.random.Philox(sequence))


def compile_quantum(params: RayTracingParams, task: TaskSpec) -> QuantumTaskSpec:
    width = params.primitive_exponent + 2 * params.coord_bits + 5
    search = math.floor(math.pi / 4 * math.sqrt(2.0**width))
    return QuantumTaskSpec(
        data_size=task.data_size,
        logical_qubits=width,
        logical_depth=3 * params.primitive_exponent + search,
    )


def gen_task(params: RayTracingParams, rng: np.random.Generator, settings: ScenarioSettings | None = None) -> TaskSpec:
    settings = settings or ScenarioSettings()
    low, high = settings.data_size_mb_range
    size = float(rng.uniform(low, high)) * BYTES_PER_MB
    return TaskSpec(data_size=size, cycles_per_byte=float(RAYS_PER_PRIMITIVE * params.primitives))


def draw_ray_tracing_params(
    seed: int, user: int, settings: ScenarioSettings, episode: int = 0
) -> RayTracingParams:
    pb_low, pb_high = settings.primitive_exponent_range
    frame_low, frame_high = settings.frame_range
    pb = int(field_rng(seed, "user", user, "primitives", episode).integers(pb_low, pb_high + 1))
    frames = int(field_rng(seed, "user", user, "frames", episode).integers(frame_low, frame_high + 1))
    resolution = int(field_rng(seed, "user", user, "resolution", episode).choice(RESOLUTIONS))
    return RayTracingParams(
        primitive_exponent=pb, coord_bits=settings.coord_bits, frames=frames, resolution=resolution
    )


def draw_user_workload(
    seed: int, user: int, settings: ScenarioSettings, episode: int = 0
) -> tuple[RayTracingParams, TaskSpec, QuantumTaskSpec]:
    params = draw_ray_tracing_params(seed, user, settings, episode)
    task = gen_task(params, field_rng(seed, "user", user, "data_size", episode), settings)
    return params, task, compile_quantum(params, task)


def _draw_server(seed: int, index: int, settings: ScenarioSettings) -> ServerProfile:
    q_low, q_high = settings.physical_qubit_range
    return ServerProfile(
        noise_power=settings.noise_power,
        bandwidth=settings.bandwidth,
        concatenation_level=int(field_rng(seed, "server", index, "level").choice(settings.level_choices)),
        physical_qubits=int(field_rng(seed, "server", index, "physical_qubits").integers(q_low, q_high + 1)),
    )


def gen_scenario(
    users: int,
    servers: int,
    seed: int,
    settings: ScenarioSettings | None = None,
    device: DeviceConfig | None = None,
) -> Scenario:
    settings = (settings or ScenarioSettings()).model_copy(
        update={"users": users, "servers": servers, "seed": seed}
    )
    settings.check()
    device = (device or DeviceConfig()).check()

    server_profiles = tuple(_draw_server(seed, e, settings) for e in range(servers))
    best_capacity = max(s.logical_capacity for s in server_profiles)

    gain_low, gain_high = settings.channel_gain_range
    power_low, power_high = settings.tx_power_range
    entries = []
    for u in range(users):
        params, task, qtask = draw_user_workload(seed, u, settings)
        profile = UserProfile(
            local_cpu_hz=float(field_rng(seed, "user", u, "local_cpu").choice(settings.local_cpu_choices)),
            tx_power=float(field_rng(seed, "user", u, "tx_power").uniform(power_low, power_high)),
            weight_latency=settings.weight_latency,
            weight_energy=settings.weight_energy,
            channel_gains=tuple(
                float(field_rng(seed, "user", u, "gain", e).uniform(gain_low, gain_high))
                for e in range(servers)
            ),
            edge_cpu_hz=float(field_rng(seed, "user", u, "edge_cpu").choice(settings.edge_cpu_choices)),
            subscribed_logical_qubits=best_capacity,
        )
        entries.append(UserEntry(profile=profile, task=task, quantum_task=qtask, ray_tracing=params))

    scenario = Scenario(
        seed=seed,
        users=tuple(entries),
        servers=server_profiles,
        device=device,
        chip_energy_per_cycle=settings.chip_energy_per_cycle,
    )
    logger.debug(f"Generated scenario U={users} E={servers} seed={seed}")
    return scenario.check()


def redraw_tasks(scenario: Scenario, episode: int, settings: ScenarioSettings | None = None) -> Scenario:
    """Fresh tasks for every user, keyed by episode so runs stay reproducible."""
    settings = settings or ScenarioSettings()
    entries = []
    for u, entry in enumerate(scenario.users):
        params, task, qtask = draw_user_workload(scenario.seed, u, settings, episode=episode + 1)
        entries.append(entry.model_copy(update={"task": task, "quantum_task": qtask, "ray_tracing": params}))
    return scenario.model_copy(update={"users": tuple(entries)})


class SweepParameter(str, Enum):
    EDGE_CPU = "edge_cpu"
    PHYSICAL_QUBITS = "physical_qubits"
    DECOHERENCE_TIME = "decoherence_time"
    WEIGHTS = "weights"


def apply_sweep_value(scenario: Scenario, parameter: SweepParameter | str, value: float) -> Scenario:
    """Rewrite one setting of an existing scenario; every other draw stays as it was."""
    parameter = SweepParameter(parameter)
    if parameter == SweepParameter.EDGE_CPU:
        users = tuple(
            entry.model_copy(update={"profile": entry.profile.model_copy(update={"edge_cpu_hz": float(value)})})
            for entry in scenario.users
        )
        return scenario.model_copy(update={"users": users}).check()

    if parameter == SweepParameter.PHYSICAL_QUBITS:
        servers = tuple(s.model_copy(update={"physical_qubits": int(value)}) for s in scenario.servers)
        best_capacity = max(s.logical_capacity for s in servers)
        users = tuple(
            entry.model_copy(
                update={"profile": entry.profile.model_copy(update={"subscribed_logical_qubits": best_capacity})}
            )
            for entry in scenario.users
        )
        return scenario.model_copy(update={"servers": servers, "users": users}).check()

    if parameter == SweepParameter.DECOHERENCE_TIME:
        qubit = scenario.device.qubit.model_copy(update={"decoherence_time": float(value)})
        device = scenario.device.model_copy(update={"qubit": qubit})
        return scenario.model_copy(update={"device": device}).check()

    if not 0.0 <= value <= 1.0:
        raise InvalidConfigError(f"latency weight must lie in [0, 1], got {value}")
    users = tuple(
        entry.model_copy(
            update={
                "profile": entry.profile.model_copy(
                    update={"weight_latency": float(value), "weight_energy": 1.0 - float(value)}
                )
            }
        )
        for entry in scenario.users
    )
    return scenario.model_copy(update={"users": users}).check()
