# meqc/device_models.py - Cryostat, noise, error-correction and gate-power physics

from dataclasses import dataclass
from fractions import Fraction
import math

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.constants import hbar, k as k_boltzmann

from meqc.errors import DomainError, InvalidConfigError, UnsupportedLevelError

SUPPORTED_LEVELS = (1, 2, 3)
PHYSICAL_PER_LOGICAL_BASE = 91
GATE_GROWTH_BASE = 64
N_1QB_RATIO = Fraction(28, 185)
N_2QB_RATIO = Fraction(64, 185)
N_MEAS_RATIO = Fraction(28, 185)
MAX_ATTENUATION_DB = 300.0


class CryostatConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    total_attenuation_db: float = 40.0
    num_stages: int = 5
    t_qubit: float = 0.1
    t_gen: float = 300.0
    heat_gen: float = 10e-6
    heat_hemt: float = 50e-6
    t_hemt: float = 70.0
    heat_para: float = 10e-9
    t_para: float = 4.0

    def check(self) -> "CryostatConfig":
        if self.num_stages < 2:
            raise InvalidConfigError(f"num_stages must be >= 2, got {self.num_stages}")
        if not 0 < self.t_qubit < self.t_gen:
            raise InvalidConfigError(
                f"temperatures must satisfy 0 < t_qubit < t_gen, got {self.t_qubit} and {self.t_gen}"
            )
        if min(self.heat_gen, self.heat_hemt, self.heat_para) < 0:
            raise InvalidConfigError("heat loads must be non-negative")
        if self.t_hemt <= 0 or self.t_para <= 0:
            raise InvalidConfigError("amplifier temperatures must be positive")
        if not 0 <= self.total_attenuation_db <= MAX_ATTENUATION_DB:
            raise InvalidConfigError(
                f"total_attenuation_db must lie in [0, {MAX_ATTENUATION_DB:g}], got {self.total_attenuation_db}"
            )
        return self


class QubitTech(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    frequency: float = 6e9
    decoherence_time: float = 1e-3
    tau_1qb: float = 25e-9
    tau_2qb: float = 100e-9
    tau_meas: float = 100e-9
    tau_step: float = 100e-9

    @property
    def decay_rate(self) -> float:
        return 1.0 / self.decoherence_time

    @property
    def angular_frequency(self) -> float:
        return 2.0 * math.pi * self.frequency

    def check(self) -> "QubitTech":
        times = {
            "decoherence_time": self.decoherence_time,
            "tau_1qb": self.tau_1qb,
            "tau_2qb": self.tau_2qb,
            "tau_meas": self.tau_meas,
            "tau_step": self.tau_step,
        }
        for name, value in times.items():
            if not value > 0:
                raise InvalidConfigError(f"{name} must be > 0, got {value}")
        if not self.frequency > 0:
            raise InvalidConfigError(f"frequency must be > 0, got {self.frequency}")
        # a time step holds one gate of any kind
        if self.tau_step < max(self.tau_1qb, self.tau_2qb, self.tau_meas):
            raise InvalidConfigError("tau_step must be >= every gate time")
        return self


class DeviceConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    cryostat: CryostatConfig = Field(default_factory=CryostatConfig)
    qubit: QubitTech = Field(default_factory=QubitTech)
    error_threshold: float = 2e-4

    def check(self) -> "DeviceConfig":
        self.cryostat.check()
        self.qubit.check()
        if not self.error_threshold > 0:
            raise InvalidConfigError(f"error_threshold must be > 0, got {self.error_threshold}")
        return self


@dataclass(frozen=True)
class StageProfile:
    temperatures: tuple[float, ...]
    stage_attenuation: tuple[float, ...]
    # cumulative[i] is the attenuation between stage i+1 and the qubits, cumulative[0] == 1
    cumulative_attenuation: tuple[float, ...]


@dataclass(frozen=True)
class LogicalResources:
    k: int
    physical_per_logical: int
    n_1qb: float
    n_2qb: float
    n_meas: float


@dataclass(frozen=True)
class GatePowerProfile:
    p_pi: float
    p_1qb: float
    p_2qb: float
    p_meas: float
    p_qubit: float
    e_1qb: float
    e_2qb: float
    e_meas: float
    e_qubit: float


@dataclass(frozen=True)
class DeviceCharacterization:
    stages: StageProfile
    error_rate: float
    powers: GatePowerProfile
    error_threshold: float


def linear_attenuation(db: float) -> float:
    return 10.0 ** (db / 10.0)


def cryostat_stages(cfg: CryostatConfig) -> StageProfile:
    cfg.check()
    k = cfg.num_stages
    total = linear_attenuation(cfg.total_attenuation_db)
    ratio = cfg.t_gen / cfg.t_qubit

    temperatures = [cfg.t_qubit * ratio ** (i / (k - 1)) for i in range(k)]
    temperatures[0], temperatures[-1] = cfg.t_qubit, cfg.t_gen
    cumulative = [total ** (i / (k - 1)) for i in range(k)]
    cumulative[0], cumulative[-1] = 1.0, total

    per_stage = total ** (1.0 / (k - 1))
    return StageProfile(
        temperatures=tuple(temperatures),
        stage_attenuation=tuple([per_stage] * (k - 1)),
        cumulative_attenuation=tuple(cumulative),
    )


def bose_einstein(temperature: float, frequency: float) -> float:
    if not temperature > 0:
        raise DomainError(f"temperature must be > 0, got {temperature}")
    if not frequency > 0:
        raise DomainError(f"frequency must be > 0, got {frequency}")
    x = hbar * 2.0 * math.pi * frequency / (k_boltzmann * temperature)
    if x > 700:
        return 0.0
    return float(1.0 / np.expm1(x))


def physical_error_rate(cfg: CryostatConfig, tech: QubitTech) -> float:
    tech.check()
    stages = cryostat_stages(cfg)
    temps = stages.temperatures
    occupation = [bose_einstein(t, tech.frequency) for t in temps]

    # photons leaking in from stage i+1 cross i attenuators
    photon_sum = sum(
        (occupation[i + 1] - occupation[i]) / stages.cumulative_attenuation[i + 1]
        for i in range(len(temps) - 1)
    )
    eps = tech.decay_rate * tech.tau_step / 2.0 * (0.5 + occupation[0] + photon_sum)
    return min(max(eps, 0.0), 1.0)


def logical_resources(k: int) -> LogicalResources:
    if k not in SUPPORTED_LEVELS:
        raise UnsupportedLevelError(f"concatenation level must be one of {SUPPORTED_LEVELS}, got {k}")
    growth = GATE_GROWTH_BASE**k
    return LogicalResources(
        k=k,
        physical_per_logical=PHYSICAL_PER_LOGICAL_BASE**k,
        n_1qb=float(N_1QB_RATIO * growth),
        n_2qb=float(N_2QB_RATIO * growth),
        n_meas=float(N_MEAS_RATIO * growth),
    )


def gate_power_profile(cfg: CryostatConfig, tech: QubitTech, stages: StageProfile) -> GatePowerProfile:
    cfg.check()
    tech.check()
    p_pi = hbar * tech.angular_frequency * math.pi**2 / (4.0 * tech.decay_rate * tech.tau_1qb**2)

    carnot = 0.0
    previous = 0.0
    for temperature, cumulative in zip(stages.temperatures, stages.cumulative_attenuation):
        carnot += (cfg.t_gen - temperature) / temperature * (cumulative - previous)
        previous = cumulative
    p_2qb = p_pi * carnot
    p_1qb = tech.tau_1qb / tech.tau_step * p_2qb
    p_meas = tech.tau_meas / tech.tau_step * p_2qb

    t_ext = cfg.t_gen
    p_qubit = (
        t_ext / cfg.t_gen * cfg.heat_gen
        + t_ext / cfg.t_hemt * cfg.heat_hemt
        + t_ext / cfg.t_para * cfg.heat_para
    )
    step = tech.tau_step
    return GatePowerProfile(
        p_pi=p_pi,
        p_1qb=p_1qb,
        p_2qb=p_2qb,
        p_meas=p_meas,
        p_qubit=p_qubit,
        e_1qb=p_1qb * step,
        e_2qb=p_2qb * step,
        e_meas=p_meas * step,
        e_qubit=p_qubit * step,
    )


def success_probability(
    q_logical: float, d_logical: float, k: int, eps_err: float, eps_thr: float
) -> float:
    """Linear approximation of the chance a logical circuit finishes without a logical error."""
    if not eps_thr > 0:
        raise DomainError(f"error threshold must be > 0, got {eps_thr}")
    if q_logical <= 0 or d_logical <= 0:
        raise DomainError("logical qubit and depth counts must be > 0")
    if eps_err < 0:
        raise DomainError(f"physical error rate must be >= 0, got {eps_err}")
    locations = q_logical * d_logical
    prob = 1.0 - locations * eps_thr * (eps_err / eps_thr) ** (2**k)
    return min(max(prob, 0.0), 1.0)


def characterize_device(device: DeviceConfig) -> DeviceCharacterization:
    device.check()
    stages = cryostat_stages(device.cryostat)
    return DeviceCharacterization(
        stages=stages,
        error_rate=physical_error_rate(device.cryostat, device.qubit),
        powers=gate_power_profile(device.cryostat, device.qubit, stages),
        error_threshold=device.error_threshold,
    )
