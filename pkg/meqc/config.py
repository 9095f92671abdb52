# meqc/config.py - Experiment configuration file (JSON) with key and line aware errors

import json
import logging
from pathlib import Path

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from meqc.device_models import DeviceConfig
from meqc.environment import EnvConfig
from meqc.errors import ConfigParseError, InvalidConfigError
from meqc.marl.ppo import TrainConfig
from meqc.workload import ScenarioSettings, SweepParameter

logger = logging.getLogger(__name__)

POLICY_NAMES = ("local", "random", "random_cloud", "greedy", "oracle", "marl")


class SweepSpec(BaseModel):
    """One swept setting. Values are SI units (Hz, qubits, seconds); weights give the latency weight."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    parameter: SweepParameter
    values: tuple[float, ...]

    def check(self) -> "SweepSpec":
        if not self.values:
            raise InvalidConfigError("values must be a non-empty list")
        if self.parameter == SweepParameter.WEIGHTS:
            if any(not 0.0 <= v <= 1.0 for v in self.values):
                raise InvalidConfigError("values must lie in [0, 1] for the weights sweep")
        elif self.parameter == SweepParameter.PHYSICAL_QUBITS:
            if any(v < 0 or v != int(v) for v in self.values):
                raise InvalidConfigError("values must be non-negative integers for the physical_qubits sweep")
        elif any(not v > 0 for v in self.values):
            raise InvalidConfigError(f"values must be > 0 for the {self.parameter.value} sweep")
        return self


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    scenario: ScenarioSettings = Field(default_factory=ScenarioSettings)
    device: DeviceConfig = Field(default_factory=DeviceConfig)
    environment: EnvConfig = Field(default_factory=EnvConfig)
    train: TrainConfig = Field(default_factory=TrainConfig)
    sweep: SweepSpec | None = None
    policies: tuple[str, ...] = ("local", "random", "random_cloud", "greedy")
    episodes: int = 100
    seeds: tuple[int, ...] = (0,)
    output: str = "results/sweep.csv"
    max_workers: int | None = None

    def check(self) -> "ExperimentConfig":
        _check_section("scenario", self.scenario)
        _check_section("device", self.device)
        _check_section("train", self.train)
        if self.sweep is not None:
            _check_section("sweep", self.sweep)
        unknown = [p for p in self.policies if p not in POLICY_NAMES]
        if unknown or not self.policies:
            raise ConfigParseError(f"policies must be a non-empty subset of {POLICY_NAMES}", key="policies")
        if self.episodes < 1:
            raise ConfigParseError(f"episodes must be >= 1, got {self.episodes}", key="episodes")
        if not self.seeds:
            raise ConfigParseError("seeds must be a non-empty list", key="seeds")
        if self.max_workers is not None and self.max_workers < 1:
            raise ConfigParseError("max_workers must be >= 1", key="max_workers")
        return self

    def with_seed(self, seed: int) -> "ExperimentConfig":
        return self.model_copy(
            update={"seeds": (seed,), "scenario": self.scenario.model_copy(update={"seed": seed})}
        )


def _check_section(name: str, section: BaseModel) -> None:
    for field in type(section).model_fields:
        value = getattr(section, field)
        if isinstance(value, BaseModel) and hasattr(value, "check"):
            _check_section(f"{name}.{field}", value)
    try:
        section.check()
    except ConfigParseError:
        raise
    except InvalidConfigError as e:
        # check() messages lead with the offending field name
        words = str(e).split()
        field = words[0] if words else ""
        key = f"{name}.{field}" if field in type(section).model_fields else name
        raise ConfigParseError(str(e), key=key) from e


def _locate(text: str, path: list[str]) -> int | None:
    """1-based line of the last key in ``path``, searching each key after the previous one."""
    lines = text.splitlines()
    start = 0
    found = None
    for part in path:
        needle = f'"{part}"'
        for i in range(start, len(lines)):
            if needle in lines[i]:
                found, start = i + 1, i
                break
        else:
            return found
    return found


def parse_config(text: str) -> ExperimentConfig:
    """Validate an experiment document; an empty document yields every default."""
    try:
        document = json.loads(text) if text.strip() else {}
    except json.JSONDecodeError as e:
        raise ConfigParseError(f"malformed config: {e.msg}", line=e.lineno) from e
    if not isinstance(document, dict):
        raise ConfigParseError("config document must be an object", line=1)

    try:
        cfg = ExperimentConfig.model_validate(document)
    except ValidationError as e:
        error = e.errors()[0]
        path = [str(p) for p in error["loc"] if not isinstance(p, int)]
        key = ".".join(path)
        raise ConfigParseError(error["msg"], key=key, line=_locate(text, path)) from e

    try:
        return cfg.check()
    except ConfigParseError as e:
        path = e.key.split(".") if e.key else []
        message = str(e).split(" [key:")[0]
        raise ConfigParseError(message, key=e.key, line=_locate(text, path)) from e


def load_config(path: str | Path | None) -> ExperimentConfig:
    if path is None:
        return parse_config("")
    text = Path(path).read_text(encoding="utf-8")
    logger.info(f"Loaded experiment config from {path}")
    return parse_config(text)
