# meqc/utils/scenario_io.py - Versioned JSON scenario files

from pathlib import Path
import logging

from pydantic import ValidationError

from meqc.errors import InvalidConfigError
from meqc.workload import Scenario

logger = logging.getLogger(__name__)

# Field-by-field layout of a scenario file (schema_version 1):
#   schema_version          int, always 1
#   seed                    int, the seed the scenario was drawn from
#   users[]                 one object per user
#     profile               local_cpu_hz, tx_power (W), weight_latency, weight_energy,
#                           channel_gains[E], edge_cpu_hz, subscribed_logical_qubits
#     task                  data_size (bytes), cycles_per_byte
#     quantum_task          data_size (bytes), logical_qubits, logical_depth
#     ray_tracing           primitive_exponent, coord_bits, frames, resolution, rays_per_primitive
#   servers[]               noise_power (W), bandwidth (Hz), concatenation_level, physical_qubits
#   device{}                cryostat{...}, qubit{...}, error_threshold
#   chip_energy_per_cycle   J/cycle
#   observation_scales{}    per-field maxima used to normalise observations


def dump_scenario(scenario: Scenario) -> str:
    return scenario.model_dump_json(indent=2) + "\n"


def parse_scenario(text: str) -> Scenario:
    try:
        scenario = Scenario.model_validate_json(text)
    except ValidationError as e:
        raise InvalidConfigError(f"Invalid scenario document: {e}") from e
    return scenario.check()


def save_scenario(scenario: Scenario, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dump_scenario(scenario), encoding="utf-8")
    logger.info(f"Wrote scenario with {len(scenario.users)} users and {len(scenario.servers)} servers to {path}")
    return path


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    scenario = parse_scenario(path.read_text(encoding="utf-8"))
    logger.info(f"Loaded scenario from {path}")
    return scenario
