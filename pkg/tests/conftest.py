import numpy as np
import pytest

from meqc import db
from meqc.device_models import CryostatConfig, DeviceConfig, QubitTech
from meqc.workload import ScenarioSettings, gen_scenario

# Energy-only cost, no cryostat heat load and long-lived qubits make a Grover run far
# cheaper than classical execution; 5000 physical qubits at level 1 hold 54 logical ones.
QPU_SETTINGS = ScenarioSettings(
    physical_qubit_range=(5000, 5000),
    level_choices=(1,),
    primitive_exponent_range=(3, 3),
    weight_latency=0.0,
    weight_energy=1.0,
    chip_energy_per_cycle=1e-9,
)
QPU_DEVICE = DeviceConfig(
    cryostat=CryostatConfig(heat_gen=0.0, heat_hemt=0.0, heat_para=0.0),
    qubit=QubitTech(decoherence_time=1e-2),
)


def make_qpu_scenario(users: int = 3, servers: int = 2, seed: int = 0):
    """Scenario in which every user is QPU-eligible everywhere and the QPU is the cheapest endpoint."""
    return gen_scenario(users, servers, seed, settings=QPU_SETTINGS, device=QPU_DEVICE)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def small_scenario():
    return gen_scenario(3, 3, seed=7)


@pytest.fixture
def qpu_scenario():
    return make_qpu_scenario()


@pytest.fixture
def ledger():
    engine = db.init_engine("sqlite://")
    yield engine
    db.SyncSessionLocal.remove()
    engine.dispose()
    db.sync_engine = None


@pytest.fixture
def make_qpu():
    return make_qpu_scenario


@pytest.fixture
def qpu_settings():
    return QPU_SETTINGS, QPU_DEVICE
