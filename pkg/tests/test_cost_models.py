import math

import numpy as np
import pytest

from meqc.cost_models import (
    CostModel,
    QuantumTaskSpec,
    ServerProfile,
    TaskSpec,
    UserProfile,
    edge_classical_cost,
    edge_quantum_cost,
    local_cost,
    quantum_feasible,
    total_cost,
    transmission_cost,
    uplink_rate,
)
from meqc.device_models import CryostatConfig, QubitTech, cryostat_stages, gate_power_profile, logical_resources
from meqc.environment import JointAction
from meqc.errors import ContractViolationError, InvalidConfigError, UnknownServerError
from meqc.workload import RayTracingParams, Scenario, UserEntry, apply_sweep_value, gen_scenario


def _user(**overrides):
    values = dict(
        local_cpu_hz=1e9,
        tx_power=1e-4,
        weight_latency=0.5,
        weight_energy=0.5,
        channel_gains=(4.0, 8.0),
        edge_cpu_hz=10e9,
        subscribed_logical_qubits=30,
    )
    values.update(overrides)
    return UserProfile(**values)


TASK = TaskSpec(data_size=200e6, cycles_per_byte=48.0)
SERVER = ServerProfile(noise_power=1e-6, bandwidth=20e6, concatenation_level=1, physical_qubits=3000)


def test_uplink_rate_is_shannon_capacity():
    user = _user()
    assert uplink_rate(user, SERVER, 1) == pytest.approx(20e6 * math.log2(1.0 + 1e-4 * 8.0 / 1e-6))
    with pytest.raises(UnknownServerError):
        uplink_rate(user, SERVER, 2)


def test_local_cost_components():
    user = _user()
    cost = local_cost(user, TASK, 0.25, chip_energy=1e-11)
    cycles = 0.25 * 200e6 * 48.0
    assert cost.local_latency == pytest.approx(cycles / 1e9)
    assert cost.local_energy == pytest.approx(1e-11 * cycles)
    assert cost.cost == pytest.approx(0.5 * cycles / 1e9 + 0.5 * 1e-11 * cycles)
    assert local_cost(user, TASK, 0.0, 1e-11).cost == 0.0


def test_transmission_cost_uses_bits():
    user = _user()
    latency, energy = transmission_cost(user, SERVER, 0, TASK, 0.0)
    rate = uplink_rate(user, SERVER, 0)
    assert latency == pytest.approx(200e6 * 8 / rate)
    assert energy == pytest.approx(1e-4 * latency)
    assert transmission_cost(user, SERVER, 0, TASK, 1.0) == (0.0, 0.0)


def test_ratio_outside_unit_interval_is_rejected():
    with pytest.raises(ContractViolationError):
        local_cost(_user(), TASK, 1.5, 1e-11)


def test_edge_classical_cost_includes_transmission():
    user = _user()
    cost = edge_classical_cost(user, SERVER, 1, TASK, 0.0, 1e-11)
    d_tx, e_tx = transmission_cost(user, SERVER, 1, TASK, 0.0)
    assert cost.transmit_latency == d_tx
    assert cost.edge_latency == pytest.approx(200e6 * 48.0 / 10e9)
    assert cost.weighted_energy == pytest.approx(0.5 * (e_tx + 1e-11 * 200e6 * 48.0))


def test_cost_is_affine_in_ratio(small_scenario):
    model = CostModel(small_scenario)
    for phi in (0.0, 0.3, 0.7, 1.0):
        mixed = model.user_cost(0, 1, phi, 0).cost
        expected = phi * model.local(0, 1.0).cost + (1.0 - phi) * model.edge(0, 1, 0.0).cost
        assert mixed == pytest.approx(expected, rel=1e-12)


def test_quantum_feasibility_needs_capacity_and_success():
    qtask = QuantumTaskSpec(data_size=1e6, logical_qubits=20, logical_depth=813)
    assert SERVER.logical_capacity == 32
    assert quantum_feasible(qtask, _user(subscribed_logical_qubits=30), SERVER, 0.9) == 1
    assert quantum_feasible(qtask, _user(subscribed_logical_qubits=10), SERVER, 0.9) == 0
    assert quantum_feasible(qtask, _user(), SERVER.model_copy(update={"physical_qubits": 1000}), 0.9) == 0
    assert quantum_feasible(qtask, _user(), SERVER, 0.5) == 0


def test_profiles_reject_invalid_values():
    with pytest.raises(InvalidConfigError):
        _user(weight_latency=1.5).check()
    with pytest.raises(InvalidConfigError):
        ServerProfile(bandwidth=-1.0).check()
    with pytest.raises(InvalidConfigError):
        ServerProfile(concatenation_level=4).check()


def test_success_probabilities_are_probabilities():
    model = CostModel(gen_scenario(4, 4, seed=0))
    assert model.success.shape == (4, 4)
    assert np.all((model.success >= 0.0) & (model.success <= 1.0))


def test_qpu_scenario_makes_the_qpu_cheapest(qpu_scenario):
    model = CostModel(qpu_scenario)
    table = model.endpoint_table()
    assert table.eligible.all()
    assert np.all(table.quantum < table.edge)
    assert np.all(table.quantum < table.local[:, None])
    assert model.saving(0, 0, 0.0) > 0.0


def test_quantum_disabled_removes_eligibility(qpu_scenario):
    model = CostModel(qpu_scenario, quantum_enabled=False)
    assert not model.eligible.any()


def test_total_checks_indicators(qpu_scenario):
    model = CostModel(qpu_scenario)
    shared = JointAction((0, 0, 1), (0.0, 0.0, 0.0), (1, 1, 0))
    with pytest.raises(ContractViolationError):
        model.total(shared)
    with pytest.raises(ContractViolationError):
        model.total(JointAction((0, 0, 1), (0.0, 0.0, 0.0)))
    total, breakdowns = model.total(JointAction((0, 1, 1), (0.0, 0.0, 1.0), (1, 1, 0)))
    assert len(breakdowns) == 3
    assert total == pytest.approx(sum(b.cost for b in breakdowns))
    assert breakdowns[0].quantum_energy > 0.0
    assert breakdowns[2].transmit_latency == 0.0


def test_total_cost_matches_endpoint_table(small_scenario):
    action = JointAction((0, 1, 2), (1.0, 0.0, 0.0), (0, 0, 0))
    total, _ = total_cost(small_scenario, action)
    table = CostModel(small_scenario).endpoint_table()
    expected = table.local[0] + table.edge[1, 1] + table.edge[2, 2]
    assert total == pytest.approx(expected, rel=1e-12)
    assert table.user_cost(1, 1, 0.0, 0) == table.edge[1, 1]


def _powers():
    cryostat, tech = CryostatConfig(), QubitTech()
    return gate_power_profile(cryostat, tech, cryostat_stages(cryostat)), tech


def test_edge_quantum_cost_matches_gate_counts():
    powers, tech = _powers()
    resources = logical_resources(1)
    qtask = QuantumTaskSpec(data_size=1e6, logical_qubits=20, logical_depth=813)
    step_time = 25e-9 * resources.n_1qb + 100e-9 * resources.n_2qb + 100e-9 * resources.n_meas
    assert step_time == pytest.approx(3.425e-6, rel=1e-3)
    step_energy = (
        powers.e_1qb * resources.n_1qb
        + powers.e_2qb * resources.n_2qb
        + powers.e_meas * resources.n_meas
        + powers.e_qubit * 91
    )

    user = _user()
    full = edge_quantum_cost(user, SERVER, 1, qtask, 0.0, resources, powers, tech)
    assert full.quantum_latency == pytest.approx(1e6 * 20 * step_time, rel=1e-12)
    assert full.quantum_energy == pytest.approx(1e6 * 20 * step_energy, rel=1e-12)
    assert full.transmit_latency == transmission_cost(user, SERVER, 1, qtask, 0.0)[0]

    half = edge_quantum_cost(user, SERVER, 1, qtask, 0.5, resources, powers, tech)
    assert full.quantum_latency == pytest.approx(2.0 * half.quantum_latency, rel=1e-12)
    assert full.quantum_energy == pytest.approx(2.0 * half.quantum_energy, rel=1e-12)
    assert full.cost == pytest.approx(2.0 * half.cost, rel=1e-12)

    none = edge_quantum_cost(user, SERVER, 1, qtask, 1.0, resources, powers, tech)
    assert none.latency == none.energy == none.cost == 0.0


def _entry(profile, data_size, cycles_per_byte):
    return UserEntry(
        profile=profile,
        task=TaskSpec(data_size=data_size, cycles_per_byte=cycles_per_byte),
        quantum_task=QuantumTaskSpec(data_size=data_size, logical_qubits=20, logical_depth=813),
        ray_tracing=RayTracingParams(primitive_exponent=3),
    )


def _two_user_scenario():
    servers = (SERVER, SERVER.model_copy(update={"bandwidth": 10e6}))
    users = (
        _entry(_user(local_cpu_hz=2e9, channel_gains=(5.0, 7.5)), 300e6, 24.0),
        _entry(_user(tx_power=0.15e-3, weight_latency=0.8, weight_energy=0.2, edge_cpu_hz=15e9), 800e6, 96.0),
    )
    return Scenario(users=users, servers=servers, chip_energy_per_cycle=1e-11).check()


def _hand_cost(profile, s, n, bandwidth, gain, phi, gamma=1e-11):
    d_local = phi * s * n / profile.local_cpu_hz
    e_local = gamma * phi * s * n
    rate = bandwidth * math.log2(1.0 + profile.tx_power * gain / 1e-6)
    d_tx = (1.0 - phi) * s * 8.0 / rate
    e_tx = profile.tx_power * d_tx
    d_edge = (1.0 - phi) * s * n / profile.edge_cpu_hz
    e_edge = gamma * (1.0 - phi) * s * n
    return profile.weight_latency * (d_local + d_tx + d_edge) + profile.weight_energy * (e_local + e_tx + e_edge)


def test_total_cost_matches_hand_summed_two_user_instance():
    scenario = _two_user_scenario()
    action = JointAction((1, 0), (0.25, 0.6), (0, 0))
    total, costs = total_cost(scenario, action)
    first, second = scenario.users
    expected = [
        _hand_cost(first.profile, 300e6, 24.0, 10e6, 7.5, 0.25),
        _hand_cost(second.profile, 800e6, 96.0, 20e6, 4.0, 0.6),
    ]
    assert [c.cost for c in costs] == pytest.approx(expected, rel=1e-12)
    assert total == pytest.approx(sum(expected), rel=1e-12)


def test_total_cost_is_permutation_equivariant():
    scenario = _two_user_scenario()
    swapped = scenario.model_copy(update={"users": scenario.users[::-1]})
    total, costs = total_cost(scenario, JointAction((1, 0), (0.25, 0.6), (0, 0)))
    swapped_total, swapped_costs = total_cost(swapped, JointAction((0, 1), (0.6, 0.25), (0, 0)))
    assert swapped_costs == costs[::-1]
    assert swapped_total == pytest.approx(total, rel=1e-12)


def _fixed_action(scenario, rng):
    n_users, n_servers = len(scenario.users), len(scenario.servers)
    servers = tuple(int(s) for s in rng.integers(n_servers, size=n_users))
    return JointAction(servers, tuple(float(r) for r in rng.uniform(size=n_users)), (0,) * n_users)


def test_cost_never_rises_with_edge_cpu(small_scenario):
    rng = np.random.default_rng(2)
    for _ in range(20):
        action = _fixed_action(small_scenario, rng)
        costs = [
            total_cost(apply_sweep_value(small_scenario, "edge_cpu", f), action)[0] for f in (5e9, 10e9, 15e9, 40e9)
        ]
        assert all(b <= a for a, b in zip(costs, costs[1:]))


def test_cost_never_rises_with_uplink_rate(small_scenario):
    rng = np.random.default_rng(3)
    for _ in range(20):
        action = _fixed_action(small_scenario, rng)
        costs = []
        for factor in (0.5, 1.0, 2.0, 8.0):
            gains = [tuple(g * factor for g in e.profile.channel_gains) for e in small_scenario.users]
            users = tuple(
                e.model_copy(update={"profile": e.profile.model_copy(update={"channel_gains": g})})
                for e, g in zip(small_scenario.users, gains)
            )
            costs.append(total_cost(small_scenario.model_copy(update={"users": users}), action)[0])
        assert all(b <= a for a, b in zip(costs, costs[1:]))


def _with_profiles(scenario, **update):
    users = tuple(e.model_copy(update={"profile": e.profile.model_copy(update=update)}) for e in scenario.users)
    return scenario.model_copy(update={"users": users})


def test_zero_latency_weight_ignores_processing_speed(qpu_scenario):
    # the QPU fixture weighs energy only
    action = JointAction((0, 1, 1), (0.3, 0.0, 0.7), (1, 1, 0))
    base, _ = total_cost(qpu_scenario, action)
    faster, _ = total_cost(_with_profiles(qpu_scenario, local_cpu_hz=3e9, edge_cpu_hz=40e9), action)
    assert faster == base


def test_zero_energy_weight_ignores_energy_coefficients(qpu_scenario):
    latency_only = _with_profiles(qpu_scenario, weight_latency=1.0, weight_energy=0.0)
    action = JointAction((0, 1, 1), (0.3, 0.0, 0.7), (1, 1, 0))
    base, _ = total_cost(latency_only, action)
    cryostat = latency_only.device.cryostat.model_copy(update={"heat_gen": 1e-3, "heat_hemt": 1e-3})
    hotter = latency_only.model_copy(
        update={"chip_energy_per_cycle": 5e-9, "device": latency_only.device.model_copy(update={"cryostat": cryostat})}
    )
    changed, _ = total_cost(hotter, action)
    assert changed == base
