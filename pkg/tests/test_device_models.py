from fractions import Fraction
import math

import numpy as np
import pytest
from scipy.constants import h, k

from meqc.device_models import (
    CryostatConfig,
    DeviceConfig,
    QubitTech,
    bose_einstein,
    characterize_device,
    cryostat_stages,
    gate_power_profile,
    linear_attenuation,
    logical_resources,
    physical_error_rate,
    success_probability,
)
from meqc.errors import DomainError, InvalidConfigError, UnsupportedLevelError


def test_linear_attenuation():
    assert linear_attenuation(0.0) == 1.0
    assert linear_attenuation(40.0) == pytest.approx(1e4)


def test_cryostat_stages_are_geometric_with_exact_endpoints():
    cfg = CryostatConfig()
    stages = cryostat_stages(cfg)
    temps = stages.temperatures
    assert len(temps) == 5
    assert temps[0] == cfg.t_qubit
    assert temps[-1] == cfg.t_gen
    ratios = [b / a for a, b in zip(temps, temps[1:])]
    assert ratios == pytest.approx([ratios[0]] * 4, rel=1e-12)
    assert stages.cumulative_attenuation[0] == 1.0
    assert stages.cumulative_attenuation[-1] == pytest.approx(1e4)
    assert math.prod(stages.stage_attenuation) == pytest.approx(1e4, rel=1e-12)


def test_zero_attenuation_is_valid():
    stages = cryostat_stages(CryostatConfig(total_attenuation_db=0.0))
    assert stages.cumulative_attenuation == pytest.approx((1.0,) * 5)


def test_extreme_attenuation_is_rejected():
    with pytest.raises(InvalidConfigError, match="total_attenuation_db"):
        CryostatConfig(total_attenuation_db=4000.0).check()


def test_largest_accepted_attenuation_characterizes_finitely():
    device = DeviceConfig(cryostat=CryostatConfig(total_attenuation_db=300.0))
    device.check()
    profile = characterize_device(device)
    assert math.isfinite(profile.error_rate)
    assert all(math.isfinite(v) for v in vars(profile.powers).values())
    assert all(math.isfinite(a) for a in profile.stages.cumulative_attenuation)


@pytest.mark.parametrize(
    "overrides",
    [
        {"num_stages": 1},
        {"t_qubit": 400.0},
        {"heat_gen": -1.0},
        {"total_attenuation_db": -3.0},
    ],
)
def test_cryostat_rejects_invalid_settings(overrides):
    with pytest.raises(InvalidConfigError):
        CryostatConfig(**overrides).check()


def test_qubit_tech_requires_step_to_hold_every_gate():
    with pytest.raises(InvalidConfigError):
        QubitTech(tau_step=50e-9).check()
    with pytest.raises(InvalidConfigError):
        QubitTech(decoherence_time=0.0).check()


@pytest.mark.parametrize("temperature", [0.1, 300.0])
def test_bose_einstein_matches_planck_form(temperature):
    expected = 1.0 / math.expm1(h * 6e9 / (k * temperature))
    assert bose_einstein(temperature, 6e9) == pytest.approx(expected, rel=1e-6)


def test_bose_einstein_limits_and_domain():
    assert bose_einstein(1e-6, 6e9) == 0.0
    # Rayleigh-Jeans regime
    assert bose_einstein(300.0, 6e9) == pytest.approx(k * 300.0 / (h * 6e9) - 0.5, rel=1e-3)
    with pytest.raises(DomainError):
        bose_einstein(0.0, 6e9)
    with pytest.raises(DomainError):
        bose_einstein(1.0, -1.0)


def test_error_rate_strictly_decreasing_in_attenuation():
    tech = QubitTech()
    rates = [
        physical_error_rate(CryostatConfig(total_attenuation_db=db), tech) for db in np.linspace(0.0, 60.0, 20)
    ]
    assert all(b < a for a, b in zip(rates, rates[1:]))


def test_error_rate_linear_in_decay_rate():
    cfg = CryostatConfig()
    base = physical_error_rate(cfg, QubitTech(decoherence_time=1e-3))
    for factor in (0.5, 2.0, 10.0):
        scaled = physical_error_rate(cfg, QubitTech(decoherence_time=1e-3 / factor))
        assert scaled == pytest.approx(factor * base, rel=1e-9)


def test_error_rate_default_device_is_below_threshold():
    eps = physical_error_rate(CryostatConfig(), QubitTech())
    assert 0.0 < eps < DeviceConfig().error_threshold


@pytest.mark.parametrize("level", [1, 2, 3])
def test_logical_resources_constants(level):
    res = logical_resources(level)
    growth = Fraction(64) ** level
    assert res.physical_per_logical == 91**level
    assert res.n_1qb == pytest.approx(float(Fraction(28, 185) * growth), rel=1e-12)
    assert res.n_2qb == pytest.approx(float(Fraction(64, 185) * growth), rel=1e-12)
    assert res.n_meas == pytest.approx(float(Fraction(28, 185) * growth), rel=1e-12)


@pytest.mark.parametrize("level", [0, 4])
def test_logical_resources_rejects_unsupported_levels(level):
    with pytest.raises(UnsupportedLevelError):
        logical_resources(level)


def test_gate_power_profile_relations():
    cfg, tech = CryostatConfig(), QubitTech()
    powers = gate_power_profile(cfg, tech, cryostat_stages(cfg))
    assert powers.p_1qb == pytest.approx(tech.tau_1qb / tech.tau_step * powers.p_2qb)
    assert powers.p_meas == pytest.approx(tech.tau_meas / tech.tau_step * powers.p_2qb)
    assert powers.e_2qb == pytest.approx(powers.p_2qb * tech.tau_step)
    assert powers.e_qubit == pytest.approx(powers.p_qubit * tech.tau_step)
    expected_qubit = cfg.heat_gen + 300.0 / 70.0 * cfg.heat_hemt + 300.0 / 4.0 * cfg.heat_para
    assert powers.p_qubit == pytest.approx(expected_qubit)


def test_pi_pulse_power_grows_linearly_with_decoherence_time():
    cfg = CryostatConfig()
    stages = cryostat_stages(cfg)
    short = gate_power_profile(cfg, QubitTech(decoherence_time=1e-3), stages)
    long = gate_power_profile(cfg, QubitTech(decoherence_time=3e-3), stages)
    assert long.p_pi == pytest.approx(3.0 * short.p_pi, rel=1e-12)
    assert long.e_2qb > short.e_2qb


def test_success_probability_improves_with_level_below_threshold():
    q, d = 26, 6460
    p1 = success_probability(q, d, 1, 2e-5, 2e-4)
    p2 = success_probability(q, d, 2, 2e-5, 2e-4)
    assert p2 > p1
    assert 0.0 <= p1 <= 1.0


def test_success_probability_clamps_and_validates():
    assert success_probability(26, 6460, 1, 2e-3, 2e-4) == 0.0
    assert success_probability(1, 1, 3, 0.0, 2e-4) == 1.0
    with pytest.raises(DomainError):
        success_probability(20, 813, 1, 1e-5, 0.0)
    with pytest.raises(DomainError):
        success_probability(0, 813, 1, 1e-5, 2e-4)


def test_characterize_device_bundles_the_physics():
    device = DeviceConfig()
    info = characterize_device(device)
    assert info.error_rate == physical_error_rate(device.cryostat, device.qubit)
    assert info.error_threshold == device.error_threshold
    assert info.stages == cryostat_stages(device.cryostat)
