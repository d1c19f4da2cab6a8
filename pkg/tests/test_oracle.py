import numpy as np
import pytest

from conftest import gaussian_envelope
from rotorpath.errors import ConfigurationError
from rotorpath.field import PulseTrain, field_squared, simulation_window
from rotorpath.oracle import OdeConfig, integrate, integrate_all
from rotorpath.propagator import QuantumSystem
from rotorpath.rotor import MOLECULES, geometry_matrix, rotor_energies
from rotorpath.constants import HBAR


def constant_one(t):
    return np.ones_like(np.asarray(t, dtype=float))


def n14_three_pulse_setup():
    """Shortened pulse train (n = -1..1) to keep direct integration quick."""
    spec = MOLECULES["n14"]
    system = QuantumSystem(energies=rotor_energies(8, spec))
    g = geometry_matrix(8).elements.copy()
    coef = -0.25 * spec.delta_alpha * g / HBAR
    train = PulseTrain(
        modulation_amplitude=2.5,
        peak_field=6.0e9,
        pulse_duration=500e-15,
        train_period=8.38e-12,
        index_range=(-1, 1),
    )
    window = simulation_window(train)
    coef_nodiag = coef.copy()
    np.fill_diagonal(coef_nodiag, 0.0)
    peak = float(np.max(field_squared(train.pulse_indices * train.train_period, train)))
    rate = max(system.max_frequency, float(np.max(np.abs(coef_nodiag))) * peak)
    return system, coef, coef_nodiag, train, window, rate


def test_zero_coupling_returns_initial_state_exactly():
    system = QuantumSystem(energies=rotor_energies(4, MOLECULES["n14"]))
    coef = np.zeros((4, 4))
    cfg = OdeConfig.for_rate(system.max_frequency)
    out = integrate(system, coef, constant_one, (0.0, 1e-12), 2, cfg)
    expected = np.zeros(4, dtype=complex)
    expected[2] = 1.0
    np.testing.assert_array_equal(out.amplitudes, expected)


def test_two_level_rabi_closed_form():
    system = QuantumSystem(energies=np.zeros(2))
    omega_rabi = 1.0e12
    coef = np.array([[0.0, omega_rabi], [omega_rabi, 0.0]])
    cfg = OdeConfig.for_rate(omega_rabi)
    for duration in (0.3e-12, 1.0e-12, 2.7e-12):
        out = integrate(system, coef, constant_one, (0.0, duration), 0, cfg)
        p_flip = abs(out.amplitudes[1]) ** 2
        assert p_flip == pytest.approx(np.sin(omega_rabi * duration) ** 2, abs=1e-8)


def test_norm_conservation_on_pulse_train():
    system, coef, coef_nodiag, train, window, rate = n14_three_pulse_setup()
    cfg = OdeConfig.for_rate(rate)
    amps = integrate_all(
        system, coef_nodiag, lambda t: field_squared(t, train), window, cfg
    )
    norms = np.sum(np.abs(amps) ** 2, axis=0)
    assert np.max(np.abs(1.0 - norms)) <= 1e-8


def test_step_halving_consistency():
    system, coef, coef_nodiag, train, window, rate = n14_three_pulse_setup()
    f2 = lambda t: field_squared(t, train)
    coarse = integrate_all(system, coef_nodiag, f2, window, OdeConfig.for_rate(rate), [0])
    halved = integrate_all(
        system, coef_nodiag, f2, window,
        OdeConfig(step_size=OdeConfig.for_rate(rate).step_size / 2), [0],
    )
    delta = np.max(np.abs(np.abs(coarse) ** 2 - np.abs(halved) ** 2))
    assert delta <= 1e-6


def test_gauge_consistency_under_energy_shift(toy_system, toy_coupling):
    envelope = gaussian_envelope()
    shifted = QuantumSystem(energies=toy_system.energies + 5.0e-22)
    rate = max(toy_system.max_frequency, float(np.max(np.abs(toy_coupling))))
    cfg = OdeConfig.for_rate(rate)
    a = integrate_all(toy_system, toy_coupling, envelope, (0.0, 1e-12), cfg, [0])
    b = integrate_all(shifted, toy_coupling, envelope, (0.0, 1e-12), cfg, [0])
    assert np.max(np.abs(np.abs(a) ** 2 - np.abs(b) ** 2)) <= 1e-10


def test_include_diagonal_flag_changes_dynamics():
    system, coef, coef_nodiag, train, window, rate = n14_three_pulse_setup()
    f2 = lambda t: field_squared(t, train)
    rate_full = max(rate, float(np.max(np.abs(coef))) * np.max(f2(train.pulse_indices * train.train_period)))
    without = integrate_all(system, coef, f2, window, OdeConfig.for_rate(rate_full), [0])
    with_diag = integrate_all(
        system, coef, f2, window,
        OdeConfig.for_rate(rate_full, include_diagonal=True), [0],
    )
    # the diagonal only rephases within each level, so populations move a
    # little through interference but stay the same order of magnitude
    assert not np.allclose(np.abs(without) ** 2, np.abs(with_diag) ** 2, atol=1e-12)


def test_step_size_bound_enforced(toy_system, toy_coupling):
    too_big = OdeConfig(step_size=1.0e-12)
    with pytest.raises(ConfigurationError):
        integrate_all(toy_system, toy_coupling, constant_one, (0.0, 1e-11), too_big, [0])


def test_config_validation():
    with pytest.raises(ConfigurationError):
        OdeConfig(step_size=0.0)
    with pytest.raises(ConfigurationError):
        OdeConfig.for_rate(0.0)


def test_window_and_initial_level_validation(toy_system, toy_coupling):
    cfg = OdeConfig.for_rate(1e13)
    with pytest.raises(ConfigurationError):
        integrate_all(toy_system, toy_coupling, constant_one, (1e-12, 0.0), cfg, [0])
    with pytest.raises(ConfigurationError):
        integrate(toy_system, toy_coupling, constant_one, (0.0, 1e-12), 9, cfg)
