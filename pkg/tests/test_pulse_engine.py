"""Tests for pulse-level evolution and selective pulse design."""

import dataclasses
import itertools
import math

import numpy as np
import pytest

from device_params import DeviceSpec, solve_rabi_for_resonance
from models import (
    ANY,
    CellType,
    Envelope,
    GateRule,
    InfeasibleSelectivityError,
    LaserSettings,
    MicrowaveDrive,
    PulseEvent,
    StateError,
    StepSizeError,
)
from programs import PulseProgram, event_oracle_unitary, validate_program
from pulse_engine import (
    MAX_STARK_PHASE,
    build_hamiltonian,
    event_propagator,
    evolve,
    evolve_logical,
    fidelity,
    gaussian_envelope,
    logical_propagator,
    resonance_groups,
    selective_pi_pulse,
    stark_limited_duration,
    stark_phase,
    step_count,
)
from qca_core import Observable, basis_index, expect, from_amplitudes, new_chain, probabilities, site_z
from quantities import HBAR_UEV_NS


@pytest.fixture
def single_cell():
    omega = solve_rabi_for_resonance(12.0, 95.0).value
    spec = DeviceSpec(pattern="A", detunings={"A": 12.0}, relay_detuning=4.0,
                      relay_couplings={"A": 438.18}, cavity_energy=95.0,
                      lasers=LaserSettings(omega, 0.0))
    return spec


def _square_pulse(spec, theta, phase=0.0, duration=10.0):
    drive = MicrowaveDrive(theta * HBAR_UEV_NS / duration, spec.cavity_energy, phase)
    return PulseEvent(duration, spec.lasers, drive)


def test_resonant_pi_pulse_flips_the_spin(single_cell):
    out = evolve(new_chain("A", "0"), _square_pulse(single_cell, math.pi), single_cell)
    assert site_z(out, 0) == pytest.approx(1.0, abs=1e-9)


def test_half_pi_about_y_gives_plus_x(single_cell):
    event = _square_pulse(single_cell, math.pi / 2, math.pi / 2)
    out = evolve_logical(new_chain("A", "0"), event, single_cell)
    assert expect(out, Observable.parse("X0", 1)) == pytest.approx(1.0, abs=1e-9)


def test_hamiltonian_is_hermitian(selective_spec):
    drive = MicrowaveDrive(0.5, 95.3, 0.2, Envelope.gaussian(2.0))
    h = build_hamiltonian(selective_spec, selective_spec.lasers, drive, t=3.0, duration=10.0)
    np.testing.assert_allclose(h, h.conj().T, atol=1e-12)


def test_step_size_limits(single_cell):
    shaped = PulseEvent(10.0, single_cell.lasers,
                        MicrowaveDrive(0.2, 95.0, 0.0, Envelope.gaussian(10.0 / 6.0)))
    assert step_count(shaped, single_cell) == 2000
    with pytest.raises(StepSizeError):
        step_count(shaped, single_cell, dt=1.0)
    strong = PulseEvent(10.0, single_cell.lasers,
                        MicrowaveDrive(100.0, 95.0, 0.0, Envelope.gaussian(10.0 / 6.0)))
    with pytest.raises(StepSizeError):
        step_count(strong, single_cell, dt=0.01)
    assert step_count(_square_pulse(single_cell, math.pi), single_cell) == 1


def test_optical_window_keeps_only_ising_phases(selective_spec):
    event = PulseEvent(10.0, selective_spec.lasers, label="window")
    np.testing.assert_allclose(logical_propagator(event, selective_spec),
                               event_oracle_unitary(event, selective_spec), atol=1e-10)


def test_offsets_enter_only_with_the_spin_laser(selective_spec):
    offsets = [0.3, 0.0, 0.0, 0.0, 0.0, 0.0]
    dark = PulseEvent(100.0, LaserSettings.off())
    np.testing.assert_allclose(event_propagator(dark, selective_spec, offsets=offsets),
                               event_propagator(dark, selective_spec), atol=1e-12)
    lit = PulseEvent(100.0, LaserSettings(1.07, 0.0, c_on=True, l_on=False))
    amps = np.zeros(64, dtype=complex)
    amps[[0, 1]] = 1 / math.sqrt(2)
    out = evolve_logical(from_amplitudes("ABCABC", amps), lit, selective_spec, offsets=offsets)
    expected = math.cos(0.3 * 100.0 / HBAR_UEV_NS)
    assert expect(out, Observable.parse("X0", 6)) == pytest.approx(expected, abs=1e-9)


def test_resonance_groups(selective_spec):
    groups = resonance_groups(selective_spec, GateRule(CellType.A, 0, 1))
    assert list(groups.values()) == [[0, 3]]
    assert list(groups) == [pytest.approx(-2.0, rel=1e-3)]
    with pytest.raises(StateError):
        resonance_groups(selective_spec, GateRule(CellType.A, ANY, 1))


def test_selective_pulse_passes_validation(selective_spec):
    event = selective_pi_pulse(selective_spec, GateRule(CellType.A, 0, 1))
    assert event.sites == (0, 3)
    assert event.microwave.frequency_energy == selective_spec.cavity_energy
    program = PulseProgram([event], pattern=selective_spec.pattern_string)
    assert validate_program(program, selective_spec).passed


def test_weak_exchange_is_not_selective(selective_spec):
    weak = dataclasses.replace(selective_spec, lasers=LaserSettings(1.07, 0.01))
    with pytest.raises(InfeasibleSelectivityError) as info:
        selective_pi_pulse(weak, GateRule(CellType.A, 0, 1))
    assert info.value.collisions
    assert all("collision" in c or "missed" in c for c in info.value.collisions)


@pytest.mark.slow
def test_selective_pulse_matches_oracle(selective_spec):
    event = selective_pi_pulse(selective_spec, GateRule(CellType.A, 0, 1))
    pulse = logical_propagator(event, selective_spec)
    oracle = event_oracle_unitary(event, selective_spec)
    n = selective_spec.n_sites
    indices = np.arange(1 << n)
    for bits in itertools.product("01", repeat=n):
        k = basis_index("".join(bits))
        assert abs(np.vdot(oracle[:, k], pulse[:, k])) ** 2 >= 0.99, bits
        expected = int(np.argmax(np.abs(oracle[:, k])))
        probs = np.abs(pulse[:, k]) ** 2
        for site in range(n):
            wrong = ((indices >> site) & 1) != ((expected >> site) & 1)
            assert probs[wrong].sum() <= 0.02, (bits, site)


def test_detuned_drive_gives_reduced_flip(single_cell):
    rabi, detuning = 0.1, 1.0
    generalized = math.hypot(rabi, detuning)
    drive = MicrowaveDrive(rabi, single_cell.cavity_energy + detuning)
    durations = np.linspace(0.5, 1.5, 21) * math.pi * HBAR_UEV_NS / generalized
    flips = []
    for duration in durations:
        out = evolve(new_chain("A", "0"), PulseEvent(duration, single_cell.lasers, drive), single_cell)
        flips.append(probabilities(out)[1])
    assert max(flips) == pytest.approx(rabi ** 2 / generalized ** 2, rel=0.1)


def test_shaped_pulse_error_is_second_order_in_dt(single_cell):
    duration = 10.0
    envelope = gaussian_envelope(duration)
    peak = math.pi * HBAR_UEV_NS / envelope.area(duration)
    drive = MicrowaveDrive(peak, single_cell.cavity_energy + 0.5, 0.0, envelope)
    event = PulseEvent(duration, single_cell.lasers, drive)
    reference = event_propagator(event, single_cell, dt=duration / 8000)
    coarse = np.linalg.norm(event_propagator(event, single_cell, dt=duration / 100) - reference)
    fine = np.linalg.norm(event_propagator(event, single_cell, dt=duration / 200) - reference)
    assert 3.0 < coarse / fine < 5.0


def test_stark_limited_duration():
    assert stark_phase(math.pi, 10.0, 0.0) == math.inf
    assert stark_limited_duration(math.pi, math.inf, 10.0) == 10.0
    assert stark_limited_duration(math.pi, 100.0, 10.0) == 10.0
    stretched = stark_limited_duration(math.pi, 4.0, 10.0)
    assert stretched == pytest.approx(45.9, abs=0.05)
    assert stark_phase(math.pi, stretched, 4.0) <= MAX_STARK_PHASE
    assert stark_phase(math.pi, stretched - 0.1, 4.0) > MAX_STARK_PHASE


def test_fidelity_between_representations():
    a = from_amplitudes("A", [1.0, 0.0])
    b = from_amplitudes("A", np.array([1.0, 1.0]) / math.sqrt(2))
    assert fidelity(a, b) == pytest.approx(0.5)
    assert fidelity(a.to_density(), b) == pytest.approx(0.5)
    assert fidelity(a.to_density(), b.to_density()) == pytest.approx(0.5, abs=1e-6)
    assert fidelity(b, b) == pytest.approx(1.0)
