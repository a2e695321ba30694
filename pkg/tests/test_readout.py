"""Tests for initialization, Faraday readout and D-cell tomography."""

import math

import numpy as np
import pytest

from demos import shift_and_read
from device_params import DeviceSpec, solve_rabi_for_resonance
from gate_oracle import rotation
from models import CellType, LaserSettings, StateError
from noise_ensemble import NoiseModel, evolve_with_dephasing, run_ensemble
from programs import PulseProgram, global_rotation
from qca_core import new_chain, probabilities, site_z
from readout import (
    TOMOGRAPHY_SETTINGS,
    BlochVector,
    faraday_readout,
    initialize_pumped,
    load_qubit,
    qubit_amplitudes,
    site_bloch,
    tomography_D,
    tomography_program,
)
from runner import prepare_initial


def test_pumping_leaves_every_spin_down():
    state = initialize_pumped("ABCABCD")
    assert all(site_z(state, k) == pytest.approx(-1.0) for k in range(7))
    flipped = initialize_pumped("ABC", pumping_fidelity=0.0)
    assert probabilities(flipped)[-1] == pytest.approx(1.0)
    with pytest.raises(ValueError):
        initialize_pumped("ABC", pumping_fidelity=1.5)


def test_imperfect_pumping_is_seeded():
    a = initialize_pumped("ABCABCD", 0.5, rng=np.random.default_rng(4))
    b = initialize_pumped("ABCABCD", 0.5, rng=np.random.default_rng(4))
    np.testing.assert_array_equal(a.data, b.data)


def test_load_qubit_writes_the_amplitudes():
    theta, phi = 1.0, 0.7
    state = load_qubit(initialize_pumped("ABC"), 1, qubit_amplitudes(theta, phi))
    bloch = site_bloch(state, 1)
    expected = BlochVector(math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi),
                           -math.cos(theta))
    np.testing.assert_allclose(bloch.as_array(), expected.as_array(), atol=1e-12)
    with pytest.raises(StateError):
        load_qubit(new_chain("ABC", "010"), 1, [1.0, 0.0])
    with pytest.raises(StateError):
        load_qubit(initialize_pumped("ABC"), 5, [1.0, 0.0])


def test_bloch_vector_bounds():
    with pytest.raises(StateError):
        BlochVector(1.0, 1.0, 0.0)
    clipped = BlochVector.clipped(2.0, 0.0, 0.0)
    assert clipped.as_array().tolist() == [1.0, 0.0, 0.0]
    assert BlochVector.clipped(0.3, 0.0, 0.0).x == 0.3
    up = BlochVector(0.0, 0.0, 1.0)
    assert up.fidelity(up) == pytest.approx(1.0)
    assert up.fidelity(BlochVector(0.0, 0.0, -1.0)) == pytest.approx(0.0)


def test_bloch_vector_of_basis_states():
    assert BlochVector.from_amplitudes([1, 0]).z == pytest.approx(-1.0)
    assert BlochVector.from_amplitudes([0, 1]).z == pytest.approx(1.0)
    plus_y = BlochVector.from_amplitudes(np.array([1, 1j]) / math.sqrt(2))
    np.testing.assert_allclose(plus_y.as_array(), [0.0, 1.0, 0.0], atol=1e-12)


def test_faraday_rotation_follows_target_magnetization(reference_spec, selective_spec):
    state = new_chain("ABCABCD", "1001000")
    signal = faraday_readout(state, "A", kappa=0.5)
    assert signal.angle == pytest.approx(0.5)
    assert signal.magnetization == pytest.approx(1.0)
    assert faraday_readout(state, CellType.B).angle == pytest.approx(-1.0)
    with pytest.raises(StateError):
        faraday_readout(new_chain("ABCABC", "000000"), "D")


def test_faraday_readout_of_an_ensemble(reference_spec, noiseless):
    program = PulseProgram(pattern=reference_spec.pattern_string)
    initial = new_chain(reference_spec.pattern, "1000000")
    result = run_ensemble(reference_spec, noiseless, program, 4, ["Z0"], initial=initial)
    signal = faraday_readout(result, "A")
    assert signal.angle == pytest.approx(0.0, abs=1e-12)
    assert signal.n_molecules == 4


def test_tomography_of_basis_and_superposition_states(reference_spec):
    empty = PulseProgram(pattern=reference_spec.pattern_string)
    up = tomography_D(reference_spec, empty, initial=new_chain(reference_spec.pattern, "0000001"))
    np.testing.assert_allclose(up.bloch.as_array(), [0.0, 0.0, 1.0], atol=1e-9)
    plus = load_qubit(initialize_pumped(reference_spec.pattern), 6, np.array([1, 1]) / math.sqrt(2))
    result = tomography_D(reference_spec, empty, initial=plus)
    np.testing.assert_allclose(result.bloch.as_array(), [1.0, 0.0, 0.0], atol=1e-9)
    plus_y = load_qubit(initialize_pumped(reference_spec.pattern), 6, np.array([1, 1j]) / math.sqrt(2))
    result = tomography_D(reference_spec, empty, initial=plus_y)
    np.testing.assert_allclose(result.bloch.as_array(), [0.0, 1.0, 0.0], atol=1e-9)
    assert result.to_dict()["n_molecules"] == 1


def test_tomography_needs_a_d_cell(selective_spec):
    with pytest.raises(StateError):
        tomography_D(selective_spec, PulseProgram(pattern=selective_spec.pattern_string))


def test_shifted_qubit_is_recovered_on_d(reference_spec):
    program = shift_and_read.build(reference_spec)
    initial = prepare_initial(reference_spec, program)
    result = tomography_D(reference_spec, program, NoiseModel.noiseless(), initial=initial,
                          level="oracle")
    target = BlochVector.from_amplitudes(qubit_amplitudes(shift_and_read.THETA, shift_and_read.PHI))
    assert result.bloch.fidelity(target) >= 0.999


def _d_cell():
    omega = solve_rabi_for_resonance(6.0, 95.0).value
    return DeviceSpec(pattern="D", detunings={"D": 6.0}, relay_detuning=4.0,
                      relay_couplings={"D": 365.14837167}, cavity_energy=95.0,
                      lasers=LaserSettings(omega, 0.0))


def _haar_angles(count, seed=20):
    rng = np.random.default_rng(seed)
    thetas = np.arccos(1.0 - 2.0 * rng.random(count))
    phis = rng.uniform(0.0, 2.0 * math.pi, count)
    return list(zip(thetas, phis))


def test_tomography_of_random_pulse_prepared_states():
    spec = _d_cell()
    initial = initialize_pumped(spec.pattern)
    for theta, phi in _haar_angles(20):
        prep = global_rotation(CellType.D, theta, phi, spec)
        result = tomography_D(spec, prep, initial=initial, level="pulse")
        expected = BlochVector.from_amplitudes(rotation(theta, phi) @ np.array([1.0, 0.0]))
        np.testing.assert_allclose(result.raw, expected.as_array(), atol=0.01)


@pytest.mark.slow
def test_noisy_tomography_matches_the_dephasing_channel():
    spec = _d_cell()
    noise = NoiseModel({CellType.D: 0.05}, {}, rng_seed=3)
    initial = initialize_pumped(spec.pattern)
    deviations = []
    for theta, phi in _haar_angles(20):
        prep = global_rotation(CellType.D, theta, phi, spec)
        result = tomography_D(spec, prep, noise, n_molecules=10_000, initial=initial, level="oracle")
        for k, (axis, _, sign) in enumerate(TOMOGRAPHY_SETTINGS):
            rho = evolve_with_dephasing(initial, tomography_program(spec, prep, axis), spec, noise,
                                        level="oracle")
            deviations.append((abs(result.raw[k] - sign * site_z(rho, 0)), result.stderr[k]))
    assert sum(d > 3 * err + 1e-9 for d, err in deviations) <= 3
    assert all(d <= 5 * err + 1e-9 for d, err in deviations)
