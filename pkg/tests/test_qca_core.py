"""Tests for chain states, observables and operator application."""

import numpy as np
import pytest

from models import StateError
from qca_core import (
    SX,
    SZ,
    ChainState,
    Observable,
    apply_channel,
    apply_unitary,
    basis_index,
    basis_string,
    expect,
    from_amplitudes,
    new_chain,
    parse_pattern,
    probabilities,
    reduced_site,
    site_z,
)


def test_parse_pattern_rules():
    assert len(parse_pattern("ABCABCD")) == 7
    with pytest.raises(StateError):
        parse_pattern("ABDC")
    with pytest.raises(StateError):
        parse_pattern("AAB")
    with pytest.raises(StateError):
        parse_pattern("")
    with pytest.raises(StateError):
        parse_pattern("ABX")


def test_site_k_is_bit_k():
    assert basis_index("100") == 1
    assert basis_index("001") == 4
    assert basis_string(6, 3) == "011"
    state = new_chain("ABC", "010")
    np.testing.assert_array_equal(np.flatnonzero(state.data), [2])


def test_spin_down_reads_minus_one():
    state = new_chain("ABC", "010")
    assert site_z(state, 0) == pytest.approx(-1.0)
    assert site_z(state, 1) == pytest.approx(1.0)


def test_observable_parsing():
    obs = Observable.parse("Z0", 3)
    assert obs.labels == ("Z", "I", "I")
    assert obs.name == "Z0"
    assert Observable.parse("IXZ", 3).name == "X1Z2"
    assert Observable.parse("X2Z0", 3).labels == ("Z", "I", "X")
    with pytest.raises(StateError):
        Observable.parse("Q1", 3)
    with pytest.raises(StateError):
        Observable.parse("Z5", 3)


def test_expect_matches_dense_matrix():
    rng = np.random.default_rng(7)
    amps = rng.normal(size=8) + 1j * rng.normal(size=8)
    state = from_amplitudes("ABC", amps / np.linalg.norm(amps))
    for text in ("X0", "Y1", "Z2", "X0Y1", "Y0Z1X2"):
        obs = Observable.parse(text, 3)
        dense = np.vdot(state.data, obs.matrix() @ state.data).real
        assert expect(state, obs) == pytest.approx(dense)
        assert expect(state.to_density(), obs) == pytest.approx(dense)


def test_apply_unitary_on_one_site():
    state = apply_unitary(new_chain("ABC", "000"), SX, [1])
    assert probabilities(state)[basis_index("010")] == pytest.approx(1.0)
    rho = apply_unitary(new_chain("ABC", "000", density=True), SX, [2])
    assert probabilities(rho)[basis_index("001")] == pytest.approx(1.0)


def test_apply_unitary_two_site_support_order():
    cnot = np.eye(4, dtype=complex)[[0, 3, 2, 1]]   # control bit 0, target bit 1
    state = apply_unitary(new_chain("ABC", "001"), cnot, [2, 0])
    assert probabilities(state)[basis_index("101")] == pytest.approx(1.0)


def test_apply_unitary_rejects_non_unitary():
    with pytest.raises(StateError):
        apply_unitary(new_chain("AB", "00"), np.array([[1, 1], [0, 1]]), [0])


def test_reduced_site_of_product_state():
    plus = np.array([1, 1]) / np.sqrt(2)
    down = np.array([1, 0])
    amps = np.kron(down, plus)          # site 0 in |+⟩, site 1 in |0⟩
    state = from_amplitudes("AB", amps)
    np.testing.assert_allclose(reduced_site(state, 0), 0.5 * np.ones((2, 2)), atol=1e-12)
    np.testing.assert_allclose(reduced_site(state.to_density(), 1), np.diag([1, 0]), atol=1e-12)


def test_phase_flip_channel_kills_coherence():
    plus = from_amplitudes("A", np.array([1, 1]) / np.sqrt(2)).to_density()
    out = apply_channel(plus, [np.sqrt(0.5) * np.eye(2), np.sqrt(0.5) * SZ], [0])
    np.testing.assert_allclose(out.data, 0.5 * np.eye(2), atol=1e-12)
    out.validate()


def test_validate_catches_bad_states():
    with pytest.raises(StateError):
        ChainState(parse_pattern("AB"), np.ones(4, dtype=complex)).validate()
    with pytest.raises(StateError):
        ChainState(parse_pattern("AB"), np.diag([1.0, 0.5, -0.5, 0.0]).astype(complex), True).validate()
    with pytest.raises(StateError):
        new_chain("AB", "0")


def test_state_dict_round_trip():
    state = new_chain("ABC", "011")
    restored = ChainState.from_dict(state.to_dict())
    np.testing.assert_array_equal(restored.data, state.data)
    assert restored.pattern == state.pattern
