"""Tests for the idealised rule semantics."""

import itertools
import logging
import math

import numpy as np
import pytest

from gate_oracle import (
    apply_rule,
    classical_automaton_step,
    conditional_unitary,
    expand_any,
    rotation,
    rz,
)
from models import ANY, BoundaryPolicy, CellType, GateRule, StateError
from qca_core import basis_index, basis_string, is_unitary, new_chain, probabilities

PATTERN = "ABCABCD"


def test_rotation_conventions():
    # R(θ, φ + π/2)|0⟩ = cos(θ/2)|0⟩ + e^{iφ} sin(θ/2)|1⟩
    theta, phi = 1.1, 0.4
    out = rotation(theta, phi + math.pi / 2) @ np.array([1, 0])
    np.testing.assert_allclose(out, [math.cos(theta / 2), np.exp(1j * phi) * math.sin(theta / 2)],
                               atol=1e-12)
    np.testing.assert_allclose(rotation(math.pi, 0.0), -1j * np.array([[0, 1], [1, 0]]), atol=1e-12)
    np.testing.assert_allclose(rz(0.7), np.diag([np.exp(0.35j), np.exp(-0.35j)]), atol=1e-12)


def test_expand_any_order():
    rules = expand_any(GateRule(CellType.B, ANY, ANY))
    assert [(r.left_cond, r.right_cond) for r in rules] == [(0, 0), (0, 1), (1, 0), (1, 1)]
    assert expand_any(GateRule(CellType.B, 1, 0)) == [GateRule(CellType.B, 1, 0)]


def test_conditional_unitary_is_unitary():
    rule = GateRule(CellType.C, 1, ANY, 0.9, 0.3)
    assert is_unitary(conditional_unitary(PATTERN, rule))


@pytest.mark.parametrize("rule", [
    GateRule(CellType.A, 0, 1),
    GateRule(CellType.B, 1, ANY),
    GateRule(CellType.C, ANY, 0),
    GateRule(CellType.D, 1, ANY),
    GateRule(CellType.A, ANY, ANY),
])
def test_oracle_agrees_with_classical_automaton(rule):
    unitary = conditional_unitary(PATTERN, rule)
    for bits in map("".join, itertools.product("01", repeat=len(PATTERN))):
        expected = classical_automaton_step(bits, PATTERN, rule)
        column = unitary[:, basis_index(bits)]
        assert abs(column[basis_index(expected)]) == pytest.approx(1.0)
        out = apply_rule(new_chain(PATTERN, bits), rule)
        assert probabilities(out)[basis_index(expected)] == pytest.approx(1.0)


def test_apply_rule_matches_unitary_on_superposition():
    rng = np.random.default_rng(3)
    amps = rng.normal(size=1 << 7) + 1j * rng.normal(size=1 << 7)
    state = new_chain(PATTERN, "0" * 7).with_data(amps / np.linalg.norm(amps))
    rule = GateRule(CellType.B, 1, 0, 1.3, 0.2)
    np.testing.assert_allclose(apply_rule(state, rule).data,
                               conditional_unitary(PATTERN, rule) @ state.data, atol=1e-12)
    rho = state.to_density()
    u = conditional_unitary(PATTERN, rule)
    np.testing.assert_allclose(apply_rule(rho, rule).data, u @ rho.data @ u.conj().T, atol=1e-12)


def test_every_matching_target_flips():
    rule = GateRule(CellType.A, ANY, 1)
    assert classical_automaton_step("0100100", PATTERN, rule) == "1101100"
    assert classical_automaton_step("0100000", PATTERN, rule) == "1100000"
    assert classical_automaton_step("0000000", PATTERN, rule) == "0000000"


def test_boundary_policy_is_the_virtual_neighbor():
    rule = GateRule(CellType.A, 1, ANY)
    assert classical_automaton_step("0000000", PATTERN, rule) == "0000000"
    assert classical_automaton_step("0000000", PATTERN, rule, BoundaryPolicy(1, 0)) == "1000000"
    rule_d = GateRule(CellType.D, ANY, 1)
    assert classical_automaton_step("0000000", PATTERN, rule_d, BoundaryPolicy(0, 1)) == "0000001"


def test_classical_step_needs_a_flip_rule():
    with pytest.raises(StateError):
        classical_automaton_step("0000000", PATTERN, GateRule(CellType.A, theta=math.pi / 2))
    with pytest.raises(StateError):
        classical_automaton_step("000", PATTERN, GateRule(CellType.A))


def test_z_rule_only_changes_phases():
    rule = GateRule(CellType.C, ANY, ANY, z_angle=0.8)
    unitary = conditional_unitary(PATTERN, rule)
    np.testing.assert_allclose(unitary, np.diag(np.diag(unitary)), atol=1e-12)
    assert basis_string(basis_index("0010010"), 7) == "0010010"


def test_apply_rule_logs_its_sites(caplog):
    with caplog.at_level(logging.DEBUG, logger="gate_oracle"):
        apply_rule(new_chain(PATTERN, "0000000"), GateRule(CellType.B, ANY, ANY))
    assert "sites [1, 4]" in caplog.text
