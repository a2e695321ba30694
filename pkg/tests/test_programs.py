"""Tests for pulse programs, the logical-op compiler and program files."""

import dataclasses
import itertools
import math

import numpy as np
import pytest

from gate_oracle import apply_rule, apply_rules
from models import ANY, CellType, GateRule, LaserSettings, ProgramFormatError, PulseEvent, StateError
from programs import (
    ControlledPhase,
    PulseProgram,
    Swap,
    compile_op,
    compile_rule,
    cycles_to_reach_d,
    global_rotation,
    load_program,
    program_from_dict,
    run_oracle,
    save_program,
    shift_permutation,
    shift_rules,
    validate_program,
)
from pulse_engine import (
    MAX_STARK_PHASE,
    ising_period,
    logical_propagator,
    spectator_detuning,
    stark_limited_duration,
    stark_phase,
)
from qca_core import basis_index, from_amplitudes, new_chain, probabilities, reduced_site
from quantities import HBAR_UEV_NS
from runner import compare_program

CHAIN = "ABCABCD"


def _random_state(pattern, seed=11):
    rng = np.random.default_rng(seed)
    dim = 1 << len(pattern)
    amps = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return from_amplitudes(pattern, amps / np.linalg.norm(amps))


def test_program_concatenation():
    a = PulseProgram([PulseEvent(5.0)], name="a", pattern=CHAIN)
    b = PulseProgram([PulseEvent(7.0)], metadata={"fit": "X0"})
    joined = a + b
    assert len(joined) == 2
    assert joined.total_duration == 12.0
    assert joined.start_times() == [0.0, 5.0]
    assert joined.metadata["fit"] == "X0"
    assert len(a) == 1


def _rule_events(program):
    return [e for e in program.events if e.rule is not None]


def test_specific_rule_compiles_to_one_pulse_and_window(selective_spec):
    program = compile_rule(GateRule(CellType.A, 0, 1), selective_spec)
    event, window = program.events
    assert event.sites == (0, 3)
    assert event.duration > selective_spec.gate_time
    closest = spectator_detuning(selective_spec, event.lasers, selective_spec.cavity_energy,
                                 event.rule, event.sites)
    assert stark_phase(math.pi, event.duration, closest) <= MAX_STARK_PHASE
    assert window.microwave is None
    assert window.lasers.effective_C == 0.0
    assert window.lasers.effective_L == event.lasers.effective_L
    assert validate_program(program, selective_spec).passed


def test_refocusing_windows_cancel_ising_phases(selective_spec):
    program = compile_rule(GateRule(CellType.A, ANY, ANY), selective_spec)
    assert len(_rule_events(program)) == 4
    assert len(program) == 8
    residuals = program.metadata["ising_residuals"]
    assert set(residuals) == {"0-1", "1-2", "2-3", "3-4", "4-5"}
    assert all(r == pytest.approx(0.0, abs=1e-6) for r in residuals.values())
    period = ising_period(selective_spec, selective_spec.lasers)
    assert period == pytest.approx(4.0 * math.pi * HBAR_UEV_NS / 2.0)
    for event, window in zip(program.events[::2], program.events[1::2]):
        assert (event.duration + window.duration) / period == pytest.approx(
            round((event.duration + window.duration) / period), abs=1e-9)


def test_exact_fixed_duration_is_kept(selective_spec):
    program = compile_rule(GateRule(CellType.A, 0, 1), selective_spec, duration=10.0)
    assert program.events[0].duration == 10.0
    assert stark_limited_duration(math.pi, 4.0, 10.0) > 10.0
    assert stark_limited_duration(math.pi, math.inf, 10.0) == 10.0


def test_incommensurate_couplings_are_left_uncancelled(selective_spec):
    couplings = dict(selective_spec.relay_couplings)
    couplings[CellType.C] *= math.sqrt(2.0)
    odd = dataclasses.replace(selective_spec, relay_couplings=couplings)
    assert ising_period(odd, odd.lasers) is None
    program = compile_rule(GateRule(CellType.A, 0, 1), odd, duration=10.0)
    assert len(program) == 1
    assert any(abs(r) > 1e-3 for r in program.metadata["ising_residuals"].values())


def test_any_condition_on_coupled_side_splits(selective_spec):
    rule = GateRule(CellType.A, ANY, 1)
    program = compile_rule(rule, selective_spec)
    assert [(e.rule.left_cond, e.rule.right_cond) for e in _rule_events(program)] == [(0, 1), (1, 1)]
    state = _random_state("ABCABC")
    np.testing.assert_allclose(run_oracle(program, state, selective_spec).data,
                               apply_rule(state, rule, selective_spec.boundary).data, atol=1e-6)


def test_conditional_z_rule_uses_pi_pulses(selective_spec):
    rule = GateRule(CellType.B, 1, 1, z_angle=0.6)
    program = compile_rule(rule, selective_spec)
    events = _rule_events(program)
    assert len(events) == 4
    assert all(math.isclose(e.rule.theta, math.pi) for e in events)
    state = _random_state("ABCABC", seed=5)
    np.testing.assert_allclose(run_oracle(program, state, selective_spec).data,
                               apply_rule(state, rule, selective_spec.boundary).data, atol=1e-6)


def test_global_rotation_switches_exchange_off(reference_spec):
    program = global_rotation(CellType.D, math.pi / 2, math.pi / 2, reference_spec)
    assert len(program) == 1
    assert program.events[0].lasers.effective_L == 0.0
    assert program.events[0].sites == (6,)


def test_controlled_phase_window(selective_spec):
    angle = 1.2
    program = compile_op(ControlledPhase((0, 1), angle), selective_spec)
    event = program.events[0]
    assert event.microwave is None
    assert event.lasers.effective_C == 0.0
    assert program.metadata["ising_angles"]["0-1"] == pytest.approx(angle)
    assert program.metadata["z_corrections"] == {"0": pytest.approx(0.6), "1": pytest.approx(0.6)}
    with pytest.raises(StateError):
        compile_op(ControlledPhase((0, 2), angle), selective_spec)


def test_controlled_phase_windows_add_up(selective_spec):
    quarter = compile_op(ControlledPhase((0, 1), math.pi / 4), selective_spec)
    half = compile_op(ControlledPhase((0, 1), math.pi / 2), selective_spec)
    twice = np.eye(64, dtype=complex)
    for event in (quarter + quarter).events:
        twice = logical_propagator(event, selective_spec) @ twice
    once = logical_propagator(half.events[0], selective_spec)
    overlap = abs(np.trace(once.conj().T @ twice)) / 64
    assert overlap ** 2 >= 1 - 1e-6


SOUND_PROGRAMS = {
    "A any any": lambda spec: compile_rule(GateRule(CellType.A, ANY, ANY), spec),
    "A any 1": lambda spec: compile_rule(GateRule(CellType.A, ANY, 1), spec),
    "B 1 1 z": lambda spec: compile_rule(GateRule(CellType.B, 1, 1, z_angle=0.6), spec),
    "global C": lambda spec: global_rotation(CellType.C, math.pi / 2, 0.0, spec),
    "cphase 1-2": lambda spec: compile_op(ControlledPhase((1, 2), 1.0), spec),
}


@pytest.mark.slow
@pytest.mark.parametrize("name", sorted(SOUND_PROGRAMS))
def test_compiled_programs_follow_the_oracle(selective_spec, name):
    program = SOUND_PROGRAMS[name](selective_spec)
    report = compare_program(selective_spec, program, _random_state("ABCABC", seed=3))
    assert report.cumulative >= 0.99
    assert report.worst_event >= 0.99


def test_shift_permutation_moves_data_three_cells():
    assert shift_permutation(CHAIN) == [3, 0, 1, 6, 2, 4, 5]
    assert cycles_to_reach_d(0, CHAIN) == 2
    assert cycles_to_reach_d(3, CHAIN) == 1
    assert cycles_to_reach_d(6, CHAIN) == 0
    with pytest.raises(StateError):
        shift_permutation("ABCAB")


def test_shift_rules_permute_basis_states():
    perm = shift_permutation(CHAIN)
    rules = shift_rules(CHAIN, 1)
    for bits in map("".join, itertools.product("01", repeat=7)):
        moved = ["0"] * 7
        for k, bit in enumerate(bits):
            moved[perm[k]] = bit
        out = apply_rules(new_chain(CHAIN, bits), rules)
        assert probabilities(out)[basis_index("".join(moved))] == pytest.approx(1.0)


def test_shift_carries_a_superposition_onto_d():
    amps = np.zeros(1 << 7, dtype=complex)
    a, b = math.cos(0.4), np.exp(0.9j) * math.sin(0.4)
    amps[0], amps[1] = a, b
    out = apply_rules(from_amplitudes(CHAIN, amps), shift_rules(CHAIN, 2))
    expected = np.outer([a, b], np.conj([a, b]))
    np.testing.assert_allclose(reduced_site(out, 6), expected, atol=1e-10)


def test_compiled_swap_matches_rules(reference_spec):
    program = compile_op(Swap((CellType.A, CellType.B)), reference_spec)
    assert validate_program(program, reference_spec).passed
    out = run_oracle(program, new_chain(CHAIN, "1001000"), reference_spec)
    assert probabilities(out)[basis_index("0100100")] == pytest.approx(1.0)


def test_validation_reports_bad_events(selective_spec):
    program = PulseProgram([PulseEvent(2000.0, LaserSettings(1.07, 0.0))], pattern="ABCABCD")
    report = validate_program(program, selective_spec)
    assert not report.passed
    assert any("does not match" in v for v in report.violations)
    assert any("exceeds" in v for v in report.violations)


def test_program_file_round_trip(tmp_path, selective_spec):
    program = compile_rule(GateRule(CellType.A, 0, 1), selective_spec)
    program.metadata["observables"] = ["Z0"]
    path = tmp_path / "program.json"
    save_program(program, path)
    restored = load_program(path)
    assert restored.events == program.events
    assert restored.rules == program.rules
    assert restored.metadata == program.metadata
    assert restored.metadata["observables"] == ["Z0"]


def test_program_ops_need_a_device(selective_spec):
    data = {"ops": [{"op": "rotate", "target": "A", "left": 0, "right": 1}]}
    with pytest.raises(ProgramFormatError):
        program_from_dict(data)
    assert len(_rule_events(program_from_dict(data, selective_spec))) == 1
    with pytest.raises(ProgramFormatError):
        program_from_dict({"ops": [{"op": "teleport"}]}, selective_spec)
    with pytest.raises(ProgramFormatError):
        program_from_dict({"events": [{"duration_ns": 5.0, "mw": {"rabi_ueV": 1.0}}]})


def test_missing_program_file(tmp_path):
    with pytest.raises(ProgramFormatError):
        load_program(tmp_path / "nope.json")
