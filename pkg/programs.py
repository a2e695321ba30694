"""
DonorQCA — Pulse programs and the logical-operation compiler.

A PulseProgram is an ordered list of PulseEvents run back to back. The
compiler turns logical operations (conditional rotations, controlled phases,
swaps, shifts toward the D cell) into selective global pulse schedules.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from device_params import DeviceSpec, effective_couplings, exchange_coupling, excitation_bandwidth
from gate_oracle import apply_rule, conditional_unitary, expand_any
from models import (
    ANY,
    CellType,
    Envelope,
    EnvelopeKind,
    GateRule,
    InfeasibleSelectivityError,
    LaserSettings,
    MicrowaveDrive,
    ProgramFormatError,
    PulseEvent,
    StateError,
    condition_label,
)
from pulse_engine import (
    MAX_STARK_PHASE,
    ising_period,
    ising_phases,
    resonance_groups,
    selective_pi_pulse,
    selectivity_collisions,
)
from qca_core import ChainState, apply_diagonal, parse_pattern, pattern_string
from quantities import HBAR_UEV_NS

logger = logging.getLogger(__name__)

MAX_EVENT_DURATION = 1000.0     # ns


# ── Program container ────────────────────────────────────────────────────────

@dataclass
class PulseProgram:
    """Ordered, strictly sequential pulse events plus their provenance."""
    events: List[PulseEvent] = field(default_factory=list)
    name: str = ""
    comments: str = ""
    pattern: str = ""
    rules: List[GateRule] = field(default_factory=list)
    metadata: Dict[str, object] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self):
        return iter(self.events)

    @property
    def total_duration(self) -> float:
        return sum(e.duration for e in self.events)

    def start_times(self) -> List[float]:
        times, t = [], 0.0
        for event in self.events:
            times.append(t)
            t += event.duration
        return times

    def extend(self, other: "PulseProgram") -> "PulseProgram":
        """Append `other` in place and return self."""
        self.events.extend(other.events)
        self.rules.extend(other.rules)
        for key, value in other.metadata.items():
            self.metadata.setdefault(key, value)
        if not self.pattern:
            self.pattern = other.pattern
        return self

    def __add__(self, other: "PulseProgram") -> "PulseProgram":
        out = PulseProgram(list(self.events), self.name, self.comments, self.pattern,
                           list(self.rules), dict(self.metadata))
        return out.extend(other)


# ── Logical operations ───────────────────────────────────────────────────────

@dataclass(frozen=True)
class ConditionalRotate:
    rule: GateRule


@dataclass(frozen=True)
class ControlledPhase:
    bond: Tuple[int, int]
    angle: float


@dataclass(frozen=True)
class Swap:
    pair: Tuple[CellType, CellType]


@dataclass(frozen=True)
class ShiftTowardD:
    cycles: int


@dataclass(frozen=True)
class PrepareReadout:
    qubit: int


LogicalOp = Union[ConditionalRotate, ControlledPhase, Swap, ShiftTowardD, PrepareReadout]


# ── Rule compilation ─────────────────────────────────────────────────────────

def _coupled_sides(spec: DeviceSpec, rule: GateRule, rabi_L: float) -> Tuple[bool, bool]:
    """Whether any matchable target site has a nonzero real left/right bond."""
    couplings = effective_couplings(spec, LaserSettings(1.0, rabi_L))
    left = right = False
    for site, cell in enumerate(spec.pattern):
        if cell != rule.target:
            continue
        if site > 0 and couplings.bond(site - 1, site) != 0.0:
            left = True
        if site < spec.n_sites - 1 and couplings.bond(site, site + 1) != 0.0:
            right = True
    return left, right


def _specific_rules(spec: DeviceSpec, rule: GateRule, rabi_L: float) -> List[GateRule]:
    left, right = _coupled_sides(spec, rule, rabi_L)
    out = []
    for expanded in expand_any(rule):
        u = expanded.left_cond if left else rule.left_cond
        v = expanded.right_cond if right else rule.right_cond
        candidate = rule.with_conditions(u, v)
        if candidate not in out:
            out.append(candidate)
    return out


def _pi_sequence(rule: GateRule) -> List[GateRule]:
    """Rz(α) on the matched subspace as four π pulses with phases (α/4, 0, α/4, 0)."""
    quarter = rule.z_angle / 4.0
    return [GateRule(rule.target, rule.left_cond, rule.right_cond, math.pi, phase)
            for phase in (quarter, 0.0, quarter, 0.0)]


def _refocus_window(event: PulseEvent, spec: DeviceSpec) -> Optional[PulseEvent]:
    """Optical-only window completing the Ising period of `event`, if one exists."""
    if event.lasers.effective_L <= 0:
        return None
    period = ising_period(spec, event.lasers)
    if period is None:
        logger.warning("Exchange couplings at Ω_L = %.4g meV are not commensurate; "
                       "Ising phases of '%s' stay uncancelled", event.lasers.rabi_L, event.label)
        return None
    gap = period * math.ceil(event.duration / period - 1e-9) - event.duration
    if gap <= 1e-9:
        return None
    lasers = LaserSettings(0.0, event.lasers.rabi_L, c_on=False, l_on=True)
    return PulseEvent(gap, lasers, label=f"ising refocus {gap:.4g} ns")


def ising_residuals(program: PulseProgram, spec: DeviceSpec) -> Dict[str, float]:
    """Net σ_zσ_z phase per bond over the program, wrapped to (−π, π]."""
    total: Dict[Tuple[int, int], float] = {}
    for event in program.events:
        if event.is_ideal or event.lasers.effective_L <= 0:
            continue
        for bond, j in effective_couplings(spec, event.lasers).jmap.items():
            total[bond] = total.get(bond, 0.0) + 0.5 * j * event.duration / HBAR_UEV_NS
    return {f"{i}-{j}": math.remainder(phase, 2.0 * math.pi) for (i, j), phase in sorted(total.items())}


def compile_rule(rule: GateRule, spec: DeviceSpec, duration: Optional[float] = None,
                 decouple_unconditional: bool = False) -> PulseProgram:
    """Selective events realising one rule.

    Each "any" condition on a coupled neighbor doubles the events (left
    ascending, then right); target sites with different conditional shifts get
    one event each. With `decouple_unconditional`, a rule with no conditions
    runs with the exchange laser off so a single event addresses every cell.

    Without an explicit `duration`, events start at the device gate time and
    are lengthened until no unintended transition picks up more than
    MAX_STARK_PHASE. Every event with the exchange laser on is followed by an
    optical-only window that brings each bond's Ising phase to a multiple of
    2π; the net residue is recorded as metadata["ising_residuals"].
    """
    stark_limit = MAX_STARK_PHASE if duration is None else None
    duration = spec.gate_time if duration is None else duration
    rabi_L = spec.lasers.rabi_L
    if decouple_unconditional and rule.left_cond is ANY and rule.right_cond is ANY:
        rabi_L = 0.0
    program = PulseProgram(name=rule.describe(), pattern=spec.pattern_string, rules=[rule])
    if rule.target not in spec.pattern:
        return program
    for specific in _specific_rules(spec, rule, rabi_L):
        elementary = _pi_sequence(specific) if specific.is_z else [specific]
        groups = resonance_groups(spec, specific, rabi_L)
        for jsum in sorted(groups):
            for sub in elementary:
                try:
                    event = selective_pi_pulse(spec, sub, groups[jsum], duration, rabi_L,
                                               stark_limit=stark_limit)
                except InfeasibleSelectivityError as exc:
                    raise InfeasibleSelectivityError(
                        f"While compiling {rule.describe()}: {exc}", exc.collisions) from exc
                except StateError as exc:
                    raise StateError(f"While compiling {rule.describe()}: {exc}") from exc
                program.events.append(event)
                window = _refocus_window(event, spec)
                if window is not None:
                    program.events.append(window)
    if rabi_L > 0:
        program.metadata["ising_residuals"] = ising_residuals(program, spec)
    logger.debug("Compiled %s into %d events (%.4g ns)", rule.describe(), len(program.events),
                 program.total_duration)
    return program


def global_rotation(target: CellType, theta: float, phi: float, spec: DeviceSpec,
                    duration: Optional[float] = None) -> PulseProgram:
    """Unconditional rotation of every cell of one type (exchange laser off)."""
    rule = GateRule(CellType.parse(target), ANY, ANY, theta, phi)
    return compile_rule(rule, spec, duration, decouple_unconditional=True)


def compile_controlled_phase(bond: Tuple[int, int], angle: float, spec: DeviceSpec,
                             duration: Optional[float] = None) -> PulseProgram:
    """Optical-only window realising exp(−i·angle/4·σ_zσ_z) on one bond.

    Ω_L is chosen so J_bond = ħ·angle/(2T). Every other bond accumulates its
    own Ising angle, recorded in metadata with the single-site z corrections
    that turn the designated bond's phase into a controlled phase.
    """
    i, j = sorted(int(s) for s in bond)
    if j != i + 1 or not 0 <= i < spec.n_sites - 1:
        raise StateError(f"Bond ({i}, {j}) is not an adjacent pair of the chain")
    duration = spec.gate_time if duration is None else duration
    program = PulseProgram(name=f"CPhase({i},{j}, {angle:.6g})", pattern=spec.pattern_string)
    angle = angle % (4.0 * math.pi)
    if math.isclose(angle, 0.0, abs_tol=1e-15):
        return program
    per_meV2 = exchange_coupling(spec.relay(spec.pattern[i]), spec.relay(spec.pattern[j]),
                                 1.0, spec.relay_detuning).value
    if per_meV2 <= 0:
        raise StateError(f"Bond ({i}, {j}) has zero exchange coupling")
    target_j = HBAR_UEV_NS * angle / (2.0 * duration)
    rabi_L = math.sqrt(target_j / per_meV2)
    lasers = LaserSettings(0.0, rabi_L, c_on=False, l_on=True)
    program.events.append(PulseEvent(duration, lasers, label=f"cphase {i}-{j}"))
    couplings = effective_couplings(spec, lasers)
    program.metadata["ising_angles"] = {
        f"{a}-{b}": 2.0 * value * duration / HBAR_UEV_NS
        for (a, b), value in sorted(couplings.jmap.items())
    }
    program.metadata["z_corrections"] = {str(i): angle / 2.0, str(j): angle / 2.0}
    return program


# ── Swap and shift network ───────────────────────────────────────────────────

def swap_rules(x: CellType, ys: Sequence[CellType]) -> List[GateRule]:
    """Rules swapping every (X, Y) neighbor pair, exact up to a global phase."""
    x = CellType.parse(x)
    ys = [CellType.parse(y) for y in ys]
    cnot_a = [GateRule(y, 1, ANY) for y in ys]
    cnot_b = [GateRule(x, ANY, 1)]
    corrections = (
        [GateRule(y, 1, ANY, 2.0 * math.pi) for y in ys]
        + [GateRule(x, ANY, 1, 2.0 * math.pi)]
        + [GateRule(y, 1, ANY, z_angle=math.pi) for y in ys]
        + [GateRule(x, ANY, ANY, z_angle=math.pi / 2.0)]
    )
    return cnot_a + cnot_b + cnot_a + corrections


def _check_shift_pattern(pattern) -> Tuple[CellType, ...]:
    cells = parse_pattern(pattern)
    text = pattern_string(cells)
    body = text[:-1]
    if (len(cells) < 4 or not text.endswith("D") or len(body) % 3
            or body != "ABC" * (len(body) // 3)):
        raise StateError(f"Shift network needs a pattern ABC…ABCD of at least 4 cells, got {text}")
    return cells


def shift_stages(pattern) -> List[Tuple[CellType, List[CellType], List[Tuple[int, int]]]]:
    """(X, Y types, swapped site pairs) for the three stages of one cycle."""
    cells = _check_shift_pattern(pattern)
    plan = [(CellType.A, [CellType.B]), (CellType.B, [CellType.C]),
            (CellType.C, [CellType.A, CellType.D])]
    stages = []
    for x, ys in plan:
        pairs = [(k, k + 1) for k in range(len(cells) - 1)
                 if cells[k] == x and cells[k + 1] in ys]
        stages.append((x, ys, pairs))
    return stages


def shift_rules(pattern, cycles: int) -> List[GateRule]:
    rules: List[GateRule] = []
    for _ in range(cycles):
        for x, ys, _pairs in shift_stages(pattern):
            rules.extend(swap_rules(x, ys))
    return rules


def shift_permutation(pattern) -> List[int]:
    """perm[k] = cell holding, after one cycle, the datum that started on k."""
    n = len(parse_pattern(pattern))
    position = list(range(n))
    for _x, _ys, pairs in shift_stages(pattern):
        for a, b in pairs:
            for datum in range(n):
                if position[datum] == a:
                    position[datum] = b
                elif position[datum] == b:
                    position[datum] = a
    return position


def cycles_to_reach_d(qubit: int, pattern) -> int:
    """Fewest shift cycles that bring the datum on `qubit` onto the D cell."""
    perm = shift_permutation(pattern)
    n = len(perm)
    if not 0 <= qubit < n:
        raise StateError(f"Cell {qubit} outside chain of {n}")
    here, cycles = qubit, 0
    while here != n - 1:
        here = perm[here]
        cycles += 1
        if cycles > n:
            raise StateError(f"Cell {qubit} never reaches D")
    return cycles


def _compile_rules(rules: Iterable[GateRule], spec: DeviceSpec, name: str) -> PulseProgram:
    program = PulseProgram(name=name, pattern=spec.pattern_string)
    for rule in rules:
        program.extend(compile_rule(rule, spec, decouple_unconditional=True))
    program.name = name
    if any(not e.is_ideal and e.lasers.effective_L > 0 for e in program.events):
        program.metadata["ising_residuals"] = ising_residuals(program, spec)
    return program


def compile_shift_toward_D(spec: DeviceSpec, cycles: int) -> PulseProgram:
    """`cycles` full shift cycles; one cycle moves the datum on cell k to k+3."""
    _check_shift_pattern(spec.pattern)
    if cycles < 0:
        raise StateError("Cycle count must be non-negative")
    if spec.boundary.left_virtual != 0:
        raise StateError("The shift network needs the left virtual neighbor fixed at 0")
    return _compile_rules(shift_rules(spec.pattern, cycles), spec, f"shift x{cycles}")


def compile_op(op: LogicalOp, spec: DeviceSpec) -> PulseProgram:
    if isinstance(op, ConditionalRotate):
        return compile_rule(op.rule, spec)
    if isinstance(op, ControlledPhase):
        return compile_controlled_phase(op.bond, op.angle, spec)
    if isinstance(op, Swap):
        x, y = (CellType.parse(c) for c in op.pair)
        return _compile_rules(swap_rules(x, [y]), spec, f"swap {x.value}{y.value}")
    if isinstance(op, ShiftTowardD):
        return compile_shift_toward_D(spec, op.cycles)
    if isinstance(op, PrepareReadout):
        cycles = cycles_to_reach_d(op.qubit, spec.pattern)
        program = compile_shift_toward_D(spec, cycles)
        program.name = f"readout cell {op.qubit}"
        return program
    raise StateError(f"Unknown logical operation {op!r}")


# ── Oracle execution ─────────────────────────────────────────────────────────

def event_oracle_unitary(event: PulseEvent, spec: DeviceSpec) -> Optional[np.ndarray]:
    """Ideal logical-frame action of one event, or None if it has no oracle semantics.

    A physical rule event acts as its conditional rotation followed by the
    Ising phases of its window; an optical-only window by those phases alone.
    """
    rule = event.oracle_rule
    if rule is not None:
        unitary = conditional_unitary(spec.pattern, rule, spec.boundary)
        return ising_phases(event, spec)[:, None] * unitary
    if event.microwave is None:
        return np.diag(ising_phases(event, spec))
    return None


def run_oracle(program: PulseProgram, state: ChainState, spec: DeviceSpec) -> ChainState:
    """Execute a program with each event's idealised semantics."""
    for event in program.events:
        rule = event.oracle_rule
        if rule is not None:
            state = apply_rule(state, rule, spec.boundary)
        elif event.microwave is not None:
            raise StateError(f"Event '{event.label}' has no oracle semantics")
        state = apply_diagonal(state, ising_phases(event, spec))
    return state


# ── Validation ───────────────────────────────────────────────────────────────

@dataclass
class ValidationReport:
    passed: bool
    violations: List[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"passed": self.passed, "violations": list(self.violations)}


def validate_program(program: PulseProgram, spec: DeviceSpec) -> ValidationReport:
    """Selectivity margins, laser/microwave simultaneity and duration bounds."""
    violations: List[str] = []
    if program.pattern and program.pattern != spec.pattern_string:
        violations.append(f"program pattern {program.pattern} does not match device "
                          f"{spec.pattern_string}")
    for k, event in enumerate(program.events):
        tag = f"event {k}" + (f" ({event.label})" if event.label else "")
        if event.is_ideal:
            continue
        if event.duration > MAX_EVENT_DURATION:
            violations.append(f"{tag}: duration {event.duration:.4g} ns exceeds "
                              f"{MAX_EVENT_DURATION:g} ns")
        mw = event.microwave
        if mw is None:
            continue
        if event.lasers.effective_C <= 0:
            violations.append(f"{tag}: simultaneity violation, microwave on with lasers off")
            continue
        env = mw.envelope
        if env.kind is EnvelopeKind.GAUSSIAN and 2 * env.truncation * env.sigma > event.duration * (1 + 1e-9):
            violations.append(f"{tag}: gaussian window of {2 * env.truncation * env.sigma:.4g} ns "
                              f"does not fit the event")
        if event.rule is None:
            continue
        sites = event.sites
        if sites is None:
            sites = [s for s, c in enumerate(spec.pattern) if c == event.rule.target]
        margin = excitation_bandwidth(event.duration).value
        for problem in selectivity_collisions(spec, event.lasers, mw.frequency_energy,
                                              event.rule, sites, margin):
            violations.append(f"{tag}: {problem}")
    return ValidationReport(not violations, violations)


# ── JSON format ──────────────────────────────────────────────────────────────

def rule_to_dict(rule: GateRule) -> dict:
    out = {"target": rule.target.value, "left": condition_label(rule.left_cond),
           "right": condition_label(rule.right_cond)}
    if rule.is_z:
        out["z"] = rule.z_angle
    else:
        out["theta"] = rule.theta
        out["phi"] = rule.axis_phase
    return out


def rule_from_dict(data: dict) -> GateRule:
    try:
        target = data["target"]
    except (KeyError, TypeError):
        raise ProgramFormatError(f"Rule without target: {data!r}") from None
    try:
        if data.get("z") is not None:
            return GateRule(target, data.get("left", "any"), data.get("right", "any"),
                            z_angle=float(data["z"]))
        return GateRule(target, data.get("left", "any"), data.get("right", "any"),
                        float(data.get("theta", math.pi)), float(data.get("phi", 0.0)))
    except (ValueError, StateError) as exc:
        raise ProgramFormatError(f"Invalid rule {data!r}: {exc}") from exc


def _envelope_to_dict(env: Envelope):
    if env.kind is EnvelopeKind.RECTANGULAR:
        return "rectangular"
    return {"kind": "gaussian", "sigma_ns": env.sigma, "truncation": env.truncation}


def _envelope_from_dict(data) -> Envelope:
    if data is None or data == "rectangular":
        return Envelope.rectangular()
    if data == "gaussian":
        raise ProgramFormatError("Gaussian envelopes need sigma_ns")
    if isinstance(data, dict) and data.get("kind", "gaussian") == "gaussian":
        return Envelope.gaussian(float(data["sigma_ns"]), float(data.get("truncation", 3.0)))
    if isinstance(data, dict) and data.get("kind") == "rectangular":
        return Envelope.rectangular()
    raise ProgramFormatError(f"Unknown envelope {data!r}")


def event_to_dict(event: PulseEvent) -> dict:
    out: dict = {"duration_ns": event.duration}
    if event.is_ideal:
        out["ideal"] = rule_to_dict(event.ideal)
    else:
        out["rabi_C_meV"] = event.lasers.rabi_C
        out["rabi_L_meV"] = event.lasers.rabi_L
        if not event.lasers.c_on:
            out["c_on"] = False
        if not event.lasers.l_on:
            out["l_on"] = False
    if event.microwave is not None:
        mw = event.microwave
        out["mw"] = {"rabi_ueV": mw.rabi_energy, "freq_ueV": mw.frequency_energy,
                     "phase_rad": mw.phase, "envelope": _envelope_to_dict(mw.envelope)}
    if event.rule is not None:
        out["rule"] = rule_to_dict(event.rule)
    if event.sites is not None:
        out["sites"] = list(event.sites)
    if event.label:
        out["label"] = event.label
    return out


def event_from_dict(data: dict) -> PulseEvent:
    if not isinstance(data, dict):
        raise ProgramFormatError(f"Event must be an object, got {type(data).__name__}")
    try:
        ideal = rule_from_dict(data["ideal"]) if data.get("ideal") else None
        lasers = LaserSettings.off() if ideal else LaserSettings(
            float(data.get("rabi_C_meV", 0.0)), float(data.get("rabi_L_meV", 0.0)),
            bool(data.get("c_on", True)), bool(data.get("l_on", True)))
        microwave = None
        mw = data.get("mw")
        if mw:
            microwave = MicrowaveDrive(float(mw.get("rabi_ueV", 0.0)), float(mw["freq_ueV"]),
                                       float(mw.get("phase_rad", 0.0)),
                                       _envelope_from_dict(mw.get("envelope")))
        rule = rule_from_dict(data["rule"]) if data.get("rule") else None
        sites = tuple(int(s) for s in data["sites"]) if data.get("sites") is not None else None
        return PulseEvent(float(data.get("duration_ns", 0.0)), lasers, microwave,
                          ideal, rule, sites, str(data.get("label", "")))
    except ProgramFormatError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ProgramFormatError(f"Invalid event {data!r}: {exc}") from exc


def _op_from_dict(data: dict) -> LogicalOp:
    kind = str(data.get("op", "")).lower()
    if kind == "rotate":
        return ConditionalRotate(rule_from_dict(data))
    if kind == "cphase":
        bond = data.get("bond", [])
        if len(bond) != 2:
            raise ProgramFormatError(f"cphase needs a two-site bond: {data!r}")
        return ControlledPhase((int(bond[0]), int(bond[1])), float(data.get("angle", 0.0)))
    if kind == "swap":
        pair = str(data.get("pair", ""))
        if len(pair) != 2:
            raise ProgramFormatError(f"swap needs a two-letter pair: {data!r}")
        return Swap((CellType.parse(pair[0]), CellType.parse(pair[1])))
    if kind == "shift":
        return ShiftTowardD(int(data.get("cycles", 1)))
    if kind == "readout":
        return PrepareReadout(int(data.get("qubit", 0)))
    raise ProgramFormatError(f"Unknown logical operation '{kind}'")


def program_to_dict(program: PulseProgram) -> dict:
    out = {
        "name": program.name,
        "comments": program.comments,
        "pattern": program.pattern,
        "events": [event_to_dict(e) for e in program.events],
        "rules": [rule_to_dict(r) for r in program.rules],
    }
    if program.metadata:
        out["metadata"] = program.metadata
    return out


def program_from_dict(data, spec: Optional[DeviceSpec] = None) -> PulseProgram:
    """Parse an object (or a bare event list); "ops" entries compile against `spec`."""
    if isinstance(data, list):
        data = {"events": data}
    if not isinstance(data, dict):
        raise ProgramFormatError("Program must be a JSON object or a list of events")
    program = PulseProgram(
        events=[event_from_dict(e) for e in data.get("events", [])],
        name=str(data.get("name", "")),
        comments=str(data.get("comments", "")),
        pattern=str(data.get("pattern", "")),
        rules=[rule_from_dict(r) for r in data.get("rules", [])],
        metadata=dict(data.get("metadata", {})),
    )
    ops = data.get("ops", [])
    if ops:
        if spec is None:
            raise ProgramFormatError("Logical operations need a device to compile against")
        for entry in ops:
            program.extend(compile_op(_op_from_dict(entry), spec))
    return program


def save_program(program: PulseProgram, path: Union[str, Path]):
    Path(path).write_text(json.dumps(program_to_dict(program), indent=2, sort_keys=True),
                          encoding="utf-8")


def load_program(path: Union[str, Path], spec: Optional[DeviceSpec] = None) -> PulseProgram:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ProgramFormatError(f"Program file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ProgramFormatError(f"{path}: {exc}") from exc
    return program_from_dict(data, spec)
