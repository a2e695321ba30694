"""
DonorQCA — Pulse-level simulation of the laser-gated spin chain.

The Hamiltonian is written in the frame rotating at the cavity energy:

    H(t) = Σ_k z_k σ_z^k + Σ_bonds (J/2) σ_z σ_z + Σ_k (ω₁(t)/2)(cos φ' σ_x + sin φ' σ_y)

with z_k = (Δ_type(k) + offset_k − E_cav)/2 and φ' = φ + (f − E_cav)·t/ħ.
Flipping site k against neighbors (s_L, s_R) costs Δ + J_L·s_L + J_R·s_R
relative to the cavity photon.

Events are integrated by midpoint exponentiation of H(t) per step; constant
Hamiltonians use a single exponential and diagonal ones an elementwise phase.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import expm, sqrtm

from device_params import (
    DeviceSpec,
    EffectiveCouplings,
    check_ising_regime,
    effective_couplings,
    excitation_bandwidth,
    solve_rabi_for_resonance,
    transition_table,
)
from gate_oracle import apply_rule, target_sites
from models import (
    ANY,
    Envelope,
    EnvelopeKind,
    GateRule,
    InfeasibleSelectivityError,
    LaserSettings,
    MicrowaveDrive,
    PulseEvent,
    StateError,
    StepSizeError,
)
from qca_core import ChainState, apply_diagonal, z_spins
from quantities import HBAR_UEV_NS

logger = logging.getLogger(__name__)

DEFAULT_STEPS_PER_EVENT = 2000
MIN_STEPS_PER_EVENT = 100
MAX_STEP_ANGLE = 0.05           # rad per step for the drive term
GAUSSIAN_SIGMA_FRACTION = 1.0 / 6.0
EXPM_BATCH = 64
MAX_STARK_PHASE = 0.03          # rad on the closest unintended transition
ISING_MAX_DENOMINATOR = 12
ISING_PERIOD_RTOL = 1e-4


# ── Frame Hamiltonian ────────────────────────────────────────────────────────

@dataclass
class FrameHamiltonian:
    """Coefficients of H(t) for one event; energies in μeV."""
    n_sites: int
    zeeman: np.ndarray                                  # on σ_z per site
    ising: Dict[Tuple[int, int], float]                 # on σ_zσ_z per bond (J/2)
    drive: Optional[MicrowaveDrive] = None
    drive_detuning: float = 0.0                         # f − E_cav
    duration: float = 0.0
    t0: float = 0.0
    _spins: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self._spins is None:
            self._spins = z_spins(self.n_sites)

    @property
    def dim(self) -> int:
        return 1 << self.n_sites

    @property
    def has_drive(self) -> bool:
        return self.drive is not None and self.drive.rabi_energy > 0

    @property
    def is_static(self) -> bool:
        if not self.has_drive:
            return True
        return (self.drive.envelope.kind is EnvelopeKind.RECTANGULAR
                and self.drive_detuning == 0.0)

    def single_site_diagonal(self) -> np.ndarray:
        return self._spins @ self.zeeman

    def ising_diagonal(self) -> np.ndarray:
        diag = np.zeros(self.dim)
        for (i, j), coeff in self.ising.items():
            diag += coeff * self._spins[:, i] * self._spins[:, j]
        return diag

    def diagonal(self) -> np.ndarray:
        return self.single_site_diagonal() + self.ising_diagonal()

    def drive_amplitude(self, t) -> np.ndarray:
        """(ω₁(t)/2)·e^{iφ'(t)} at event-local time(s) t."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        if not self.has_drive:
            return np.zeros(t.shape, dtype=complex)
        shape = np.array([self.drive.envelope.shape(tk, self.duration) for tk in t])
        phase = self.drive.phase + self.drive_detuning * (self.t0 + t) / HBAR_UEV_NS
        return 0.5 * self.drive.rabi_energy * shape * np.exp(1j * phase)

    def raising(self) -> np.ndarray:
        """Σ_k σ⁺_k, with ⟨1|σ⁺|0⟩ = 1."""
        idx = np.arange(self.dim)
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for site in range(self.n_sites):
            low = idx[(idx >> site) & 1 == 0]
            out[low | (1 << site), low] = 1.0
        return out

    def matrix(self, t: float) -> np.ndarray:
        h = np.diag(self.diagonal()).astype(complex)
        if self.has_drive:
            a = self.drive_amplitude(t)[0]
            p = self.raising()
            h = h + a * p + np.conj(a) * p.T
        return h


def _zeeman_terms(spec: DeviceSpec, couplings: EffectiveCouplings, lasers: LaserSettings,
                  offsets: Optional[Sequence[float]]) -> np.ndarray:
    n = spec.n_sites
    z = np.array([0.5 * (couplings.delta[cell] - spec.cavity_energy) for cell in spec.pattern])
    if n and 0 in couplings.jvirtual:
        z[0] += 0.5 * couplings.jvirtual[0] * (2 * spec.boundary.left_virtual - 1)
    if n and (n - 1) in couplings.jvirtual:
        z[n - 1] += 0.5 * couplings.jvirtual[n - 1] * (2 * spec.boundary.right_virtual - 1)
    if offsets is not None and lasers.effective_C > 0:
        z = z + 0.5 * np.asarray(offsets, dtype=float)
    return z


def frame_hamiltonian(spec: DeviceSpec, lasers: LaserSettings,
                      microwave: Optional[MicrowaveDrive] = None,
                      offsets: Optional[Sequence[float]] = None,
                      duration: float = 0.0, t0: float = 0.0) -> FrameHamiltonian:
    """Coefficient form of H; static offsets enter only while the C laser is on."""
    couplings = effective_couplings(spec, lasers)
    ising = {bond: 0.5 * j for bond, j in couplings.jmap.items() if j != 0.0}
    detuning = 0.0 if microwave is None else microwave.frequency_energy - spec.cavity_energy
    return FrameHamiltonian(
        n_sites=spec.n_sites,
        zeeman=_zeeman_terms(spec, couplings, lasers, offsets),
        ising=ising,
        drive=microwave,
        drive_detuning=detuning,
        duration=duration,
        t0=t0,
    )


def build_hamiltonian(spec: DeviceSpec, lasers: LaserSettings,
                      microwave: Optional[MicrowaveDrive] = None, t: float = 0.0,
                      offsets: Optional[Sequence[float]] = None,
                      duration: Optional[float] = None) -> np.ndarray:
    """Dense H(t) in μeV; `duration` positions the envelope (defaults to 2t)."""
    span = duration if duration is not None else max(2.0 * t, 0.0)
    return frame_hamiltonian(spec, lasers, microwave, offsets, span).matrix(t)


# ── Integration ──────────────────────────────────────────────────────────────

def _step_count(event: PulseEvent, frame: FrameHamiltonian, dt: Optional[float]) -> int:
    if dt is None:
        dt = event.duration / DEFAULT_STEPS_PER_EVENT
    if dt <= 0:
        raise StepSizeError("Integration step must be positive")
    if dt > event.duration / MIN_STEPS_PER_EVENT * (1 + 1e-12):
        raise StepSizeError(f"dt = {dt:.4g} ns exceeds duration/{MIN_STEPS_PER_EVENT} "
                            f"for a {event.duration:.4g} ns event")
    angle = 0.5 * frame.drive.rabi_energy * frame.n_sites * dt / HBAR_UEV_NS
    if angle > MAX_STEP_ANGLE:
        raise StepSizeError(f"Drive rotates {angle:.3g} rad per step (limit {MAX_STEP_ANGLE})")
    return int(math.ceil(event.duration / dt - 1e-9))


def step_count(event: PulseEvent, spec: DeviceSpec, dt: Optional[float] = None) -> int:
    """Number of midpoint steps used for a driven event (1 if H is constant)."""
    frame = frame_hamiltonian(spec, event.lasers, event.microwave, None, event.duration)
    if frame.is_static:
        return 1
    return _step_count(event, frame, dt)


def step_propagators(event: PulseEvent, spec: DeviceSpec, dt: Optional[float] = None,
                     offsets: Optional[Sequence[float]] = None, t0: float = 0.0
                     ) -> Iterator[np.ndarray]:
    """Yield batches (k, 2^N, 2^N) of per-step propagators in time order."""
    frame = frame_hamiltonian(spec, event.lasers, event.microwave, offsets, event.duration, t0)
    if frame.is_static:
        yield expm(-1j * frame.matrix(0.5 * event.duration) * event.duration / HBAR_UEV_NS)[None]
        return
    n_steps = _step_count(event, frame, dt)
    h = event.duration / n_steps
    amps = frame.drive_amplitude((np.arange(n_steps) + 0.5) * h)
    diag = np.diag(frame.diagonal()).astype(complex)
    raising = frame.raising()
    lowering = raising.T.copy()
    for start in range(0, n_steps, EXPM_BATCH):
        a = amps[start:start + EXPM_BATCH]
        stack = (diag[None, :, :] + a[:, None, None] * raising[None, :, :]
                 + np.conj(a)[:, None, None] * lowering[None, :, :])
        yield expm(-1j * stack * h / HBAR_UEV_NS)


def event_propagator(event: PulseEvent, spec: DeviceSpec, dt: Optional[float] = None,
                     offsets: Optional[Sequence[float]] = None, t0: float = 0.0) -> np.ndarray:
    """Full 2^N propagator of a physical event in the cavity frame."""
    if event.is_ideal:
        raise StateError("Ideal events have no pulse-level propagator")
    frame = frame_hamiltonian(spec, event.lasers, event.microwave, offsets, event.duration, t0)
    if not frame.has_drive:
        return np.diag(np.exp(-1j * frame.diagonal() * event.duration / HBAR_UEV_NS))
    unitary = np.eye(frame.dim, dtype=complex)
    for batch in step_propagators(event, spec, dt, offsets, t0):
        for step in batch:
            unitary = step @ unitary
    return unitary


def evolve(state: ChainState, event: PulseEvent, spec: DeviceSpec, dt: Optional[float] = None,
           offsets: Optional[Sequence[float]] = None, t0: float = 0.0) -> ChainState:
    """Propagate `state` through one event (cavity frame)."""
    if event.is_ideal:
        return apply_rule(state, event.ideal, spec.boundary)
    if event.microwave is None or event.microwave.rabi_energy == 0:
        frame = frame_hamiltonian(spec, event.lasers, None, offsets, event.duration, t0)
        return apply_diagonal(state, np.exp(-1j * frame.diagonal() * event.duration / HBAR_UEV_NS))
    unitary = event_propagator(event, spec, dt, offsets, t0)
    if state.density:
        return state.with_data(unitary @ state.data @ unitary.conj().T)
    return state.with_data(unitary @ state.data)


def frame_phases(event: PulseEvent, spec: DeviceSpec, elapsed: Optional[float] = None) -> np.ndarray:
    """Diagonal that maps the cavity frame of an event onto the logical frame.

    Removes the nominal single-site precession only. Ising phases stay in the
    logical frame; the compiler cancels them with refocusing windows.
    """
    if event.is_ideal:
        return np.ones(1 << spec.n_sites, dtype=complex)
    tau = event.duration if elapsed is None else elapsed
    frame = frame_hamiltonian(spec, event.lasers)
    return np.exp(1j * frame.single_site_diagonal() * tau / HBAR_UEV_NS)


def ising_phases(event: PulseEvent, spec: DeviceSpec) -> np.ndarray:
    """exp(−i·Σ (J/2)σ_zσ_z·T/ħ): the logical-frame Ising action of a physical event."""
    if event.is_ideal:
        return np.ones(1 << spec.n_sites, dtype=complex)
    ising = frame_hamiltonian(spec, event.lasers).ising_diagonal()
    return np.exp(-1j * ising * event.duration / HBAR_UEV_NS)


def ising_period(spec: DeviceSpec, lasers: LaserSettings,
                 max_denominator: int = ISING_MAX_DENOMINATOR,
                 rtol: float = ISING_PERIOD_RTOL) -> Optional[float]:
    """Shortest time (ns) after which every bond's Ising phase is a multiple of 2π.

    Requires the couplings to be commensurate: every J an integer multiple
    of a common unit within `rtol`. None when there is no such unit or no
    bond is coupled.
    """
    values = [j for j in effective_couplings(spec, lasers).jmap.values() if j > 0.0]
    if not values:
        return None
    ref = min(values)
    denominator = 1
    for j in values:
        ratio = Fraction(j / ref).limit_denominator(max_denominator)
        if abs(float(ratio) - j / ref) > rtol * j / ref:
            return None
        denominator = denominator * ratio.denominator // math.gcd(denominator, ratio.denominator)
    unit = ref / denominator
    return 4.0 * math.pi * HBAR_UEV_NS / unit


def evolve_logical(state: ChainState, event: PulseEvent, spec: DeviceSpec,
                   dt: Optional[float] = None, offsets: Optional[Sequence[float]] = None,
                   t0: float = 0.0) -> ChainState:
    """`evolve` followed by the event's frame correction."""
    out = evolve(state, event, spec, dt, offsets, t0)
    return apply_diagonal(out, frame_phases(event, spec))


def logical_propagator(event: PulseEvent, spec: DeviceSpec, dt: Optional[float] = None,
                       offsets: Optional[Sequence[float]] = None) -> np.ndarray:
    return frame_phases(event, spec)[:, None] * event_propagator(event, spec, dt, offsets)


# ── Selective pulses ─────────────────────────────────────────────────────────

def _side_shift(coupling: float, cond, fixed: Optional[int]) -> Optional[float]:
    """Energy shift J·s contributed by one neighbor; None if the site can never match."""
    if fixed is not None:
        if cond is not ANY and cond != fixed:
            return None
        return coupling * (2 * fixed - 1)
    if cond is ANY:
        if coupling != 0.0:
            raise StateError("An 'any' condition on a coupled neighbor needs one event per "
                             "neighbor value; compile the rule instead")
        return 0.0
    return coupling * (2 * cond - 1)


def resonance_groups(spec: DeviceSpec, rule: GateRule,
                     rabi_L: Optional[float] = None) -> Dict[float, List[int]]:
    """Group the matchable target sites by their conditional shift Jsum (μeV)."""
    lasers = LaserSettings(1.0, spec.lasers.rabi_L if rabi_L is None else rabi_L)
    couplings = effective_couplings(spec, lasers)
    n = spec.n_sites
    groups: Dict[float, List[int]] = {}
    for site in target_sites(spec.pattern, rule):
        if site > 0:
            left = _side_shift(couplings.bond(site - 1, site), rule.left_cond, None)
        else:
            j = couplings.jvirtual.get(0, 0.0)
            left = _side_shift(j, rule.left_cond, spec.boundary.left_virtual)
        if site < n - 1:
            right = _side_shift(couplings.bond(site, site + 1), rule.right_cond, None)
        else:
            j = couplings.jvirtual.get(n - 1, 0.0)
            right = _side_shift(j, rule.right_cond, spec.boundary.right_virtual)
        if left is None or right is None:
            continue
        key = round(left + right, 9)
        groups.setdefault(key, []).append(site)
    return groups


def _intended(transition, rule: GateRule, sites: Sequence[int], spec: DeviceSpec) -> bool:
    if transition.site not in sites:
        return False
    left = spec.boundary.left_virtual if transition.left_spin is None else transition.left_spin
    right = spec.boundary.right_virtual if transition.right_spin is None else transition.right_spin
    return ((rule.left_cond is ANY or rule.left_cond == left)
            and (rule.right_cond is ANY or rule.right_cond == right))


def selectivity_collisions(spec: DeviceSpec, lasers: LaserSettings, frequency: float,
                           rule: Optional[GateRule], sites: Sequence[int],
                           margin: float) -> List[str]:
    """Unintended transitions within `margin` of the drive, and intended ones missed."""
    problems = []
    for tr in transition_table(spec, lasers):
        detuning = tr.energy - frequency
        intended = rule is not None and rule.target == tr.cell and _intended(tr, rule, sites, spec)
        if intended and abs(detuning) > margin:
            problems.append(f"missed {tr.describe()} (detuned {detuning:+.4g} μeV)")
        elif not intended and abs(detuning) <= margin:
            problems.append(f"collision {tr.describe()} (detuned {detuning:+.4g} μeV, "
                            f"margin {margin:.3g} μeV)")
    return problems


def gaussian_envelope(duration: float) -> Envelope:
    return Envelope.gaussian(duration * GAUSSIAN_SIGMA_FRACTION, 3.0)


def spectator_detuning(spec: DeviceSpec, lasers: LaserSettings, frequency: float,
                       rule: GateRule, sites: Sequence[int]) -> float:
    """Smallest |detuning| (μeV) of any unintended transition from the drive."""
    closest = math.inf
    for tr in transition_table(spec, lasers):
        if rule.target == tr.cell and _intended(tr, rule, sites, spec):
            continue
        closest = min(closest, abs(tr.energy - frequency))
    return closest


def stark_phase(theta: float, duration: float, detuning: float) -> float:
    """Relative phase a gaussian pulse of area θ leaves on a transition `detuning` μeV away.

    Second order in the drive: ∫ω₁²/(2δ) dt/ħ with σ = duration/6.
    """
    if detuning == 0:
        return math.inf
    sigma = duration * GAUSSIAN_SIGMA_FRACTION
    return theta ** 2 * HBAR_UEV_NS / (4.0 * math.sqrt(math.pi) * sigma * abs(detuning))


def stark_limited_duration(theta: float, detuning: float, minimum: float,
                           limit: float = MAX_STARK_PHASE) -> float:
    """Shortest duration ≥ `minimum` keeping stark_phase below `limit`, on a 0.1 ns grid."""
    if not math.isfinite(detuning) or stark_phase(theta, minimum, detuning) <= limit:
        return minimum
    needed = stark_phase(theta, minimum, detuning) / limit * minimum
    return math.ceil(needed * 10.0) / 10.0


def selective_pi_pulse(spec: DeviceSpec, rule: GateRule, sites: Optional[Sequence[int]] = None,
                       duration: Optional[float] = None, rabi_L: Optional[float] = None,
                       margin: Optional[float] = None,
                       stark_limit: Optional[float] = None) -> PulseEvent:
    """Gaussian event resonant with the rule's conditional transition.

    Ω_C is solved so Δ_X + Jsum equals the cavity energy; the microwave area
    is the rule's θ (π by default). Raises InfeasibleSelectivityError when
    any other transition lies within the selectivity margin (δ_EX of the
    pulse unless given). With `stark_limit` the event is lengthened until
    the closest unintended transition picks up less than that phase.
    """
    if rule.is_z:
        raise StateError("Conditional z rotations compile to π-pulse sequences")
    duration = spec.gate_time if duration is None else duration
    rabi_L = spec.lasers.rabi_L if rabi_L is None else rabi_L

    groups = resonance_groups(spec, rule, rabi_L)
    if sites is None:
        if len(groups) > 1:
            raise InfeasibleSelectivityError(
                f"Target sites of {rule.describe()} resonate at different energies",
                [f"Jsum {k:+.4g} μeV: sites {v}" for k, v in sorted(groups.items())])
        if not groups:
            raise StateError(f"No site can match {rule.describe()}")
        jsum, sites = next(iter(groups.items()))
    else:
        sites = list(sites)
        jsum = next((k for k, v in groups.items() if set(sites) <= set(v)), None)
        if jsum is None:
            raise StateError(f"Sites {sites} do not share one resonance for {rule.describe()}")

    try:
        omega_c = solve_rabi_for_resonance(spec.detunings[rule.target],
                                           spec.cavity_energy - jsum).value
    except ValueError as exc:
        raise InfeasibleSelectivityError(f"Cannot reach resonance for {rule.describe()}: {exc}") from exc
    lasers = LaserSettings(omega_c, rabi_L)

    if stark_limit is not None:
        closest = spectator_detuning(spec, lasers, spec.cavity_energy, rule, sites)
        stretched = stark_limited_duration(rule.theta, closest, duration, stark_limit)
        if stretched > duration:
            logger.debug("%s: closest spectator %.4g μeV away, %.4g ns → %.4g ns",
                         rule.describe(), closest, duration, stretched)
            duration = stretched
    margin = excitation_bandwidth(duration).value if margin is None else margin

    collisions = selectivity_collisions(spec, lasers, spec.cavity_energy, rule, sites, margin)
    if collisions:
        raise InfeasibleSelectivityError(
            f"{rule.describe()} is not spectrally selective at Ω_C = {omega_c:.6g} meV",
            collisions)
    for problem in check_ising_regime(spec, lasers):
        logger.debug("Ising regime not reached: %s", problem)

    envelope = gaussian_envelope(duration)
    peak = rule.theta * HBAR_UEV_NS / envelope.area(duration)
    drive = MicrowaveDrive(peak, spec.cavity_energy, rule.axis_phase, envelope)
    return PulseEvent(duration, lasers, drive, rule=rule, sites=tuple(sites),
                      label=rule.describe())


# ── Comparison ───────────────────────────────────────────────────────────────

def fidelity(a: ChainState, b: ChainState) -> float:
    """|⟨a|b⟩|² for pure states, Uhlmann fidelity otherwise."""
    if a.dim != b.dim:
        raise StateError("States have different dimensions")
    if not a.density and not b.density:
        value = abs(np.vdot(a.data, b.data)) ** 2
    elif not a.density:
        value = np.real(np.vdot(a.data, b.data @ a.data))
    elif not b.density:
        value = np.real(np.vdot(b.data, a.data @ b.data))
    else:
        root = sqrtm(a.data)
        value = np.real(np.trace(sqrtm(root @ b.data @ root))) ** 2
    return float(min(max(value, 0.0), 1.0))
