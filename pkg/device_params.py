"""
DonorQCA — Device parameters and closed-form estimates.

Laser-induced spin splittings and exchange couplings, linewidths, selective
pulse bandwidth, and the decoherence-time estimates for the ZnMgO donor
chain. Every operation takes Quantities (or bare numbers in the documented
unit) and returns a Quantity.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from scipy import constants as sc

from models import BoundaryPolicy, CellType, ConfigError, LaserSettings
from qca_core import parse_pattern
from quantities import (
    H_UEV_PER_GHZ,
    HBAR_UEV_NS,
    MU_B_UEV_PER_T,
    Quantity,
    QuantityLike,
    as_value,
    linewidth,
)

logger = logging.getLogger(__name__)

# Edwards–Sienko criterion n_c^(1/3)·a0
MOTT_CONSTANT = 0.26
# δ_EX = factor·ħ/t_p
EXCITATION_BANDWIDTH_FACTOR = 1.0
# Heisenberg → Ising truncation requires |Δ_i − Δ_j| > ratio·J_ij
ISING_TRUNCATION_RATIO = 20.0
# Quoted hyperfine-limited coherence time, used for the fault-tolerance ratio
QUOTED_T2_LIMIT_US = 90.0


# ── Configuration types ──────────────────────────────────────────────────────

@dataclass(frozen=True)
class MaterialParams:
    """ZnO material constants (defaults are the quoted values)."""
    C0: float = -64.0             # μeV·nm
    R0: float = 35.0              # meV
    a0: float = 2.15              # nm, γ-consistent radius
    a0_mott: float = 2.93         # nm, Mott-consistent radius
    m_eff: float = 0.30           # m_e
    g_av: float = 1.956
    B0: float = 3.467             # T
    delta_g: float = 0.0017
    mobility: float = 2000.0      # cm²/Vs
    Eb_X: float = 60.0            # meV
    Eb_D0X: float = 10.0          # meV
    T_REC: float = 60.0           # ps
    beta_T: float = 0.05
    N_nuc: int = 50
    nu_hf: float = 1.4            # MHz
    esr_halfwidth: float = 0.2    # mT

    def __post_init__(self):
        if self.R0 <= 0:
            raise ConfigError("R0 must be positive")
        if self.a0 <= 0 or self.a0_mott <= 0:
            raise ConfigError("Donor Bohr radius must be positive")
        if not (0 < self.m_eff <= 1):
            raise ConfigError("m_eff must lie in (0, 1]")
        if self.T_REC <= 0:
            raise ConfigError("T_REC must be positive")


@dataclass(frozen=True)
class DeviceSpec:
    """Full heterostructure configuration of one donor chain."""
    pattern: Tuple[CellType, ...]
    detunings: Dict[CellType, float]                  # δ_i, meV
    relay_detuning: float                             # δ_R, meV
    relay_couplings: Dict[CellType, float]            # J_iR, μeV
    cavity_energy: float = 95.0                       # Δ_CAV, μeV
    material: MaterialParams = field(default_factory=MaterialParams)
    donor_density: float = 1e17                       # cm⁻³
    temperature: float = 4.2                          # K
    boundary: BoundaryPolicy = field(default_factory=BoundaryPolicy)
    lasers: LaserSettings = field(default_factory=lambda: LaserSettings(1.07, 0.0))
    gate_time: float = 10.0                           # ns
    clock_period: float = 9.0                         # ns, T_p
    virtual_couplings: bool = True

    def __post_init__(self):
        object.__setattr__(self, "pattern", parse_pattern(self.pattern))
        object.__setattr__(self, "detunings",
                           {CellType.parse(k): float(v) for k, v in self.detunings.items()})
        object.__setattr__(self, "relay_couplings",
                           {CellType.parse(k): float(v) for k, v in self.relay_couplings.items()})
        for cell in set(self.pattern):
            delta = self.detunings.get(cell)
            if delta is None:
                raise ConfigError(f"No detuning configured for cell type {cell.value}")
            if delta <= 0:
                raise ConfigError(f"Detuning δ_{cell.value} must be positive (virtual excitation only)")
        if self.relay_detuning <= 0:
            raise ConfigError("Relay detuning δ_R must be positive")
        if self.cavity_energy <= 0:
            raise ConfigError("Cavity energy must be positive")
        if self.donor_density <= 0:
            raise ConfigError("Donor density must be positive")
        if self.gate_time <= 0 or self.clock_period <= 0:
            raise ConfigError("Gate time and clock period must be positive")

    @property
    def n_sites(self) -> int:
        return len(self.pattern)

    @property
    def pattern_string(self) -> str:
        return "".join(c.value for c in self.pattern)

    def relay(self, cell: CellType) -> float:
        return self.relay_couplings.get(cell, 0.0)


@dataclass(frozen=True)
class EffectiveCouplings:
    """Δ and J maps active while the optical pulses are on (μeV)."""
    delta: Dict[CellType, float]
    jmap: Dict[Tuple[int, int], float]
    jvirtual: Dict[int, float] = field(default_factory=dict)

    def bond(self, i: int, j: int) -> float:
        return self.jmap.get((min(i, j), max(i, j)), 0.0)


@dataclass(frozen=True)
class Transition:
    """One single-spin ESR transition of the chain."""
    site: int
    cell: CellType
    left_spin: Optional[int]
    right_spin: Optional[int]
    energy: float                                     # μeV

    def describe(self) -> str:
        left = "-" if self.left_spin is None else str(self.left_spin)
        right = "-" if self.right_spin is None else str(self.right_spin)
        return f"{self.cell.value}@{self.site}[L={left},R={right}] {self.energy:.4f} μeV"


# ── Laser-induced splittings and couplings ───────────────────────────────────

def spin_splitting(rabi_C: QuantityLike, detuning: QuantityLike) -> Quantity:
    """Δ_i = Ω_C² / δ_i (meV inputs by default)."""
    omega = as_value(rabi_C, "meV")
    delta = as_value(detuning, "meV")
    if delta <= 0:
        raise ValueError("Detuning must be positive")
    return Quantity(omega ** 2 / delta, "meV").to("μeV")


def exchange_coupling(j_ir: QuantityLike, j_rj: QuantityLike,
                      rabi_L: QuantityLike, relay_detuning: QuantityLike) -> Quantity:
    """J_ij = J_iR · J_Rj · Ω_L² / δ_R³, all energies brought to μeV first."""
    a = as_value(j_ir, "μeV")
    b = as_value(j_rj, "μeV")
    omega = as_value(rabi_L if isinstance(rabi_L, Quantity) else Quantity(rabi_L, "meV"), "μeV")
    delta = as_value(relay_detuning if isinstance(relay_detuning, Quantity)
                     else Quantity(relay_detuning, "meV"), "μeV")
    if delta <= 0:
        raise ValueError("Relay detuning must be positive")
    return Quantity(a * b * omega ** 2 / delta ** 3, "μeV")


def _virtual_neighbor(pattern: Sequence[CellType], side: str) -> Optional[CellType]:
    """Type seen beyond a chain end: the bulk neighbor of the same end type."""
    n = len(pattern)
    if n < 2:
        return None
    if side == "left":
        end = pattern[0]
        for k in range(1, n):
            if pattern[k] == end:
                return pattern[k - 1]
        return None
    end = pattern[-1]
    for k in range(n - 2, -1, -1):
        if pattern[k] == end:
            return pattern[k + 1]
    return None


def effective_couplings(spec: DeviceSpec, lasers: LaserSettings) -> EffectiveCouplings:
    """Assemble Δ (per type) and J (per adjacent pair) for a gating window."""
    omega_c = lasers.effective_C
    omega_l = lasers.effective_L
    delta = {cell: spin_splitting(omega_c, spec.detunings[cell]).value
             for cell in dict.fromkeys(spec.pattern)}
    jmap: Dict[Tuple[int, int], float] = {}
    for k in range(spec.n_sites - 1):
        jmap[(k, k + 1)] = exchange_coupling(
            spec.relay(spec.pattern[k]), spec.relay(spec.pattern[k + 1]),
            omega_l, spec.relay_detuning,
        ).value
    jvirtual: Dict[int, float] = {}
    if spec.virtual_couplings:
        left = _virtual_neighbor(spec.pattern, "left")
        if left is not None:
            jvirtual[0] = exchange_coupling(spec.relay(left), spec.relay(spec.pattern[0]),
                                            omega_l, spec.relay_detuning).value
        right = _virtual_neighbor(spec.pattern, "right")
        if right is not None:
            jvirtual[spec.n_sites - 1] = exchange_coupling(
                spec.relay(spec.pattern[-1]), spec.relay(right),
                omega_l, spec.relay_detuning).value
    return EffectiveCouplings(delta=delta, jmap=jmap, jvirtual=jvirtual)


def solve_rabi_for_resonance(detuning: QuantityLike, target_transition: QuantityLike) -> Quantity:
    """Ω_C such that spin_splitting(Ω_C, δ_X) equals the target transition."""
    delta = as_value(detuning, "meV")
    target = as_value(target_transition, "μeV")
    if target <= 0:
        raise ValueError(f"Requested transition {target:.4g} μeV lies below the achievable range")
    if delta <= 0:
        raise ValueError("Detuning must be positive")
    return Quantity(math.sqrt(delta * 1e3 * target), "μeV").to("meV")


def conditional_transition_energy(delta_x: QuantityLike, j_left: QuantityLike, s_left: int,
                                  j_right: QuantityLike, s_right: int) -> Quantity:
    """Δ_X + J_left·s_left + J_right·s_right (s = ±1; bits 0/1 accepted)."""
    return Quantity(as_value(delta_x, "μeV")
                    + as_value(j_left, "μeV") * _spin_sign(s_left)
                    + as_value(j_right, "μeV") * _spin_sign(s_right), "μeV")


def _spin_sign(s: int) -> int:
    if s in (-1, 1):
        return s
    if s == 0:
        return -1
    raise ValueError(f"Spin value must be ±1 or a bit, got {s}")


def detuning_ladder(delta_a: QuantityLike, epsilon: QuantityLike,
                    types: Sequence[CellType] = tuple(CellType)) -> Dict[CellType, float]:
    """Per-type detunings δ_k = δ_A − k·ε (meV) of successive D0X transitions."""
    top = as_value(delta_a, "meV")
    step = as_value(epsilon, "meV")
    ladder = {CellType.parse(cell): top - k * step for k, cell in enumerate(types)}
    bad = [c.value for c, d in ladder.items() if d <= 0]
    if bad:
        raise ValueError(f"Ladder leaves non-positive detunings for {', '.join(bad)}")
    return ladder


def cavity_energy_from_frequency(frequency: QuantityLike) -> Quantity:
    return Quantity(as_value(frequency, "GHz"), "GHz").to("μeV")


def frequency_from_cavity_energy(energy: QuantityLike) -> Quantity:
    return Quantity(as_value(energy, "μeV"), "μeV").to("GHz")


# ── Linewidths and bandwidths ────────────────────────────────────────────────

def linewidth_from_lifetime(tau: QuantityLike) -> Quantity:
    """Γ = ħ/τ; bare numbers are picoseconds."""
    value = tau if isinstance(tau, Quantity) else Quantity(tau, "ps")
    if value.value <= 0:
        raise ValueError("Lifetime must be positive")
    return linewidth(value)


def esr_inhomogeneous_width(gamma_d0x: QuantityLike, delta_i: QuantityLike,
                            detuning: QuantityLike) -> Quantity:
    """Γ_inh,i = Γ^D0X · Δ_i / δ_i."""
    d = as_value(detuning if isinstance(detuning, Quantity) else Quantity(detuning, "meV"), "μeV")
    if d <= 0:
        raise ValueError("Detuning must be positive")
    return Quantity(as_value(gamma_d0x, "μeV") * as_value(delta_i, "μeV") / d, "μeV")


def excitation_bandwidth(pulse_time: QuantityLike) -> Quantity:
    """δ_EX = EXCITATION_BANDWIDTH_FACTOR·ħ/t_p; bare numbers are ns."""
    t = as_value(pulse_time, "ns")
    if t <= 0:
        raise ValueError("Pulse time must be positive")
    return Quantity(EXCITATION_BANDWIDTH_FACTOR * HBAR_UEV_NS / t, "μeV")


# ── Decoherence estimates ────────────────────────────────────────────────────

def collision_time(mobility: QuantityLike, m_eff: float) -> Quantity:
    """τ_c = μ·m*/e with μ in cm²V⁻¹s⁻¹."""
    mu = as_value(mobility, "cm²/Vs")
    if mu <= 0:
        raise ValueError("Mobility must be positive")
    seconds = mu * 1e-4 * m_eff * sc.m_e / sc.e
    return Quantity(seconds * 1e15, "fs")


def fermi_k_from_anisotropy(delta_g: float, g: float, b0: QuantityLike,
                            c0: QuantityLike) -> Quantity:
    """Invert Δg = ½(C0·k_F)²/(g·μ_B·B0)² for k_F."""
    field_t = as_value(b0, "T")
    if delta_g < 0:
        raise ValueError("Δg must be non-negative")
    if field_t <= 0:
        raise ValueError("B0 must be positive")
    c0_v = abs(as_value(c0, "μeV·nm"))
    return Quantity(math.sqrt(2.0 * delta_g) * g * MU_B_UEV_PER_T * field_t / c0_v, "nm⁻¹")


def anisotropy_from_fermi_k(k_f: QuantityLike, g: float, b0: QuantityLike,
                            c0: QuantityLike) -> float:
    """Forward g-factor anisotropy relation."""
    zeeman = g * MU_B_UEV_PER_T * as_value(b0, "T")
    return 0.5 * (as_value(c0, "μeV·nm") * as_value(k_f, "nm⁻¹")) ** 2 / zeeman ** 2


def t2_metal(c0: QuantityLike, k_f: QuantityLike, tau_c: QuantityLike) -> Quantity:
    """Metallic-phase T2 = ½·ħ²/((C0·k_F)²·τ_c); the printed 2π is absorbed."""
    c0_v = abs(as_value(c0, "μeV·nm"))
    k = as_value(k_f, "nm⁻¹")
    tau = as_value(tau_c if isinstance(tau_c, Quantity) else Quantity(tau_c, "fs"), "ns")
    if c0_v <= 0 or k <= 0 or tau <= 0:
        raise ValueError("C0, k_F and τ_c must be positive")
    return Quantity(0.5 * HBAR_UEV_NS ** 2 / ((c0_v * k) ** 2 * tau), "ns")


def gamma_angle(c0: QuantityLike, r0: QuantityLike, a0: QuantityLike) -> float:
    """Average spin rotation angle per hop, γ = |C0|/(R0·a0)."""
    r = as_value(r0 if isinstance(r0, Quantity) else Quantity(r0, "meV"), "μeV")
    a = as_value(a0, "nm")
    if r <= 0 or a <= 0:
        raise ValueError("R0 and a0 must be positive")
    return abs(as_value(c0, "μeV·nm")) / (r * a)


def t2_insulator(n0: QuantityLike, a0: QuantityLike, r0: QuantityLike, gamma: float,
                 beta: float, convention: str = "hbar") -> Quantity:
    """Insulating-phase T2 = β·ħ/(n0·a0³·R0·γ²).

    `convention="h"` evaluates the same expression with h in place of ħ.
    """
    density = as_value(n0, "cm⁻³") / 1e21           # nm⁻³
    a = as_value(a0, "nm")
    r = as_value(r0 if isinstance(r0, Quantity) else Quantity(r0, "meV"), "μeV")
    if density <= 0 or a <= 0 or r <= 0 or gamma <= 0 or beta <= 0:
        raise ValueError("All Eq. inputs must be positive")
    planck = {"hbar": HBAR_UEV_NS, "h": HBAR_UEV_NS * 2.0 * math.pi}.get(convention)
    if planck is None:
        raise ValueError(f"Unknown convention '{convention}'")
    return Quantity(beta * planck / (density * a ** 3 * r * gamma ** 2), "ns").to("μs")


def t2_hyperfine_limit(n_nuc: int, nu_hf: QuantityLike) -> Quantity:
    """N·ħ/(h·ν) = N/(2πν)."""
    if n_nuc < 1:
        raise ValueError("Nuclear count must be at least 1")
    nu = as_value(nu_hf if isinstance(nu_hf, Quantity) else Quantity(nu_hf, "MHz"), "GHz")
    if nu <= 0:
        raise ValueError("Hyperfine frequency must be positive")
    return Quantity(n_nuc * HBAR_UEV_NS / (H_UEV_PER_GHZ * nu), "ns").to("μs")


def mott_critical_density(a0: QuantityLike) -> Quantity:
    """n_c = (0.26/a0)³."""
    a = as_value(a0, "nm")
    if a <= 0:
        raise ValueError("a0 must be positive")
    return Quantity((MOTT_CONSTANT / a) ** 3, "nm⁻³").to("cm⁻³")


def t2_from_esr_halfwidth(half_width: QuantityLike, g: float) -> Quantity:
    """T2 = ħ/(2·g·μ_B·ΔB) from an ESR half-width (bare numbers are mT)."""
    b = as_value(half_width if isinstance(half_width, Quantity) else Quantity(half_width, "mT"), "T")
    if b <= 0:
        raise ValueError("Half-width must be positive")
    return Quantity(HBAR_UEV_NS / (2.0 * g * MU_B_UEV_PER_T * b), "ns")


def fault_tolerance_ratio(t2: QuantityLike, clock_period: QuantityLike) -> Quantity:
    """T2/T_p (bare numbers: T2 in μs, T_p in ns)."""
    t2_ns = as_value(t2 if isinstance(t2, Quantity) else Quantity(t2, "μs"), "ns")
    tp_ns = as_value(clock_period, "ns")
    if t2_ns <= 0 or tp_ns <= 0:
        raise ValueError("Both times must be positive")
    return Quantity(t2_ns / tp_ns, "")


# ── Chain spectra ────────────────────────────────────────────────────────────

def transition_table(spec: DeviceSpec, lasers: LaserSettings) -> List[Transition]:
    """Every single-spin transition energy for every neighbor configuration."""
    couplings = effective_couplings(spec, lasers)
    table: List[Transition] = []
    n = spec.n_sites
    for site, cell in enumerate(spec.pattern):
        base = couplings.delta[cell]
        if site == 0 and 0 in couplings.jvirtual:
            base += couplings.jvirtual[0] * _spin_sign(spec.boundary.left_virtual)
        if site == n - 1 and (n - 1) in couplings.jvirtual:
            base += couplings.jvirtual[n - 1] * _spin_sign(spec.boundary.right_virtual)
        lefts = (0, 1) if site > 0 else (None,)
        rights = (0, 1) if site < n - 1 else (None,)
        for left in lefts:
            for right in rights:
                energy = base
                if left is not None:
                    energy += couplings.bond(site - 1, site) * _spin_sign(left)
                if right is not None:
                    energy += couplings.bond(site, site + 1) * _spin_sign(right)
                table.append(Transition(site, cell, left, right, energy))
    return table


def check_ising_regime(spec: DeviceSpec, lasers: LaserSettings) -> List[str]:
    """Adjacent pairs where flip-flop terms cannot be neglected."""
    couplings = effective_couplings(spec, lasers)
    problems = []
    for (i, j), coupling in couplings.jmap.items():
        if coupling <= 0:
            continue
        gap = abs(couplings.delta[spec.pattern[i]] - couplings.delta[spec.pattern[j]])
        if gap <= ISING_TRUNCATION_RATIO * coupling:
            problems.append(
                f"sites {i}-{j} ({spec.pattern[i].value}{spec.pattern[j].value}): "
                f"|ΔΔ| = {gap:.3g} μeV ≤ {ISING_TRUNCATION_RATIO:g}·J = "
                f"{ISING_TRUNCATION_RATIO * coupling:.3g} μeV")
    return problems


# ── Parameter table ──────────────────────────────────────────────────────────

@dataclass
class ParamRow:
    key: str
    label: str
    value: float
    unit: str
    quoted: Optional[float] = None
    tolerance: str = ""
    status: str = "info"        # ok | out | flag | info
    note: str = ""

    def to_dict(self) -> dict:
        return {
            "key": self.key, "label": self.label, "value": self.value, "unit": self.unit,
            "reference": self.quoted, "tolerance": self.tolerance, "status": self.status,
            "note": self.note,
        }


def _within(value: float, quoted: float, rel: Optional[float] = None,
            factor: Optional[float] = None) -> bool:
    if rel is not None:
        return abs(value - quoted) <= rel * abs(quoted)
    return quoted / factor <= value <= quoted * factor


def _row(key, label, q: Quantity, unit, quoted=None, rel=None, factor=None, note="") -> ParamRow:
    value = q.to(unit).value if isinstance(q, Quantity) else float(q)
    row = ParamRow(key, label, value, unit, quoted, note=note)
    if quoted is None:
        return row
    if rel is not None:
        row.tolerance = f"±{rel * 100:g}%"
    elif factor is not None:
        row.tolerance = f"×/÷{factor:g}"
    if rel is None and factor is None:
        row.status = "flag"
    else:
        row.status = "ok" if _within(value, quoted, rel, factor) else "out"
    return row


_QUOTED_SPLITTINGS = {CellType.A: 95.0, CellType.B: 114.0, CellType.C: 143.0}


def parameter_table(spec: DeviceSpec) -> List[ParamRow]:
    """Every derived quantity with its quoted value and tolerance status."""
    m = spec.material
    rows: List[ParamRow] = []
    omega_c = spec.lasers.effective_C

    for cell in sorted(set(spec.pattern), key=lambda c: c.value):
        rows.append(_row(f"delta_{cell.value}", f"Δ_{cell.value} at Ω_C = {omega_c:g} meV",
                         spin_splitting(omega_c, spec.detunings[cell]), "μeV",
                         _QUOTED_SPLITTINGS.get(cell), rel=0.01))

    first = spec.pattern[0]
    rows.append(_row("rabi_C_resonance", f"Ω_C for Δ_{first.value} = Δ_CAV",
                     solve_rabi_for_resonance(spec.detunings[first], spec.cavity_energy),
                     "meV", 1.07, rel=0.01))
    rows.append(_row("nu_cav", "Cavity frequency ν_CAV",
                     frequency_from_cavity_energy(spec.cavity_energy), "GHz", 23.0, rel=0.01))

    gamma_d0x = linewidth_from_lifetime(Quantity(m.T_REC, "ps"))
    rows.append(_row("gamma_D0X", "Γ^D0X = ħ/T_REC", gamma_d0x, "μeV", 10.0, rel=0.15))
    delta_first = spin_splitting(omega_c, spec.detunings[first])
    rows.append(_row("gamma_inh_esr", f"Γ_inh^ESR ({first.value})",
                     esr_inhomogeneous_width(gamma_d0x, delta_first, spec.detunings[first]),
                     "μeV", 0.08, rel=0.25))
    rows.append(_row("delta_EX", f"δ_EX for a {spec.gate_time:g} ns pulse",
                     excitation_bandwidth(spec.gate_time), "μeV", 0.06, rel=0.20))

    tau_c = collision_time(m.mobility, m.m_eff)
    rows.append(_row("tau_c", "Collision time τ_c", tau_c, "fs", 340.0, rel=0.03))
    k_f = fermi_k_from_anisotropy(m.delta_g, m.g_av, m.B0, m.C0)
    rows.append(_row("k_F", "Fermi wave vector k_F", k_f, "nm⁻¹", 0.359, rel=0.01))
    t2m = t2_metal(m.C0, k_f, tau_c)
    rows.append(_row("T2_metal", "T2 metallic phase", t2m, "ns", 1.0, factor=1.5))

    gamma = gamma_angle(m.C0, m.R0, m.a0)
    rows.append(_row("gamma", "Rotation angle γ", gamma, "", 8.5e-4, rel=0.01))
    t2i = t2_insulator(spec.donor_density, m.a0, m.R0, gamma, m.beta_T)
    t2i_h = t2_insulator(spec.donor_density, m.a0, m.R0, gamma, m.beta_T, convention="h")
    quoted_t2i = 20.0 if math.isclose(spec.donor_density, 1e17) else (
        200.0 if math.isclose(spec.donor_density, 1e16) else None)
    rows.append(_row("T2_ins", f"T2 insulating, ħ reading (n0 = {spec.donor_density:.3g})",
                     t2i, "μs", quoted_t2i, note="ħ vs h convention ambiguous"))
    rows.append(_row("T2_ins_h", "T2 insulating, h reading", t2i_h, "μs", quoted_t2i,
                     note="ħ vs h convention ambiguous"))
    t2i_low = t2_insulator(spec.donor_density / 10.0, m.a0, m.R0, gamma, m.beta_T)
    rows.append(_row("T2_ins_scaling", "T2_ins(n0/10) / T2_ins(n0)",
                     Quantity(t2i_low.value / t2i.value, ""), "", 10.0, rel=1e-9))

    t2_lim = t2_hyperfine_limit(m.N_nuc, m.nu_hf)
    rows.append(_row("T2_limit", "Hyperfine limit N/(2πν)", t2_lim, "μs", QUOTED_T2_LIMIT_US,
                     note="does not follow from N, ν under standard conventions"))

    rows.append(_row("n_c", f"Mott density (a0 = {m.a0_mott:g} nm)",
                     mott_critical_density(m.a0_mott), "cm⁻³", 7e17, rel=0.03))
    rows.append(_row("n_c_gamma_radius", f"Mott density (a0 = {m.a0:g} nm)",
                     mott_critical_density(m.a0), "cm⁻³"))
    t2_exp = t2_from_esr_halfwidth(m.esr_halfwidth, m.g_av)
    rows.append(_row("T2_exp", "T2 from ESR half-width", t2_exp, "ns", 13.0, rel=0.15))

    bracket = t2m.value < t2_exp.value < t2i.to("ns").value
    rows.append(ParamRow("T2_bracket", "T2_metal < T2_exp < T2_ins", float(bracket), "",
                         status="ok" if bracket else "out"))

    rows.append(_row("fault_tolerance", f"T2,limit(quoted) / T_p ({spec.clock_period:g} ns)",
                     fault_tolerance_ratio(QUOTED_T2_LIMIT_US, spec.clock_period), "", 1e4, rel=0.01))
    rows.append(_row("fault_tolerance_computed", "T2,limit(computed) / T_p",
                     fault_tolerance_ratio(t2_lim, spec.clock_period), ""))

    for row in rows:
        if row.status == "flag":
            logger.warning("%s = %.4g %s differs from the quoted %.4g (%s)",
                           row.key, row.value, row.unit, row.quoted, row.note)
    return rows
