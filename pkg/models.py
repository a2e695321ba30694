"""
DonorQCA — Data models shared by the simulator modules.

Cell types, laser and microwave settings, pulse events, gate rules, the
boundary policy, and the exception hierarchy.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple, Union


# ── Errors ───────────────────────────────────────────────────────────────────

class QcaError(Exception):
    """Base class for every error raised by DonorQCA."""


class ConfigError(QcaError):
    """A device or run configuration is missing or invalid."""


class ProgramFormatError(QcaError):
    """A pulse-program file cannot be parsed."""


class UnitError(QcaError, ValueError):
    """Quantities with incompatible dimensions were combined."""


class StateError(QcaError, ValueError):
    """Invalid chain pattern, state normalisation, or operator."""


class StepSizeError(QcaError, ValueError):
    """Integration step violates the pulse-engine preconditions."""


class InfeasibleSelectivityError(QcaError):
    """A selective pulse would also drive unintended transitions."""

    def __init__(self, message: str, collisions: Optional[List[str]] = None):
        super().__init__(message)
        self.collisions: List[str] = list(collisions or [])


# ── Cell types ───────────────────────────────────────────────────────────────

class CellType(enum.Enum):
    """Spectral type of a donor cell."""
    A = "A"
    B = "B"
    C = "C"
    D = "D"

    @classmethod
    def parse(cls, value: Union[str, "CellType"]) -> "CellType":
        if isinstance(value, CellType):
            return value
        try:
            return cls(str(value).strip().upper())
        except ValueError:
            raise StateError(f"Unknown cell type '{value}' (expected A, B, C or D)") from None


Condition = Optional[int]   # 0, 1, or None for "any"
ANY: Condition = None


def parse_condition(value) -> Condition:
    """Accept 0, 1, "0", "1", "any", or None."""
    if value is None:
        return ANY
    if isinstance(value, str):
        text = value.strip().lower()
        if text in ("any", "*", ""):
            return ANY
        value = text
    try:
        bit = int(value)
    except (TypeError, ValueError):
        raise StateError(f"Invalid neighbor condition '{value}'") from None
    if bit not in (0, 1):
        raise StateError(f"Invalid neighbor condition '{value}'")
    return bit


def condition_label(cond: Condition) -> str:
    return "any" if cond is None else str(cond)


# ── Optical and microwave settings ───────────────────────────────────────────

@dataclass(frozen=True)
class LaserSettings:
    """The two optical pulses of a gating window.

    rabi_C drives the donor-bound exciton (spin splittings), rabi_L the relay
    exciton (exchange couplings). Energies in meV.
    """
    rabi_C: float = 0.0
    rabi_L: float = 0.0
    c_on: bool = True
    l_on: bool = True

    def __post_init__(self):
        if self.rabi_C < 0 or self.rabi_L < 0:
            raise ValueError("Laser Rabi energies must be non-negative")

    @property
    def effective_C(self) -> float:
        return self.rabi_C if self.c_on else 0.0

    @property
    def effective_L(self) -> float:
        return self.rabi_L if self.l_on else 0.0

    @property
    def any_on(self) -> bool:
        return self.effective_C > 0 or self.effective_L > 0

    @classmethod
    def off(cls) -> "LaserSettings":
        return cls(0.0, 0.0, False, False)


class EnvelopeKind(enum.Enum):
    RECTANGULAR = "rectangular"
    GAUSSIAN = "gaussian"


@dataclass(frozen=True)
class Envelope:
    """Microwave amplitude envelope.

    For gaussian envelopes sigma is in ns and the pulse is truncated at
    ±truncation·sigma around the centre of the event.
    """
    kind: EnvelopeKind = EnvelopeKind.RECTANGULAR
    sigma: Optional[float] = None
    truncation: float = 3.0

    def __post_init__(self):
        if self.kind is EnvelopeKind.GAUSSIAN:
            if self.sigma is None or self.sigma <= 0:
                raise ValueError("Gaussian envelope needs a positive sigma")
            if self.truncation < 3.0:
                raise ValueError("Gaussian truncation must be at least 3 sigma")

    @classmethod
    def rectangular(cls) -> "Envelope":
        return cls(EnvelopeKind.RECTANGULAR)

    @classmethod
    def gaussian(cls, sigma: float, truncation: float = 3.0) -> "Envelope":
        return cls(EnvelopeKind.GAUSSIAN, sigma, truncation)

    def shape(self, t: float, duration: float) -> float:
        """Relative amplitude in [0, 1] at time t (ns) from event start."""
        if t < 0 or t > duration:
            return 0.0
        if self.kind is EnvelopeKind.RECTANGULAR:
            return 1.0
        centre = 0.5 * duration
        offset = t - centre
        if abs(offset) > self.truncation * self.sigma:
            return 0.0
        return math.exp(-0.5 * (offset / self.sigma) ** 2)

    def area(self, duration: float) -> float:
        """∫ shape(t) dt over the event, in ns."""
        if self.kind is EnvelopeKind.RECTANGULAR:
            return duration
        from scipy.special import erf
        half = min(0.5 * duration, self.truncation * self.sigma)
        return self.sigma * math.sqrt(2.0 * math.pi) * float(erf(half / (self.sigma * math.sqrt(2.0))))


@dataclass(frozen=True)
class MicrowaveDrive:
    """Microwave pulse: peak Rabi energy ω₁ and photon energy, both μeV."""
    rabi_energy: float
    frequency_energy: float
    phase: float = 0.0
    envelope: Envelope = field(default_factory=Envelope.rectangular)

    def __post_init__(self):
        if self.rabi_energy < 0:
            raise ValueError("Microwave Rabi energy must be non-negative")


# ── Gate rules ───────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class GateRule:
    """One globally applied conditional rotation.

    Every cell of type `target` whose left/right neighbors match the
    conditions is rotated by R(theta, axis_phase), or by Rz(z_angle) when the
    z variant is set.
    """
    target: CellType
    left_cond: Condition = ANY
    right_cond: Condition = ANY
    theta: Optional[float] = math.pi
    axis_phase: float = 0.0
    z_angle: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "target", CellType.parse(self.target))
        object.__setattr__(self, "left_cond", parse_condition(self.left_cond))
        object.__setattr__(self, "right_cond", parse_condition(self.right_cond))
        if self.z_angle is not None:
            object.__setattr__(self, "theta", None)
        if (self.theta is None) == (self.z_angle is None):
            raise StateError("GateRule needs exactly one of theta or z_angle")

    @property
    def is_z(self) -> bool:
        return self.z_angle is not None

    def with_conditions(self, left: Condition, right: Condition) -> "GateRule":
        return GateRule(self.target, left, right, self.theta, self.axis_phase, self.z_angle)

    def describe(self) -> str:
        if self.is_z:
            kind = f"Rz({self.z_angle:.4g})"
        else:
            kind = f"R({self.theta:.4g}, {self.axis_phase:.4g})"
        return (f"{self.target.value}[L={condition_label(self.left_cond)},"
                f"R={condition_label(self.right_cond)}] {kind}")


@dataclass(frozen=True)
class BoundaryPolicy:
    """Virtual neighbor spin values seen by the two end cells."""
    left_virtual: int = 0
    right_virtual: int = 0

    def __post_init__(self):
        if self.left_virtual not in (0, 1) or self.right_virtual not in (0, 1):
            raise ValueError("Virtual boundary spins must be 0 or 1")


# ── Pulse events ─────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class PulseEvent:
    """One timed step of a pulse program.

    Either a physical window (lasers, optional microwave) or, when `ideal` is
    set, an instantaneous oracle-level rule application of zero duration.
    `rule` and `sites` record the oracle semantics a compiled event realises.
    """
    duration: float
    lasers: LaserSettings = field(default_factory=LaserSettings.off)
    microwave: Optional[MicrowaveDrive] = None
    ideal: Optional[GateRule] = None
    rule: Optional[GateRule] = None
    sites: Optional[Tuple[int, ...]] = None
    label: str = ""

    def __post_init__(self):
        if self.ideal is not None:
            if self.duration != 0 or self.microwave is not None:
                raise ValueError("Ideal events are instantaneous and carry no microwave")
            return
        if self.duration <= 0:
            raise ValueError("Event duration must be positive")
        if self.microwave is not None and not (self.lasers.effective_C > 0):
            raise ValueError("Microwave pulses require the optical pulses to be on")

    @property
    def is_ideal(self) -> bool:
        return self.ideal is not None

    @property
    def oracle_rule(self) -> Optional[GateRule]:
        return self.ideal if self.ideal is not None else self.rule


# ── Formatting helpers ───────────────────────────────────────────────────────

_SUBSECOND_UNITS = ((1e-6, 1e9, "ns"), (1e-3, 1e6, "μs"), (1.0, 1e3, "ms"))


def format_duration(seconds: float) -> str:
    """Render a span from nanoseconds (pulse programs) up to hours (wall clock)."""
    if seconds <= 0:
        return "0 s"
    for bound, scale, unit in _SUBSECOND_UNITS:
        if seconds < bound:
            return f"{seconds * scale:.3g} {unit}"
    if seconds < 60.0:
        return f"{seconds:.1f} s"
    minutes, secs = divmod(int(round(seconds)), 60)
    if minutes < 60:
        return f"{minutes}m {secs:02d}s"
    hours, minutes = divmod(minutes, 60)
    return f"{hours}h {minutes:02d}m"


def format_ns(nanoseconds: float) -> str:
    return format_duration(nanoseconds * 1e-9)


def format_sig(value: float, digits: int = 12) -> str:
    """Fixed significant-digit rendering used by every output file."""
    if value is None:
        return ""
    if isinstance(value, float) and (math.isinf(value) or math.isnan(value)):
        return str(value)
    return f"{value:.{digits}g}"


def round_sig(value: float, digits: int = 12) -> float:
    if value is None or not math.isfinite(value):
        return value
    return float(format_sig(value, digits))


def types_in(pattern) -> Dict[CellType, List[int]]:
    """Map each cell type to the sites carrying it."""
    positions: Dict[CellType, List[int]] = {}
    for site, cell in enumerate(pattern):
        positions.setdefault(cell, []).append(site)
    return positions
