"""
DonorQCA — Unit-tagged physical quantities.

Internal canonical units: energies in μeV, frequencies in GHz, times in ns,
lengths in nm. Energy and frequency interconvert through E = hν; energy and
time through Γ = ħ/τ (see `linewidth` / `lifetime`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Tuple, Union

from scipy import constants as sc

from models import UnitError

# h in μeV/GHz and ħ in μeV·ns
H_UEV_PER_GHZ = sc.h / sc.e * 1e6 * 1e9
HBAR_UEV_NS = sc.hbar / sc.e * 1e6 * 1e9
# Bohr magneton in μeV/T
MU_B_UEV_PER_T = sc.physical_constants["Bohr magneton in eV/T"][0] * 1e6

# unit → (dimension, factor to the canonical unit of that dimension)
_UNITS: Dict[str, Tuple[str, float]] = {
    "μeV": ("energy", 1.0),
    "meV": ("energy", 1e3),
    "eV": ("energy", 1e6),
    "GHz": ("frequency", 1.0),
    "MHz": ("frequency", 1e-3),
    "Hz": ("frequency", 1e-9),
    "ns": ("time", 1.0),
    "μs": ("time", 1e3),
    "ps": ("time", 1e-3),
    "fs": ("time", 1e-6),
    "s": ("time", 1e9),
    "nm": ("length", 1.0),
    "T": ("field", 1.0),
    "mT": ("field", 1e-3),
    "cm⁻³": ("density", 1.0),
    "nm⁻³": ("density", 1e21),
    "nm⁻¹": ("wavenumber", 1.0),
    "K": ("temperature", 1.0),
    "μeV·nm": ("energy_length", 1.0),
    "cm²/Vs": ("mobility", 1.0),
    "": ("dimensionless", 1.0),
}

_ALIASES = {
    "ueV": "μeV", "µeV": "μeV", "us": "μs", "µs": "μs",
    "cm-3": "cm⁻³", "cm^-3": "cm⁻³", "nm-3": "nm⁻³", "nm-1": "nm⁻¹", "nm^-1": "nm⁻¹",
    "ueV*nm": "μeV·nm", "ueV.nm": "μeV·nm", "μeV*nm": "μeV·nm",
    "cm2/Vs": "cm²/Vs", "cm^2/Vs": "cm²/Vs",
    "1": "", "dimensionless": "",
}


def canonical_unit(unit: str) -> str:
    unit = _ALIASES.get(unit, unit)
    if unit not in _UNITS:
        raise UnitError(f"Unknown unit '{unit}'")
    return unit


def dimension(unit: str) -> str:
    return _UNITS[canonical_unit(unit)][0]


@dataclass(frozen=True)
class Quantity:
    """A real value tagged with a unit from the supported table."""
    value: float
    unit: str = ""

    def __post_init__(self):
        object.__setattr__(self, "unit", canonical_unit(self.unit))
        object.__setattr__(self, "value", float(self.value))

    @property
    def dimension(self) -> str:
        return _UNITS[self.unit][0]

    def to(self, unit: str) -> "Quantity":
        """Convert to `unit`; energy ↔ frequency goes through E = hν."""
        unit = canonical_unit(unit)
        src_dim, src_factor = _UNITS[self.unit]
        dst_dim, dst_factor = _UNITS[unit]
        canonical = self.value * src_factor
        if src_dim == dst_dim:
            return Quantity(canonical / dst_factor, unit)
        if src_dim == "frequency" and dst_dim == "energy":
            return Quantity(canonical * H_UEV_PER_GHZ / dst_factor, unit)
        if src_dim == "energy" and dst_dim == "frequency":
            return Quantity(canonical / H_UEV_PER_GHZ / dst_factor, unit)
        raise UnitError(f"Cannot convert {self.unit or 'dimensionless'} "
                        f"to {unit or 'dimensionless'}")

    def magnitude(self, unit: str) -> float:
        return self.to(unit).value

    def _check(self, other: "Quantity") -> "Quantity":
        if not isinstance(other, Quantity):
            if self.dimension == "dimensionless":
                return Quantity(other)
            raise UnitError(f"Cannot combine {self.unit} with a bare number")
        if other.dimension != self.dimension:
            raise UnitError(f"Dimension mismatch: {self.unit} vs {other.unit}")
        return other.to(self.unit)

    def __add__(self, other):
        return Quantity(self.value + self._check(other).value, self.unit)

    def __sub__(self, other):
        return Quantity(self.value - self._check(other).value, self.unit)

    def __neg__(self):
        return Quantity(-self.value, self.unit)

    def __mul__(self, scalar):
        if isinstance(scalar, Quantity):
            if scalar.dimension != "dimensionless":
                raise UnitError("Products of dimensioned quantities are evaluated by the formulas")
            scalar = scalar.value
        return Quantity(self.value * float(scalar), self.unit)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Quantity):
            if other.dimension == self.dimension:
                return self.value / other.to(self.unit).value
            if other.dimension != "dimensionless":
                raise UnitError("Quotients of dimensioned quantities are evaluated by the formulas")
            other = other.value
        return Quantity(self.value / float(other), self.unit)

    def __lt__(self, other):
        return self.value < self._check(other).value

    def __le__(self, other):
        return self.value <= self._check(other).value

    def __gt__(self, other):
        return self.value > self._check(other).value

    def __ge__(self, other):
        return self.value >= self._check(other).value

    def __float__(self):
        return self.value

    def isclose(self, other: "Quantity", rel: float = 1e-9) -> bool:
        return math.isclose(self.value, self._check(other).value, rel_tol=rel)

    def __str__(self):
        return f"{self.value:.6g} {self.unit}".rstrip()


QuantityLike = Union[Quantity, float, int]


def as_value(q: QuantityLike, unit: str) -> float:
    """Magnitude of `q` in `unit`; bare numbers are taken to be in `unit`."""
    if isinstance(q, Quantity):
        return q.to(unit).value
    return float(q)


def linewidth(lifetime_q: QuantityLike, unit: str = "μeV") -> Quantity:
    """Γ = ħ/τ."""
    tau = as_value(lifetime_q, "ns")
    if tau <= 0:
        raise ValueError("Lifetime must be positive")
    return Quantity(HBAR_UEV_NS / tau, "μeV").to(unit)


def lifetime(width: QuantityLike, unit: str = "ns") -> Quantity:
    """τ = ħ/Γ."""
    gamma = as_value(width, "μeV")
    if gamma <= 0:
        raise ValueError("Linewidth must be positive")
    return Quantity(HBAR_UEV_NS / gamma, "ns").to(unit)
