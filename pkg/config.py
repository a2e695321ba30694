"""
DonorQCA — Device files, noise settings, presets and run configuration.

Provides:
  - JSON loading/saving of DeviceSpec (schemas/device.schema.json)
  - Built-in device presets (the 7-cell reference chain and a 6-cell selective chain)
  - The optional "noise" section of a device file
  - RunConfig with the DONORQCA_SEED environment override
"""

from __future__ import annotations

import json
import logging
import math
import os
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

from device_params import DeviceSpec, MaterialParams, cavity_energy_from_frequency
from models import BoundaryPolicy, CellType, ConfigError, LaserSettings
from noise_ensemble import DEFAULT_SEED, LEVELS, NoiseModel

logger = logging.getLogger(__name__)

SEED_ENV = "DONORQCA_SEED"
OUTPUT_FORMATS = ("csv", "json")


# ── Device presets ───────────────────────────────────────────────────────────

DEVICE_PRESETS: Dict[str, dict] = {
    "reference": {
        "name": "reference",
        "description": "ABCABCD chain with the ZnO parameters of the architecture",
        "pattern": "ABCABCD",
        "detunings_meV": {"A": 12.0, "B": 10.0, "C": 8.0, "D": 6.0},
        "relay_detuning_meV": 4.0,
        "relay_couplings_ueV": {"A": 438.178046004, "B": 146.059348668, "C": 219.089023002, "D": 365.14837167},
        "cavity_energy_ueV": 95.0,
        "lasers": {"rabi_C_meV": 1.07, "rabi_L_meV": 2.0},
        "donor_density_cm3": 1e17,
        "temperature_K": 4.2,
        "gate_time_ns": 10.0,
        "clock_period_ns": 9.0,
    },
    "selective": {
        "name": "selective",
        "description": "6-cell ABCABC chain with J = {4, 2, 6} μeV",
        "pattern": "ABCABC",
        "detunings_meV": {"A": 12.0, "B": 10.0, "C": 8.0},
        "relay_detuning_meV": 4.0,
        "relay_couplings_ueV": {"A": 438.178046004, "B": 146.059348668, "C": 219.089023002},
        "cavity_energy_ueV": 95.0,
        "lasers": {"rabi_C_meV": 1.07, "rabi_L_meV": 2.0},
        "donor_density_cm3": 1e17,
        "temperature_K": 4.2,
        "gate_time_ns": 10.0,
        "clock_period_ns": 9.0,
    },
}


# ── Device files ─────────────────────────────────────────────────────────────

def _type_map(data, what: str) -> Dict[CellType, float]:
    if not isinstance(data, dict):
        raise ConfigError(f"'{what}' must be an object keyed by cell type")
    try:
        return {CellType.parse(k): float(v) for k, v in data.items()}
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"Invalid entry in '{what}': {exc}") from exc


def _material_from_dict(data: dict) -> MaterialParams:
    known = {f.name for f in fields(MaterialParams)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"Unknown material parameters: {', '.join(unknown)}")
    return MaterialParams(**data)


def device_from_dict(data: dict) -> DeviceSpec:
    """Build a DeviceSpec from its JSON form (energies carry their unit in the key)."""
    if not isinstance(data, dict):
        raise ConfigError("Device file must contain a JSON object")
    for key in ("pattern", "detunings_meV", "relay_detuning_meV", "relay_couplings_ueV"):
        if key not in data:
            raise ConfigError(f"Device file is missing '{key}'")
    if "cavity_frequency_GHz" in data and "cavity_energy_ueV" not in data:
        cavity = cavity_energy_from_frequency(float(data["cavity_frequency_GHz"])).value
    else:
        cavity = float(data.get("cavity_energy_ueV", 95.0))
    lasers = data.get("lasers", {})
    boundary = data.get("boundary", {})
    try:
        return DeviceSpec(
            pattern=data["pattern"],
            detunings=_type_map(data["detunings_meV"], "detunings_meV"),
            relay_detuning=float(data["relay_detuning_meV"]),
            relay_couplings=_type_map(data["relay_couplings_ueV"], "relay_couplings_ueV"),
            cavity_energy=cavity,
            material=_material_from_dict(data.get("material", {})),
            donor_density=float(data.get("donor_density_cm3", 1e17)),
            temperature=float(data.get("temperature_K", 4.2)),
            boundary=BoundaryPolicy(int(boundary.get("left", 0)), int(boundary.get("right", 0))),
            lasers=LaserSettings(float(lasers.get("rabi_C_meV", 1.07)),
                                 float(lasers.get("rabi_L_meV", 0.0))),
            gate_time=float(data.get("gate_time_ns", 10.0)),
            clock_period=float(data.get("clock_period_ns", 9.0)),
            virtual_couplings=bool(data.get("virtual_couplings", True)),
        )
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"Invalid device description: {exc}") from exc


def device_to_dict(spec: DeviceSpec) -> dict:
    material_defaults = MaterialParams()
    material = {f.name: getattr(spec.material, f.name) for f in fields(MaterialParams)
                if getattr(spec.material, f.name) != getattr(material_defaults, f.name)}
    data = {
        "pattern": spec.pattern_string,
        "detunings_meV": {c.value: v for c, v in sorted(spec.detunings.items(), key=lambda kv: kv[0].value)},
        "relay_detuning_meV": spec.relay_detuning,
        "relay_couplings_ueV": {c.value: v for c, v in
                                sorted(spec.relay_couplings.items(), key=lambda kv: kv[0].value)},
        "cavity_energy_ueV": spec.cavity_energy,
        "lasers": {"rabi_C_meV": spec.lasers.rabi_C, "rabi_L_meV": spec.lasers.rabi_L},
        "donor_density_cm3": spec.donor_density,
        "temperature_K": spec.temperature,
        "boundary": {"left": spec.boundary.left_virtual, "right": spec.boundary.right_virtual},
        "gate_time_ns": spec.gate_time,
        "clock_period_ns": spec.clock_period,
        "virtual_couplings": spec.virtual_couplings,
    }
    if material:
        data["material"] = material
    return data


def _read_json(path: Union[str, Path]) -> dict:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"File not found: {path}")
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from exc
    except OSError as exc:
        raise ConfigError(f"Cannot read {path}: {exc}") from exc


def load_device_data(source: Union[str, Path]) -> dict:
    """Raw device JSON from a file or a preset name."""
    if str(source) in DEVICE_PRESETS:
        return dict(DEVICE_PRESETS[str(source)])
    return _read_json(source)


def load_device(source: Union[str, Path]) -> DeviceSpec:
    """Load a device file, or a preset when `source` names one."""
    spec = device_from_dict(load_device_data(source))
    logger.debug("Loaded device %s (%s)", source, spec.pattern_string)
    return spec


def save_device(spec: DeviceSpec, path: Union[str, Path], noise: Optional[NoiseModel] = None) -> None:
    data = device_to_dict(spec)
    if noise is not None:
        data["noise"] = noise_to_dict(noise)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(data, f, indent=2, sort_keys=True)


# ── Noise section ────────────────────────────────────────────────────────────

def noise_from_dict(data: Optional[dict], spec: DeviceSpec, seed: int = DEFAULT_SEED) -> NoiseModel:
    """Noise settings of a device file.

    `t2_us` is a number (all types) or a per-type map; `inhomogeneous_fwhm_ueV`
    is a per-type map or "auto" for Γ^D0X·Δ_i/δ_i. Missing entries mean no noise.
    """
    data = data or {}
    t2 = data.get("t2_us")
    if isinstance(t2, (int, float)):
        t2 = {cell: float(t2) for cell in set(spec.pattern)}
    elif t2 is not None:
        t2 = _type_map(t2, "t2_us")
    fwhm = data.get("inhomogeneous_fwhm_ueV", {})
    try:
        if fwhm == "auto":
            auto = NoiseModel.from_device(spec, seed=seed)
            return NoiseModel(t2 or {}, auto.inhomogeneous_fwhm_per_type, seed)
        return NoiseModel(t2 or {}, _type_map(fwhm, "inhomogeneous_fwhm_ueV"), seed)
    except ValueError as exc:
        raise ConfigError(f"Invalid noise settings: {exc}") from exc


def noise_to_dict(model: NoiseModel) -> dict:
    return {
        "t2_us": {c.value: v for c, v in model.t2_per_type.items() if not math.isinf(v)},
        "inhomogeneous_fwhm_ueV": {c.value: v for c, v in model.inhomogeneous_fwhm_per_type.items()},
    }


def with_t2(model: NoiseModel, t2_us: float, spec: DeviceSpec) -> NoiseModel:
    """Same model with one T2 for every cell type."""
    return NoiseModel({c: t2_us for c in set(spec.pattern)},
                      model.inhomogeneous_fwhm_per_type, model.rng_seed)


# ── Run configuration ────────────────────────────────────────────────────────

def resolve_seed(seed: Optional[int]) -> int:
    """Explicit seed, else DONORQCA_SEED, else the documented default."""
    if seed is not None:
        return int(seed)
    env = os.environ.get(SEED_ENV)
    if env is None or not env.strip():
        return DEFAULT_SEED
    try:
        return int(env, 0)
    except ValueError as exc:
        raise ConfigError(f"{SEED_ENV}={env!r} is not an integer") from exc


@dataclass
class RunConfig:
    """Everything one run/compare/tomo invocation needs."""
    device: str = "reference"                 # file path or preset name
    program: Optional[str] = None         # file path or demo name
    n_molecules: int = 1000
    seed: int = DEFAULT_SEED
    dt: Optional[float] = None            # ns
    out_dir: str = "results"
    formats: Tuple[str, ...] = OUTPUT_FORMATS
    workers: int = 1
    level: str = "pulse"
    t2_us: Optional[float] = None
    observables: List[str] = field(default_factory=list)

    def __post_init__(self):
        if self.n_molecules < 1:
            raise ConfigError("--molecules must be at least 1")
        if self.workers < 1:
            raise ConfigError("--workers must be at least 1")
        if self.dt is not None and self.dt <= 0:
            raise ConfigError("--dt must be positive")
        if self.level not in LEVELS:
            raise ConfigError(f"Unknown level '{self.level}' (expected {' or '.join(LEVELS)})")
        bad = [f for f in self.formats if f not in OUTPUT_FORMATS]
        if bad:
            raise ConfigError(f"Unknown output format(s): {', '.join(bad)}")
        if self.t2_us is not None and self.t2_us <= 0:
            raise ConfigError("--t2 must be positive")

    @property
    def out_path(self) -> Path:
        return Path(self.out_dir)


def _arg(args, name: str, default=None):
    value = getattr(args, name, None)
    return default if value is None else value


def run_config_from_args(args) -> RunConfig:
    """RunConfig from parsed CLI arguments (absent flags keep their defaults)."""
    formats = tuple(f.strip() for f in _arg(args, "format", "csv,json").split(",") if f.strip())
    return RunConfig(
        device=_arg(args, "device", "reference"),
        program=_arg(args, "program"),
        n_molecules=_arg(args, "molecules", 1000),
        seed=resolve_seed(_arg(args, "seed")),
        dt=_arg(args, "dt"),
        out_dir=_arg(args, "out", "results"),
        formats=formats,
        workers=_arg(args, "workers", 1),
        level=_arg(args, "level", "pulse"),
        t2_us=_arg(args, "t2"),
        observables=list(_arg(args, "observable", [])),
    )
