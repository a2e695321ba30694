"""
DonorQCA — Initialization, Faraday readout and D-cell tomography.

Readout never projects single spins: every number here is an ensemble
average of ⟨σ_z⟩ over the target cells of many identical chains.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from device_params import DeviceSpec
from models import CellType, StateError
from noise_ensemble import DEFAULT_SEED, EnsembleResult, NoiseModel, ProgressCallback, run_ensemble
from programs import PulseProgram, global_rotation
from qca_core import ChainState, Observable, apply_unitary, new_chain, parse_pattern, reduced_site, site_z

logger = logging.getLogger(__name__)

BLOCH_TOL = 1e-6

# Pre-rotation on D, measured axis, sign of M_z relative to that axis.
TOMOGRAPHY_SETTINGS: Tuple[Tuple[str, Optional[Tuple[float, float]], float], ...] = (
    ("x", (math.pi / 2, math.pi / 2), 1.0),
    ("y", (math.pi / 2, 0.0), -1.0),
    ("z", None, 1.0),
)


# ── Initialization ───────────────────────────────────────────────────────────

def initialize_pumped(pattern: Union[str, Sequence, ChainState], pumping_fidelity: float = 1.0,
                      rng: Optional[np.random.Generator] = None, density: bool = False
                      ) -> ChainState:
    """All spins down after σ+ optical pumping.

    With pumping_fidelity < 1 each site independently ends up |1⟩ with
    probability 1 − pumping_fidelity.
    """
    cells = pattern.pattern if isinstance(pattern, ChainState) else parse_pattern(pattern)
    if not 0.0 <= pumping_fidelity <= 1.0:
        raise ValueError("Pumping fidelity must lie in [0, 1]")
    bits = ["0"] * len(cells)
    if pumping_fidelity < 1.0:
        rng = rng if rng is not None else np.random.default_rng(DEFAULT_SEED)
        flips = rng.random(len(cells)) >= pumping_fidelity
        bits = ["1" if f else "0" for f in flips]
        if flips.any():
            logger.debug("Pumping left sites %s flipped", np.flatnonzero(flips).tolist())
    return new_chain(cells, "".join(bits), density=density)


def qubit_amplitudes(theta: float, phi: float) -> np.ndarray:
    """cos(θ/2)|0⟩ + e^{iφ} sin(θ/2)|1⟩."""
    return np.array([math.cos(theta / 2), np.exp(1j * phi) * math.sin(theta / 2)])


def load_qubit(state: ChainState, site: int, amplitudes: Sequence[complex]) -> ChainState:
    """Write a single-cell state onto a site that is currently |0⟩."""
    a, b = (complex(v) for v in amplitudes)
    norm = math.sqrt(abs(a) ** 2 + abs(b) ** 2)
    if norm == 0:
        raise StateError("Qubit amplitudes are zero")
    a, b = a / norm, b / norm
    if not 0 <= site < state.n_sites:
        raise StateError(f"Site {site} is outside the {state.n_sites}-cell chain")
    if site_z(state, site) > -1.0 + 1e-9:
        raise StateError(f"Site {site} is not in |0⟩; pump the chain first")
    prep = np.array([[a, -np.conj(b)], [b, np.conj(a)]])
    return apply_unitary(state, prep, [site])


# ── Bloch vectors ────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class BlochVector:
    x: float
    y: float
    z: float

    def __post_init__(self):
        if self.norm > 1.0 + BLOCH_TOL:
            raise StateError(f"Bloch vector length {self.norm:.6g} exceeds 1")

    @property
    def norm(self) -> float:
        return math.sqrt(self.x ** 2 + self.y ** 2 + self.z ** 2)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    @classmethod
    def from_amplitudes(cls, amplitudes: Sequence[complex]) -> "BlochVector":
        a, b = (complex(v) for v in amplitudes)
        norm = abs(a) ** 2 + abs(b) ** 2
        coherence = np.conj(a) * b / norm
        # σ_z = diag(−1, +1)
        return cls(2 * coherence.real, 2 * coherence.imag, (abs(b) ** 2 - abs(a) ** 2) / norm)

    @classmethod
    def from_density(cls, rho: np.ndarray) -> "BlochVector":
        return cls(2 * rho[1, 0].real, 2 * rho[1, 0].imag, float(np.real(rho[1, 1] - rho[0, 0])))

    @classmethod
    def clipped(cls, x: float, y: float, z: float) -> "BlochVector":
        """Estimate projected onto the unit ball."""
        norm = math.sqrt(x * x + y * y + z * z)
        if norm > 1.0:
            x, y, z = x / norm, y / norm, z / norm
        return cls(x, y, z)

    def fidelity(self, other: "BlochVector") -> float:
        """State fidelity when `other` is pure."""
        return 0.5 * (1.0 + float(self.as_array() @ other.as_array()))


def site_bloch(state: ChainState, site: int) -> BlochVector:
    return BlochVector.from_density(reduced_site(state, site))


# ── Faraday readout ──────────────────────────────────────────────────────────

@dataclass(frozen=True)
class FaradaySignal:
    angle: float
    kappa: float
    target_type: CellType
    stderr: float = 0.0
    n_molecules: int = 1

    @property
    def magnetization(self) -> float:
        return self.angle / self.kappa if self.kappa else 0.0


def faraday_readout(result: Union[EnsembleResult, ChainState], target_type,
                    kappa: float = 1.0) -> FaradaySignal:
    """Polarisation rotation ∝ mean ⟨σ_z⟩ of the target cells at the final sample.

    The standard error is the mean of the per-site errors, an upper bound
    for the error of their average.
    """
    cell = CellType.parse(target_type)
    pattern = result.pattern
    sites = [k for k, c in enumerate(pattern) if c == cell]
    if not sites:
        raise StateError(f"Pattern {''.join(c.value for c in pattern)} has no {cell.value} cell")
    if isinstance(result, ChainState):
        mz = float(np.mean([site_z(result, k) for k in sites]))
        return FaradaySignal(kappa * mz, kappa, cell)
    if not len(result.times):
        raise StateError("Ensemble result has no samples")
    mz = float(np.mean(result.site_z[-1, sites]))
    err = float(np.mean(result.site_z_stderr[-1, sites]))
    return FaradaySignal(kappa * mz, kappa, cell, abs(kappa) * err, result.n_molecules)


# ── Tomography ───────────────────────────────────────────────────────────────

@dataclass
class TomographyResult:
    bloch: BlochVector
    stderr: Tuple[float, float, float]
    n_molecules: int
    seed: int
    raw: Tuple[float, float, float] = (0.0, 0.0, 0.0)

    def to_dict(self) -> dict:
        return {
            "bloch": [self.bloch.x, self.bloch.y, self.bloch.z],
            "stderr": list(self.stderr),
            "n_molecules": self.n_molecules,
            "seed": self.seed,
        }


def tomography_program(spec: DeviceSpec, program: PulseProgram, axis: str) -> PulseProgram:
    """`program` followed by the D pre-rotation that maps `axis` onto M_z."""
    for name, pre, _ in TOMOGRAPHY_SETTINGS:
        if name == axis:
            if pre is None:
                return program + PulseProgram(pattern=spec.pattern_string)
            return program + global_rotation(CellType.D, pre[0], pre[1], spec)
    raise ValueError(f"Unknown tomography axis '{axis}'")


def tomography_D(spec: DeviceSpec, program: PulseProgram, noise: Optional[NoiseModel] = None,
                 n_molecules: int = 1, initial: Optional[ChainState] = None,
                 level: str = "oracle", dt: Optional[float] = None, workers: int = 1,
                 progress_cb: ProgressCallback = None) -> TomographyResult:
    """Reconstruct the D cell's Bloch vector from three M_z,D readouts.

    Pre-rotation R(π/2, π/2) turns ⟨σ_x⟩ into M_z, R(π/2, 0) turns ⟨σ_y⟩
    into −M_z, and no rotation reads ⟨σ_z⟩ directly.
    """
    if CellType.D not in spec.pattern:
        raise StateError(f"Pattern {spec.pattern_string} has no D cell to read out")
    noise = noise if noise is not None else NoiseModel.noiseless()
    initial = initial if initial is not None else initialize_pumped(spec.pattern)
    d_site = spec.pattern.index(CellType.D)
    observable = Observable.local(spec.n_sites, {d_site: "Z"})
    values, errors = {}, {}
    for axis, _, sign in TOMOGRAPHY_SETTINGS:
        full = tomography_program(spec, program, axis)
        result = run_ensemble(spec, noise, full, n_molecules, [observable], initial=initial,
                              level=level, dt=dt, workers=workers, progress_cb=progress_cb)
        signal = faraday_readout(result, CellType.D)
        values[axis] = sign * signal.angle
        errors[axis] = signal.stderr
        logger.debug("Tomography %s: %.6g ± %.2g", axis, values[axis], errors[axis])
    raw = (values["x"], values["y"], values["z"])
    return TomographyResult(
        bloch=BlochVector.clipped(*raw),
        stderr=(errors["x"], errors["y"], errors["z"]),
        n_molecules=n_molecules,
        seed=noise.rng_seed,
        raw=raw,
    )
