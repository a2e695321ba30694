"""
DonorQCA — Dephasing, static inhomogeneity and ensemble averaging.

Every molecule of the ensemble draws its own static transition offsets and
its own phase-flip trajectory from RNG streams derived from the master seed
and the molecule index, so results do not depend on how molecules are
distributed over workers. Molecules are processed in fixed-size chunks whose
partial sums are reduced in chunk order.

Observables are reported in the logical frame: the nominal single-site
precession of every site is removed. Ising phases accumulated while the
exchange laser is on stay, as the oracle semantics of each event has them.
"""

from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from device_params import DeviceSpec, esr_inhomogeneous_width, linewidth_from_lifetime, spin_splitting
from gate_oracle import apply_rule
from models import CellType, ConfigError, GateRule, PulseEvent, StateError, types_in
from programs import PulseProgram
from pulse_engine import frame_hamiltonian, frame_phases, step_count, step_propagators
from qca_core import (
    SZ,
    ChainState,
    Observable,
    _pauli_action,
    apply_channel,
    apply_diagonal,
    new_chain,
    z_spins,
)
from quantities import HBAR_UEV_NS

logger = logging.getLogger(__name__)

DEFAULT_SEED = 20050101
FWHM_PER_SIGMA = 2.0 * math.sqrt(2.0 * math.log(2.0))
MAX_CHUNK = 1024
CHUNK_MEMORY_BUDGET = 64 * 1024 * 1024      # bytes of state per chunk
LEVELS = ("pulse", "oracle")

ProgressCallback = Optional[Callable[[str, int, int, float, float], None]]
# callback(label, done_chunks, total_chunks, elapsed_s, remaining_s)


# ── Noise model ──────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class NoiseModel:
    """Per-type T2 (μs) and inhomogeneous FWHM (μeV) plus the master seed."""
    t2_per_type: Dict[CellType, float] = field(default_factory=dict)
    inhomogeneous_fwhm_per_type: Dict[CellType, float] = field(default_factory=dict)
    rng_seed: int = DEFAULT_SEED

    def __post_init__(self):
        t2 = {CellType.parse(k): float(v) for k, v in self.t2_per_type.items()}
        fwhm = {CellType.parse(k): float(v) for k, v in self.inhomogeneous_fwhm_per_type.items()}
        for cell, value in t2.items():
            if not value > 0:
                raise ConfigError(f"T2 for {cell.value} must be positive")
        for cell, value in fwhm.items():
            if value < 0:
                raise ConfigError(f"Inhomogeneous width for {cell.value} must be non-negative")
        object.__setattr__(self, "t2_per_type", t2)
        object.__setattr__(self, "inhomogeneous_fwhm_per_type", fwhm)
        object.__setattr__(self, "rng_seed", int(self.rng_seed) & (2 ** 64 - 1))

    @classmethod
    def noiseless(cls, seed: int = DEFAULT_SEED) -> "NoiseModel":
        return cls({}, {}, seed)

    @classmethod
    def from_device(cls, spec: DeviceSpec, t2_us: Optional[float] = None,
                    seed: int = DEFAULT_SEED) -> "NoiseModel":
        """Γ_inh per type from the D0X linewidth at the nominal Ω_C; one T2 for all types."""
        gamma = linewidth_from_lifetime(spec.material.T_REC)
        fwhm = {}
        for cell in types_in(spec.pattern):
            delta = spin_splitting(spec.lasers.rabi_C, spec.detunings[cell])
            fwhm[cell] = esr_inhomogeneous_width(gamma, delta, spec.detunings[cell]).value
        t2 = {} if t2_us is None else {cell: t2_us for cell in types_in(spec.pattern)}
        return cls(t2, fwhm, seed)

    def t2(self, cell: CellType) -> float:
        return self.t2_per_type.get(cell, math.inf)

    def fwhm(self, cell: CellType) -> float:
        return self.inhomogeneous_fwhm_per_type.get(cell, 0.0)

    @property
    def is_noiseless(self) -> bool:
        return (all(math.isinf(v) for v in self.t2_per_type.values())
                and all(v == 0 for v in self.inhomogeneous_fwhm_per_type.values()))


def molecule_rngs(seed: int, index: int) -> Tuple[np.random.Generator, np.random.Generator]:
    """(static-offset stream, trajectory stream) of one molecule."""
    offsets = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(index, 0)))
    flips = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(index, 1)))
    return offsets, flips


def flip_probability(duration: float, t2_us: float) -> float:
    """p = (1 − e^{−t/T2})/2, with t in ns and T2 in μs."""
    if duration < 0:
        raise ValueError("Duration must be non-negative")
    if math.isinf(t2_us):
        return 0.0
    return 0.5 * (1.0 - math.exp(-duration / (t2_us * 1e3)))


# ── Channels and single trajectories ─────────────────────────────────────────

def dephase(state: ChainState, site: int, duration: float, t2_us: float) -> ChainState:
    """Phase damping: the site's coherences shrink by exp(−duration/T2)."""
    p = flip_probability(duration, t2_us)
    if p == 0.0:
        return state
    kraus = [math.sqrt(1.0 - p) * np.eye(2), math.sqrt(p) * SZ]
    return apply_channel(state, kraus, [site])


def trajectory_dephase(state: ChainState, site: int, duration: float, t2_us: float,
                       rng: np.random.Generator) -> ChainState:
    """Stochastic unraveling of `dephase`: σ_z with probability p."""
    p = flip_probability(duration, t2_us)
    if p == 0.0 or rng.random() >= p:
        return state
    return apply_diagonal(state, _site_flip(state.n_sites, site))


def _site_flip(n_sites: int, site: int) -> np.ndarray:
    bits = (np.arange(1 << n_sites) >> site) & 1
    return (2 * bits - 1).astype(complex)


def draw_static_offsets(model: NoiseModel, pattern: Sequence[CellType],
                        rng: np.random.Generator) -> np.ndarray:
    """Independent Gaussian offsets (μeV) with σ = FWHM/2.3548 of the site's type."""
    sigmas = np.array([model.fwhm(cell) / FWHM_PER_SIGMA for cell in pattern])
    return sigmas * rng.standard_normal(len(pattern))


# ── Schedules ────────────────────────────────────────────────────────────────

@dataclass
class _Segment:
    kind: str                       # rule | free | drive | sample
    event: Optional[PulseEvent] = None
    rule: Optional[GateRule] = None
    duration: float = 0.0
    t0: float = 0.0
    sample: int = -1


def _build_schedule(program: PulseProgram, times: np.ndarray, level: str
                    ) -> List[_Segment]:
    segments: List[_Segment] = []
    pending = list(range(len(times)))

    def flush(upto: float):
        while pending and times[pending[0]] <= upto + 1e-12:
            segments.append(_Segment("sample", sample=pending.pop(0)))

    t = 0.0
    for event in program.events:
        if event.is_ideal:
            segments.append(_Segment("rule", event, event.ideal))
            continue
        flush(t)
        end = t + event.duration
        driven = event.microwave is not None and event.microwave.rabi_energy > 0
        if driven and level == "pulse":
            segments.append(_Segment("drive", event, t0=t))
            if pending and times[pending[0]] < end - 1e-12:
                logger.debug("Samples inside a driven event are taken at its end (%.4g ns)", end)
            t = end
            continue
        if driven or event.rule is not None:
            if event.oracle_rule is None:
                raise StateError(f"Event '{event.label}' has no oracle semantics")
            segments.append(_Segment("rule", event, event.oracle_rule))
        cursor = t
        while pending and times[pending[0]] < end - 1e-12:
            at = times[pending[0]]
            if at > cursor:
                segments.append(_Segment("free", event, duration=at - cursor))
                cursor = at
            flush(cursor)
        segments.append(_Segment("free", event, duration=end - cursor))
        t = end
    flush(math.inf)
    return segments


# ── Results ──────────────────────────────────────────────────────────────────

@dataclass
class EnsembleResult:
    """Per-observable mean and standard error at every sample time."""
    times: np.ndarray
    observables: List[str]
    mean: np.ndarray                    # (n_obs, n_times)
    stderr: np.ndarray
    site_z: np.ndarray                  # (n_times, N) mean ⟨σ_z⟩ per site
    site_z_stderr: np.ndarray
    pattern: Tuple[CellType, ...]
    n_molecules: int
    seed: int
    level: str = "pulse"
    final_density: Optional[np.ndarray] = None
    final_density_stderr: Optional[np.ndarray] = None

    def series(self, name: str) -> Tuple[np.ndarray, np.ndarray]:
        k = self.observables.index(name)
        return self.mean[k], self.stderr[k]

    def rows(self) -> List[dict]:
        out = []
        for it, t in enumerate(self.times):
            for k, name in enumerate(self.observables):
                out.append({"time_ns": float(t), "observable": name,
                            "mean": float(self.mean[k, it]), "stderr": float(self.stderr[k, it])})
        return out

    def summary(self) -> dict:
        return {
            "pattern": "".join(c.value for c in self.pattern),
            "n_molecules": self.n_molecules,
            "seed": self.seed,
            "level": self.level,
            "observables": list(self.observables),
            "final": {name: {"mean": float(self.mean[k, -1]), "stderr": float(self.stderr[k, -1])}
                      for k, name in enumerate(self.observables)} if len(self.times) else {},
        }


# ── Chunk worker ─────────────────────────────────────────────────────────────

@dataclass
class _Context:
    spec: DeviceSpec
    model: NoiseModel
    segments: List[_Segment]
    observables: List[Observable]
    initial: ChainState
    level: str
    dt: Optional[float]
    n_samples: int
    want_density: bool
    spins: np.ndarray = None
    obs_actions: List[Tuple[int, np.ndarray]] = None
    t2_sites: np.ndarray = None
    n_free: int = 0

    def __post_init__(self):
        n = self.spec.n_sites
        self.spins = z_spins(n)
        self.obs_actions = [_pauli_action(o.labels) for o in self.observables]
        self.t2_sites = np.array([self.model.t2(c) for c in self.spec.pattern])
        self.n_free = sum(1 for s in self.segments if s.kind == "free")


def _measure(ctx: _Context, psi: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """psi: (dim, m) → observable values (n_obs, m) and site ⟨σ_z⟩ (N, m)."""
    idx = np.arange(psi.shape[0])
    values = np.empty((len(ctx.obs_actions), psi.shape[1]))
    for k, (mask, phase) in enumerate(ctx.obs_actions):
        values[k] = np.real(np.sum(np.conj(psi[idx ^ mask]) * phase[:, None] * psi, axis=0))
    probs = np.abs(psi) ** 2
    return values, ctx.spins.T @ probs


def _apply_flips(ctx: _Context, psi: np.ndarray, duration: float, uniforms: np.ndarray) -> np.ndarray:
    """uniforms: (m, N) draws; flip site k of molecule j when u < p_k."""
    for site, t2 in enumerate(ctx.t2_sites):
        p = flip_probability(duration, t2)
        if p == 0.0:
            continue
        hit = uniforms[:, site] < p
        if hit.any():
            flip = _site_flip(ctx.spec.n_sites, site)
            psi[:, hit] = psi[:, hit] * flip[:, None]
    return psi


def _free_phases(ctx: _Context, seg: _Segment, offsets: np.ndarray) -> np.ndarray:
    """(dim, m) logical-frame phases of a microwave-free interval."""
    energies = np.zeros((ctx.spins.shape[0], offsets.shape[0]))
    energies += frame_hamiltonian(ctx.spec, seg.event.lasers).ising_diagonal()[:, None]
    if seg.event.lasers.effective_C > 0:
        energies += 0.5 * ctx.spins @ offsets.T
    return np.exp(-1j * energies * seg.duration / HBAR_UEV_NS)


def _propagate(ctx: _Context, psi: np.ndarray, batches, h: float,
               draws: Optional[np.ndarray]) -> np.ndarray:
    """Step `psi` (dim, m) through streamed propagator batches, flipping after each step."""
    step = 0
    for stack in batches:
        for unitary in stack:
            psi = unitary @ psi
            if draws is not None:
                psi = _apply_flips(ctx, psi, h, draws[step])
            step += 1
    return psi


def _drive(ctx: _Context, seg: _Segment, psi: np.ndarray, offsets: np.ndarray,
           flip_rngs: Sequence[np.random.Generator]) -> np.ndarray:
    event = seg.event
    n_steps = step_count(event, ctx.spec, ctx.dt)
    h = event.duration / n_steps
    draws = None
    if np.isfinite(ctx.t2_sites).any():
        # (n_steps, m, N)
        draws = np.stack([rng.random((n_steps, ctx.spec.n_sites)) for rng in flip_rngs], axis=1)
    if not np.any(offsets) or event.lasers.effective_C <= 0:
        batches = step_propagators(event, ctx.spec, ctx.dt, None, seg.t0)
        psi = _propagate(ctx, psi, batches, h, draws)
    else:
        for j in range(psi.shape[1]):
            batches = step_propagators(event, ctx.spec, ctx.dt, offsets[j], seg.t0)
            column = None if draws is None else draws[:, j:j + 1]
            psi[:, j:j + 1] = _propagate(ctx, psi[:, j:j + 1], batches, h, column)
    return frame_phases(event, ctx.spec)[:, None] * psi


def _run_chunk(ctx: _Context, start: int, stop: int) -> dict:
    m = stop - start
    n = ctx.spec.n_sites
    offset_rngs, flip_rngs = zip(*(molecule_rngs(ctx.model.rng_seed, i) for i in range(start, stop)))
    offsets = np.stack([draw_static_offsets(ctx.model, ctx.spec.pattern, rng) for rng in offset_rngs])
    uniforms = np.stack([rng.random((max(ctx.n_free, 1), n)) for rng in flip_rngs])

    psi = np.repeat(ctx.initial.data[:, None], m, axis=1).astype(complex)
    sums = np.zeros((len(ctx.observables), ctx.n_samples))
    squares = np.zeros_like(sums)
    z_sums = np.zeros((ctx.n_samples, n))
    z_squares = np.zeros_like(z_sums)
    free_index = 0
    for seg in ctx.segments:
        if seg.kind == "rule":
            psi = apply_rule(ChainState(ctx.spec.pattern, psi), seg.rule, ctx.spec.boundary).data
        elif seg.kind == "free":
            psi = psi * _free_phases(ctx, seg, offsets)
            psi = _apply_flips(ctx, psi, seg.duration, uniforms[:, free_index])
            free_index += 1
        elif seg.kind == "drive":
            psi = _drive(ctx, seg, psi, offsets, list(flip_rngs))
        else:
            values, z = _measure(ctx, psi)
            sums[:, seg.sample] = values.sum(axis=1)
            squares[:, seg.sample] = (values ** 2).sum(axis=1)
            z_sums[seg.sample] = z.sum(axis=1)
            z_squares[seg.sample] = (z ** 2).sum(axis=1)
    out = {"sums": sums, "squares": squares, "z_sums": z_sums, "z_squares": z_squares}
    if ctx.want_density:
        outer = np.einsum("aj,bj->jab", psi, psi.conj())
        out["rho"] = outer.sum(axis=0)
        out["rho_re2"] = (outer.real ** 2).sum(axis=0)
        out["rho_im2"] = (outer.imag ** 2).sum(axis=0)
    return out


def chunk_size_for(n_sites: int) -> int:
    """Molecules per chunk; depends on the chain size only."""
    per_molecule = (1 << n_sites) * 16 * 8
    return int(max(1, min(MAX_CHUNK, CHUNK_MEMORY_BUDGET // per_molecule)))


def _stderr(total: np.ndarray, squares: np.ndarray, n: int) -> np.ndarray:
    if n < 2:
        return np.zeros_like(total)
    mean = total / n
    var = np.maximum(squares / n - mean ** 2, 0.0) * n / (n - 1)
    return np.sqrt(var / n)


# ── Ensemble runs ────────────────────────────────────────────────────────────

def run_ensemble(spec: DeviceSpec, model: NoiseModel, program: PulseProgram, n_molecules: int,
                 observables: Sequence, sample_times: Optional[Sequence[float]] = None,
                 initial: Optional[ChainState] = None, level: str = "pulse",
                 dt: Optional[float] = None, workers: int = 1,
                 progress_cb: ProgressCallback = None, final_density: bool = False
                 ) -> EnsembleResult:
    """Average observables over `n_molecules` independently noisy molecules.

    Sample times default to the end of the program. Samples taken at an
    instant follow every instantaneous event at that instant.
    """
    if level not in LEVELS:
        raise ConfigError(f"Unknown simulation level '{level}' (expected pulse or oracle)")
    if n_molecules < 1:
        raise ConfigError("The ensemble needs at least one molecule")
    if program.pattern and program.pattern != spec.pattern_string:
        raise StateError(f"Program was built for {program.pattern}, device is {spec.pattern_string}")
    n = spec.n_sites
    initial = initial if initial is not None else new_chain(spec.pattern, "0" * n)
    if initial.density:
        raise StateError("Ensemble trajectories start from a pure state")
    obs = [o if isinstance(o, Observable) else Observable.parse(str(o), n) for o in observables]

    total = program.total_duration
    if sample_times is None:
        times = np.array([total])
    else:
        times = np.array(sorted(float(t) for t in sample_times))
        if len(times) and times[0] < 0:
            raise ConfigError("Sample times must be non-negative")
        if len(times) and times[-1] > total + 1e-12:
            logger.warning("Sample times beyond the program end (%.4g ns) are clamped", total)
            times = np.minimum(times, total)
    segments = _build_schedule(program, times, level)
    ctx = _Context(spec, model, segments, obs, initial, level, dt, len(times), final_density)

    size = chunk_size_for(n)
    bounds = [(s, min(s + size, n_molecules)) for s in range(0, n_molecules, size)]
    results: List[Optional[dict]] = [None] * len(bounds)
    started = time.perf_counter()

    def emit(done: int):
        if not progress_cb:
            return
        elapsed = time.perf_counter() - started
        remaining = elapsed / max(done, 1) * (len(bounds) - done)
        progress_cb(f"{n_molecules} molecules", done, len(bounds), elapsed, remaining)

    emit(0)
    with ThreadPoolExecutor(max_workers=max(1, workers), thread_name_prefix="DonorQCAChunk") as pool:
        futures = [pool.submit(_run_chunk, ctx, a, b) for a, b in bounds]
        for k, future in enumerate(futures):
            results[k] = future.result()
            logger.debug("Chunk %d/%d done", k + 1, len(bounds))
            emit(k + 1)

    sums = np.zeros((len(obs), len(times)))
    squares = np.zeros_like(sums)
    z_sums = np.zeros((len(times), n))
    z_squares = np.zeros_like(z_sums)
    rho = rho_re2 = rho_im2 = None
    for part in results:
        sums += part["sums"]
        squares += part["squares"]
        z_sums += part["z_sums"]
        z_squares += part["z_squares"]
        if final_density:
            rho = part["rho"] if rho is None else rho + part["rho"]
            rho_re2 = part["rho_re2"] if rho_re2 is None else rho_re2 + part["rho_re2"]
            rho_im2 = part["rho_im2"] if rho_im2 is None else rho_im2 + part["rho_im2"]

    result = EnsembleResult(
        times=times,
        observables=[o.name for o in obs],
        mean=sums / n_molecules,
        stderr=_stderr(sums, squares, n_molecules),
        site_z=z_sums / n_molecules,
        site_z_stderr=_stderr(z_sums, z_squares, n_molecules),
        pattern=spec.pattern,
        n_molecules=n_molecules,
        seed=model.rng_seed,
        level=level,
    )
    if final_density:
        result.final_density = rho / n_molecules
        result.final_density_stderr = (_stderr(rho.real, rho_re2, n_molecules)
                                       + 1j * _stderr(rho.imag, rho_im2, n_molecules))
    return result


def evolve_with_dephasing(state: ChainState, program: PulseProgram, spec: DeviceSpec,
                          model: NoiseModel, offsets: Optional[Sequence[float]] = None,
                          level: str = "pulse", dt: Optional[float] = None) -> ChainState:
    """Exact density-matrix counterpart of one trajectory-averaged molecule."""
    rho = state.to_density() if not state.density else state
    n = spec.n_sites
    offsets = np.zeros(n) if offsets is None else np.asarray(offsets, dtype=float)
    t2_sites = [model.t2(c) for c in spec.pattern]
    segments = _build_schedule(program, np.array([]), level)
    spins = z_spins(n)
    for seg in segments:
        if seg.kind == "rule":
            rho = apply_rule(rho, seg.rule, spec.boundary)
        elif seg.kind == "free":
            energies = frame_hamiltonian(spec, seg.event.lasers).ising_diagonal()
            if seg.event.lasers.effective_C > 0:
                energies += 0.5 * spins @ offsets
            rho = apply_diagonal(rho, np.exp(-1j * energies * seg.duration / HBAR_UEV_NS))
            for site, t2 in enumerate(t2_sites):
                rho = dephase(rho, site, seg.duration, t2)
        elif seg.kind == "drive":
            h = seg.event.duration / step_count(seg.event, spec, dt)
            batches = step_propagators(seg.event, spec, dt, offsets, seg.t0)
            for batch in batches:
                for unitary in batch:
                    rho = rho.with_data(unitary @ rho.data @ unitary.conj().T)
                    for site, t2 in enumerate(t2_sites):
                        rho = dephase(rho, site, h, t2)
            rho = apply_diagonal(rho, frame_phases(seg.event, spec))
    return rho
