"""
DonorQCA — Execution engine for run / compare / tomo, with progress and output files.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np
from rich.console import Console
from rich.progress import BarColumn, Progress, TextColumn, TimeRemainingColumn
from scipy.optimize import curve_fit

import demos
from config import RunConfig, load_device, load_device_data, noise_from_dict, with_t2
from device_params import DeviceSpec
from models import (
    InfeasibleSelectivityError,
    ProgramFormatError,
    StateError,
    format_duration,
    format_sig,
    round_sig,
)
from noise_ensemble import EnsembleResult, NoiseModel, run_ensemble
from programs import PulseProgram, event_oracle_unitary, load_program, validate_program
from pulse_engine import evolve_logical, fidelity
from qca_core import ChainState, new_chain
from readout import TomographyResult, initialize_pumped, load_qubit, qubit_amplitudes, tomography_D

logger = logging.getLogger(__name__)

CSV_FIELDS = ["time_ns", "observable", "mean", "stderr"]
SIG_DIGITS = 12


# ── Setup ────────────────────────────────────────────────────────────────────

@dataclass
class RunSetup:
    spec: DeviceSpec
    noise: NoiseModel
    program: PulseProgram
    initial: ChainState


def resolve_program(source: Optional[str], spec: DeviceSpec) -> PulseProgram:
    """A demo name, a program file, or (None) the empty program."""
    if source is None:
        return PulseProgram(name="empty", pattern=spec.pattern_string)
    demo = demos.get_demo(source)
    if demo is not None:
        return demo.build(spec)
    if not Path(source).is_file():
        raise ProgramFormatError(f"'{source}' is neither a demo ({', '.join(demos.get_demo_names())}) "
                                 f"nor a program file")
    return load_program(source, spec)


def prepare_initial(spec: DeviceSpec, program: PulseProgram) -> ChainState:
    """Pumped chain, then the program's "initial_bits" and "load" metadata."""
    bits = program.metadata.get("initial_bits")
    state = new_chain(spec.pattern, str(bits)) if bits else initialize_pumped(spec.pattern)
    load = program.metadata.get("load")
    if load:
        amplitudes = qubit_amplitudes(float(load.get("theta", 0.0)), float(load.get("phi", 0.0)))
        state = load_qubit(state, int(load.get("site", 0)), amplitudes)
    return state


def check_program(program: PulseProgram, spec: DeviceSpec) -> None:
    """Raise on any validation violation; collisions are a selectivity error."""
    report = validate_program(program, spec)
    if report.passed:
        return
    collisions = [v for v in report.violations if "collision" in v or "missed" in v]
    if collisions:
        raise InfeasibleSelectivityError(f"{len(collisions)} selectivity problem(s) in "
                                         f"'{program.name}'", collisions)
    raise ProgramFormatError("; ".join(report.violations))


def load_setup(cfg: RunConfig) -> RunSetup:
    spec = load_device(cfg.device)
    noise = noise_from_dict(load_device_data(cfg.device).get("noise"), spec, cfg.seed)
    if cfg.t2_us is not None:
        noise = with_t2(noise, cfg.t2_us, spec)
    program = resolve_program(cfg.program, spec)
    check_program(program, spec)
    return RunSetup(spec, noise, program, prepare_initial(spec, program))


def observables_for(cfg: RunConfig, setup: RunSetup) -> List[str]:
    if cfg.observables:
        return list(cfg.observables)
    listed = setup.program.metadata.get("observables")
    if listed:
        return [str(o) for o in listed]
    return [f"Z{k}" for k in range(setup.spec.n_sites)]


# ── Progress ─────────────────────────────────────────────────────────────────

def _progress(console: Optional[Console]) -> Progress:
    return Progress(
        TextColumn("[bold blue]{task.description}"),
        BarColumn(bar_width=40),
        TextColumn("[progress.percentage]{task.percentage:>3.0f}%"),
        TextColumn("({task.completed}/{task.total})"),
        TimeRemainingColumn(),
        TextColumn("[dim]{task.fields[timing]}[/]"),
        console=console,
        disable=console is None,
    )


def _progress_callback(progress: Progress, task):
    def update(label: str, done: int, total: int, elapsed: float, remaining: float):
        timing = f"elapsed {format_duration(elapsed)} | ETA {format_duration(remaining)}"
        progress.update(task, description=label, completed=done, total=total, timing=timing)
    return update


# ── Output files ─────────────────────────────────────────────────────────────

def rounded(value):
    """Recursively round floats to SIG_DIGITS significant digits."""
    if isinstance(value, bool) or value is None:
        return value
    if isinstance(value, (float, np.floating)):
        return round_sig(float(value), SIG_DIGITS)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, dict):
        return {str(k): rounded(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [rounded(v) for v in value]
    return value


def write_json(path: Path, payload: dict) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(rounded(payload), f, indent=2, sort_keys=True)
        f.write("\n")
    return path


def write_csv(path: Path, result: EnsembleResult) -> Path:
    """Time series as CSV (time_ns, observable, mean, stderr)."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.DictWriter(f, fieldnames=CSV_FIELDS)
        writer.writeheader()
        for row in result.rows():
            writer.writerow({
                "time_ns": format_sig(row["time_ns"], SIG_DIGITS),
                "observable": row["observable"],
                "mean": format_sig(row["mean"], SIG_DIGITS),
                "stderr": format_sig(row["stderr"], SIG_DIGITS),
            })
    return path


def read_csv(path: Path) -> List[dict]:
    with open(path, "r", newline="", encoding="utf-8") as f:
        return [{"time_ns": float(r["time_ns"]), "observable": r["observable"],
                 "mean": float(r["mean"]), "stderr": float(r["stderr"])}
                for r in csv.DictReader(f)]


# ── Decay fit ────────────────────────────────────────────────────────────────

def _exp_decay(t, amplitude, t2):
    return amplitude * np.exp(-t / t2)


def fit_exponential_decay(times, values) -> Tuple[float, float]:
    """Least-squares amplitude·exp(−t/T2); returns (amplitude, T2 in the unit of `times`)."""
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if len(times) < 3:
        raise ValueError("Need at least three samples to fit a decay")
    guess_t2 = max(times[-1] - times[0], 1e-12)
    params, _ = curve_fit(_exp_decay, times, values, p0=(values[0] or 1.0, guess_t2),
                          bounds=([-np.inf, 1e-12], [np.inf, np.inf]), maxfev=10_000)
    return float(params[0]), float(params[1])


# ── run ──────────────────────────────────────────────────────────────────────

@dataclass
class RunOutcome:
    result: EnsembleResult
    summary: dict
    files: List[Path] = field(default_factory=list)
    duration_s: float = 0.0


def execute_run(cfg: RunConfig, console: Optional[Console] = None,
                setup: Optional[RunSetup] = None) -> RunOutcome:
    """Run the program over the ensemble and write the configured outputs."""
    setup = setup or load_setup(cfg)
    program = setup.program
    sample_times = program.metadata.get("sample_times")
    started = time.perf_counter()
    with _progress(console) as progress:
        task = progress.add_task("Ensemble...", total=1, timing="")
        result = run_ensemble(setup.spec, setup.noise, program, cfg.n_molecules,
                              observables_for(cfg, setup), sample_times=sample_times,
                              initial=setup.initial, level=cfg.level, dt=cfg.dt,
                              workers=cfg.workers,
                              progress_cb=_progress_callback(progress, task))
    duration = time.perf_counter() - started

    summary = result.summary()
    summary.update({
        "device": setup.spec.pattern_string,
        "program": program.name,
        "events": len(program.events),
        "duration_ns": program.total_duration,
        "dt_ns": cfg.dt,
    })
    target = program.metadata.get("fit")
    if target and target in result.observables and len(result.times) >= 3:
        mean, _ = result.series(target)
        try:
            amplitude, t2_ns = fit_exponential_decay(result.times, mean)
            summary["fit"] = {"observable": target, "amplitude": amplitude, "t2_us": t2_ns / 1e3}
        except (RuntimeError, ValueError) as exc:
            logger.warning("Decay fit of %s failed: %s", target, exc)

    files = []
    out = cfg.out_path
    if "csv" in cfg.formats:
        files.append(write_csv(out / "timeseries.csv", result))
    if "json" in cfg.formats:
        files.append(write_json(out / "summary.json", summary))
    logger.info("Run finished in %s", format_duration(duration))
    return RunOutcome(result, summary, files, duration)


# ── compare ──────────────────────────────────────────────────────────────────

@dataclass
class EventComparison:
    index: int
    label: str
    fidelity: float
    cumulative: float


@dataclass
class CompareReport:
    program: str
    events: List[EventComparison] = field(default_factory=list)

    @property
    def cumulative(self) -> float:
        return self.events[-1].cumulative if self.events else 1.0

    @property
    def worst_event(self) -> float:
        return min((e.fidelity for e in self.events), default=1.0)

    def to_dict(self) -> dict:
        return {
            "program": self.program,
            "cumulative_fidelity": self.cumulative,
            "worst_event_fidelity": self.worst_event,
            "events": [{"index": e.index, "label": e.label, "fidelity": e.fidelity,
                        "cumulative": e.cumulative} for e in self.events],
        }


def compare_program(spec: DeviceSpec, program: PulseProgram, initial: ChainState,
                    dt: Optional[float] = None, progress_cb=None) -> CompareReport:
    """Oracle and pulse tracks side by side from the same noiseless input.

    Per-event fidelity compares both semantics of one event applied to the
    current pulse-level state; cumulative fidelity compares the two tracks.
    """
    report = CompareReport(program.name)
    oracle = initial
    pulse = initial
    started = time.perf_counter()
    total = len(program.events)
    t = 0.0
    for k, event in enumerate(program.events):
        unitary = event_oracle_unitary(event, spec)
        if unitary is None:
            raise StateError(f"Event {k} ({event.label}) has no oracle semantics to compare with")
        expected = pulse.with_data(unitary @ pulse.data)
        pulse = evolve_logical(pulse, event, spec, dt, t0=t)
        oracle = oracle.with_data(unitary @ oracle.data)
        report.events.append(EventComparison(k, event.label, fidelity(expected, pulse),
                                             fidelity(oracle, pulse)))
        t += event.duration
        if progress_cb:
            elapsed = time.perf_counter() - started
            progress_cb(event.label or f"event {k}", k + 1, total, elapsed,
                        elapsed / (k + 1) * (total - k - 1))
    return report


def execute_compare(cfg: RunConfig, console: Optional[Console] = None,
                    setup: Optional[RunSetup] = None) -> Tuple[CompareReport, List[Path]]:
    setup = setup or load_setup(cfg)
    with _progress(console) as progress:
        task = progress.add_task("Comparing...", total=max(len(setup.program.events), 1), timing="")
        report = compare_program(setup.spec, setup.program, setup.initial, cfg.dt,
                                 _progress_callback(progress, task))
    files = []
    if "json" in cfg.formats:
        files.append(write_json(cfg.out_path / "compare.json", report.to_dict()))
    return report, files


# ── tomo ─────────────────────────────────────────────────────────────────────

def execute_tomo(cfg: RunConfig, console: Optional[Console] = None,
                 setup: Optional[RunSetup] = None) -> Tuple[TomographyResult, List[Path]]:
    setup = setup or load_setup(cfg)
    level = cfg.level
    with _progress(console) as progress:
        task = progress.add_task("Tomography...", total=1, timing="")
        result = tomography_D(setup.spec, setup.program, setup.noise, cfg.n_molecules,
                              initial=setup.initial, level=level, dt=cfg.dt,
                              workers=cfg.workers, progress_cb=_progress_callback(progress, task))
    files = []
    if "json" in cfg.formats:
        files.append(write_json(cfg.out_path / "tomography.json", result.to_dict()))
    return result, files


def summary_rows(summary: Dict) -> List[Tuple[str, str]]:
    """Flat (key, value) pairs for display."""
    rows = []
    for key in ("device", "program", "level", "n_molecules", "seed", "events", "duration_ns"):
        if key in summary:
            value = summary[key]
            rows.append((key, format_sig(value, 6) if isinstance(value, float) else str(value)))
    fit = summary.get("fit")
    if fit and math.isfinite(fit.get("t2_us", math.nan)):
        rows.append(("fitted T2", f"{fit['t2_us']:.4g} μs"))
    return rows
