"""Tests for run/compare/tomo execution and the output files."""

import dataclasses
import json
import math

import numpy as np
import pytest

from config import RunConfig, save_device
from demos import shift_and_read
from models import (
    CellType,
    GateRule,
    InfeasibleSelectivityError,
    LaserSettings,
    ProgramFormatError,
    format_duration,
    format_ns,
)
from noise_ensemble import NoiseModel
from programs import PulseProgram, compile_rule
from readout import BlochVector, qubit_amplitudes
from runner import (
    check_program,
    execute_compare,
    execute_run,
    execute_tomo,
    fit_exponential_decay,
    load_setup,
    read_csv,
    resolve_program,
    rounded,
    summary_rows,
)


@pytest.fixture
def noisy_device(tmp_path, reference_spec):
    path = tmp_path / "device.json"
    save_device(reference_spec, path, NoiseModel.from_device(reference_spec, t2_us=5.0))
    return str(path)


def test_run_writes_timeseries_and_summary(tmp_path):
    cfg = RunConfig(program="hahn_echo", level="oracle", n_molecules=50, out_dir=str(tmp_path))
    outcome = execute_run(cfg)
    assert [p.name for p in outcome.files] == ["timeseries.csv", "summary.json"]
    rows = read_csv(tmp_path / "timeseries.csv")
    assert len(rows) == 41
    assert {r["observable"] for r in rows} == {"X0"}
    assert rows[-1]["mean"] == pytest.approx(1.0)
    summary = json.loads((tmp_path / "summary.json").read_text(encoding="utf-8"))
    assert summary["program"] == "Hahn Echo"
    assert summary["n_molecules"] == 50
    assert summary["duration_ns"] == pytest.approx(4000.0)


def test_runs_are_reproducible(tmp_path, noisy_device):
    outputs = []
    for k, workers in enumerate((1, 2)):
        out = tmp_path / f"run{k}"
        cfg = RunConfig(device=noisy_device, program="ramsey", level="oracle", n_molecules=300,
                        seed=11, workers=workers, out_dir=str(out))
        execute_run(cfg)
        outputs.append(((out / "timeseries.csv").read_bytes(), (out / "summary.json").read_bytes()))
    assert outputs[0] == outputs[1]


def test_output_formats_are_selectable(tmp_path):
    cfg = RunConfig(program="hahn_echo", level="oracle", n_molecules=2, out_dir=str(tmp_path),
                    formats=("json",))
    outcome = execute_run(cfg)
    assert [p.name for p in outcome.files] == ["summary.json"]
    assert not (tmp_path / "timeseries.csv").exists()


@pytest.mark.slow
def test_ramsey_fit_recovers_t2(tmp_path):
    cfg = RunConfig(program="ramsey", level="oracle", n_molecules=20000, t2_us=5.0,
                    out_dir=str(tmp_path))
    summary = execute_run(cfg).summary
    assert summary["fit"]["observable"] == "X0"
    assert summary["fit"]["t2_us"] == pytest.approx(5.0, rel=0.05)
    assert ("fitted T2", f"{summary['fit']['t2_us']:.4g} μs") in summary_rows(summary)


def test_fit_exponential_decay():
    t = np.linspace(0.0, 10.0, 20)
    amplitude, t2 = fit_exponential_decay(t, 0.9 * np.exp(-t / 4.0))
    assert amplitude == pytest.approx(0.9, rel=1e-4)
    assert t2 == pytest.approx(4.0, rel=1e-4)
    with pytest.raises(ValueError):
        fit_exponential_decay([0.0, 1.0], [1.0, 0.5])


def test_resolve_program(reference_spec):
    assert resolve_program(None, reference_spec).events == []
    assert resolve_program("ramsey", reference_spec).name == "Ramsey Decay"
    with pytest.raises(ProgramFormatError):
        resolve_program("no_such_program", reference_spec)


def test_check_program_reports_collisions(selective_spec):
    program = compile_rule(GateRule(CellType.A, 0, 1), selective_spec)
    check_program(program, selective_spec)
    event = program.events[0]
    weak = dataclasses.replace(event, lasers=LaserSettings(event.lasers.rabi_C, 0.01))
    with pytest.raises(InfeasibleSelectivityError):
        check_program(PulseProgram([weak], pattern="ABCABC"), selective_spec)
    with pytest.raises(ProgramFormatError):
        check_program(PulseProgram(pattern="ABCABCD"), selective_spec)


def test_load_setup_applies_program_metadata():
    setup = load_setup(RunConfig(device="selective", program="ca_step"))
    assert setup.initial.data[2] == pytest.approx(1.0)
    assert setup.noise.is_noiseless


def test_rounded_outputs():
    assert rounded(0.1 + 0.2) == 0.3
    assert rounded({"a": (1.0000000000001, np.int64(3)), "b": None}) == {"a": [1.0, 3], "b": None}


def test_tomography_run(tmp_path):
    cfg = RunConfig(program="shift_and_read", level="oracle", n_molecules=5, out_dir=str(tmp_path))
    result, files = execute_tomo(cfg)
    target = BlochVector.from_amplitudes(qubit_amplitudes(shift_and_read.THETA, shift_and_read.PHI))
    assert result.bloch.fidelity(target) >= 0.999
    saved = json.loads(files[0].read_text(encoding="utf-8"))
    assert saved["n_molecules"] == 5
    assert len(saved["bloch"]) == 3


@pytest.mark.slow
def test_compare_selective_step(tmp_path):
    cfg = RunConfig(device="selective", program="ca_step", out_dir=str(tmp_path))
    report, files = execute_compare(cfg)
    assert len(report.events) == 2
    assert report.events[1].label.startswith("ising refocus")
    assert report.worst_event >= 0.99
    assert report.cumulative >= 0.99
    saved = json.loads(files[0].read_text(encoding="utf-8"))
    assert math.isclose(saved["cumulative_fidelity"], report.cumulative, rel_tol=1e-9)


def test_format_duration_spans_pulses_and_wall_time():
    assert format_ns(45.9) == "45.9 ns"
    assert format_ns(2500.0) == "2.5 μs"
    assert format_duration(0.5) == "500 ms"
    assert format_duration(12.0) == "12.0 s"
    assert format_duration(90) == "1m 30s"
    assert format_duration(7200) == "2h 00m"
    assert format_duration(0) == "0 s"
