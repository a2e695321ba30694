"""
Demo: Hahn echo on the A cells.
π/2 about y, wait τ, π about x, wait τ: static offsets refocus at 2τ,
only the Markovian T2 decay remains.
"""

from __future__ import annotations

import math

import numpy as np

from device_params import DeviceSpec
from models import ANY, CellType, GateRule, LaserSettings, PulseEvent
from programs import MAX_EVENT_DURATION, PulseProgram

name = "hahn_echo"
display_name = "Hahn Echo"
description = "π/2 – τ – π – τ on the A cells; ⟨σ_x⟩ returns at 2τ"
device = "reference"

DEFAULT_TAU_NS = 2_000.0
DEFAULT_SAMPLES = 41


def _wait(program: PulseProgram, tau: float, lasers: LaserSettings, tag: str):
    n_waits = max(1, math.ceil(tau / MAX_EVENT_DURATION))
    for k in range(n_waits):
        program.events.append(PulseEvent(tau / n_waits, lasers, label=f"{tag} {k + 1}"))


def build(spec: DeviceSpec, tau_ns: float = DEFAULT_TAU_NS,
          samples: int = DEFAULT_SAMPLES) -> PulseProgram:
    site = spec.pattern.index(CellType.A)
    program = PulseProgram(name=display_name, pattern=spec.pattern_string,
                           comments=description)
    waiting = LaserSettings(spec.lasers.rabi_C, 0.0, c_on=True, l_on=False)
    program.events.append(PulseEvent(0.0, ideal=GateRule(CellType.A, ANY, ANY, math.pi / 2, math.pi / 2),
                                     label="π/2 y"))
    _wait(program, tau_ns, waiting, "dephase")
    program.events.append(PulseEvent(0.0, ideal=GateRule(CellType.A, ANY, ANY, math.pi, 0.0),
                                     label="π x"))
    _wait(program, tau_ns, waiting, "rephase")
    program.metadata["sample_times"] = np.linspace(0.0, 2.0 * tau_ns, samples).tolist()
    program.metadata["observables"] = [f"X{site}"]
    return program
