"""
Demo: Ramsey decay of the A cells.
Ideal π/2 about y, free evolution with only the spin-splitting laser on,
⟨σ_x⟩ of the first A cell sampled along the way.
"""

from __future__ import annotations

import math

import numpy as np

from device_params import DeviceSpec
from models import ANY, CellType, GateRule, LaserSettings, PulseEvent
from programs import MAX_EVENT_DURATION, PulseProgram

name = "ramsey"
display_name = "Ramsey Decay"
description = "π/2 – wait – measure ⟨σ_x⟩ on the A cells (fit gives T2)"
device = "reference"

DEFAULT_SPAN_NS = 10_000.0
DEFAULT_SAMPLES = 41


def build(spec: DeviceSpec, span_ns: float = DEFAULT_SPAN_NS,
          samples: int = DEFAULT_SAMPLES) -> PulseProgram:
    site = spec.pattern.index(CellType.A)
    program = PulseProgram(name=display_name, pattern=spec.pattern_string,
                           comments=description)
    program.events.append(PulseEvent(0.0, ideal=GateRule(CellType.A, ANY, ANY, math.pi / 2, math.pi / 2),
                                     label="π/2 y"))
    waiting = LaserSettings(spec.lasers.rabi_C, 0.0, c_on=True, l_on=False)
    n_waits = max(1, math.ceil(span_ns / MAX_EVENT_DURATION))
    for k in range(n_waits):
        program.events.append(PulseEvent(span_ns / n_waits, waiting, label=f"wait {k + 1}"))
    program.metadata["sample_times"] = np.linspace(0.0, span_ns, samples).tolist()
    program.metadata["observables"] = [f"X{site}", f"Y{site}"]
    program.metadata["fit"] = f"X{site}"
    return program
