"""
Demo: full operational cycle.
Load a qubit on cell 0, shift it onto D, expose ⟨σ_x⟩, ⟨σ_y⟩, ⟨σ_z⟩ of D.
"""

from __future__ import annotations

import math

from device_params import DeviceSpec
from programs import PrepareReadout, compile_op

name = "shift_and_read"
display_name = "Shift and Read"
description = "Qubit (θ=π/3, φ=π/4) on cell 0 moved to D"
device = "reference"

THETA = math.pi / 3
PHI = math.pi / 4


def build(spec: DeviceSpec, theta: float = THETA, phi: float = PHI):
    program = compile_op(PrepareReadout(0), spec)
    program.name = display_name
    program.comments = description
    d_site = spec.n_sites - 1
    program.metadata["load"] = {"site": 0, "theta": theta, "phi": phi}
    program.metadata["observables"] = [f"X{d_site}", f"Y{d_site}", f"Z{d_site}"]
    return program
