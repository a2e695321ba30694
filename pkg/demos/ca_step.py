"""
Demo: one cellular-automaton step.
A flips iff its left neighbor C is 0 and its right neighbor B is 1,
as a selective π pulse on the 6-cell chain.
"""

from __future__ import annotations

from device_params import DeviceSpec
from models import CellType, GateRule
from programs import compile_rule

name = "ca_step"
display_name = "Conditional A Flip"
description = "Rule A[L=0, R=1] π on ABCABC from |010000⟩"
device = "selective"

RULE = GateRule(CellType.A, 0, 1)


def build(spec: DeviceSpec):
    program = compile_rule(RULE, spec)
    program.name = display_name
    program.comments = description
    program.metadata["initial_bits"] = "01" + "0" * (spec.n_sites - 2)
    program.metadata["observables"] = [f"Z{k}" for k in range(spec.n_sites)]
    return program
