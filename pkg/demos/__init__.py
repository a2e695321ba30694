"""
DonorQCA — Canned demonstration programs.

Each demo module exposes:
    name: str           — internal identifier (used by `demo <name>`)
    display_name: str   — human-readable name
    description: str    — what the program shows
    device: str         — preset the demo is written for
    build(spec) -> PulseProgram

Program metadata may carry "sample_times", "observables", "initial_bits"
and "load" ({"site", "theta", "phi"}); the runner honours all four.
"""

from __future__ import annotations

from typing import Any, List

from demos import ca_step, hahn_echo, ramsey, shift_and_read

ALL_DEMOS: List[Any] = [
    ramsey,
    hahn_echo,
    ca_step,
    shift_and_read,
]


def get_demo_names() -> List[str]:
    """Return list of all demo internal names."""
    return [d.name for d in ALL_DEMOS]


def get_demo(name: str):
    for demo in ALL_DEMOS:
        if demo.name == name:
            return demo
    return None
