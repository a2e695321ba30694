"""
DonorQCA — Idealised semantics of globally applied conditional rotations.

A rule rotates every cell of its target type whose neighbors match the
rule's conditions. Conditions are read from the input before any cell is
rotated, so the per-site factors commute and the rule is one unitary.
This module is the reference the pulse engine is checked against; it favors
transparent construction over speed.
"""

from __future__ import annotations

import logging
import math
from typing import Iterable, List, Sequence

import numpy as np

from models import ANY, BoundaryPolicy, CellType, GateRule, StateError
from qca_core import ID2, SX, SY, ChainState, basis_index, basis_string, parse_pattern

logger = logging.getLogger(__name__)


def rotation(theta: float, phi: float) -> np.ndarray:
    """R(θ, φ) = exp(−iθ/2 (cos φ σ_x + sin φ σ_y))."""
    axis = math.cos(phi) * SX + math.sin(phi) * SY
    return math.cos(theta / 2) * ID2 - 1j * math.sin(theta / 2) * axis


def rz(alpha: float) -> np.ndarray:
    """exp(−iα/2 σ_z) with σ_z = diag(−1, +1)."""
    return np.diag([np.exp(0.5j * alpha), np.exp(-0.5j * alpha)])


def rule_matrix(rule: GateRule) -> np.ndarray:
    if rule.is_z:
        return rz(rule.z_angle)
    return rotation(rule.theta, rule.axis_phase)


def target_sites(pattern: Sequence[CellType], rule: GateRule) -> List[int]:
    return [k for k, cell in enumerate(pattern) if cell == rule.target]


def expand_any(rule: GateRule) -> List[GateRule]:
    """Split "any" conditions into specific ones, ordered left ascending then right."""
    lefts = (0, 1) if rule.left_cond is ANY else (rule.left_cond,)
    rights = (0, 1) if rule.right_cond is ANY else (rule.right_cond,)
    return [rule.with_conditions(u, v) for u in lefts for v in rights]


def _neighbor_bits(indices: np.ndarray, site: int, n: int,
                   boundary: BoundaryPolicy):
    if site > 0:
        left = (indices >> (site - 1)) & 1
    else:
        left = np.full(indices.shape, boundary.left_virtual)
    if site < n - 1:
        right = (indices >> (site + 1)) & 1
    else:
        right = np.full(indices.shape, boundary.right_virtual)
    return left, right


def match_mask(pattern: Sequence[CellType], rule: GateRule, site: int,
               boundary: BoundaryPolicy) -> np.ndarray:
    """Boolean vector over basis indices: does `site` see matching neighbors?"""
    n = len(pattern)
    indices = np.arange(1 << n)
    left, right = _neighbor_bits(indices, site, n, boundary)
    mask = np.ones(indices.shape, dtype=bool)
    if rule.left_cond is not ANY:
        mask &= left == rule.left_cond
    if rule.right_cond is not ANY:
        mask &= right == rule.right_cond
    return mask


def conditional_unitary(pattern, rule: GateRule,
                        boundary: BoundaryPolicy = BoundaryPolicy()) -> np.ndarray:
    """Full 2^N matrix Π_k [P_match ⊗ R_k + (1 − P_match) ⊗ I_k]."""
    cells = parse_pattern(pattern)
    n = len(cells)
    dim = 1 << n
    local = rule_matrix(rule)
    unitary = np.eye(dim, dtype=complex)
    cols = np.arange(dim)
    for site in target_sites(cells, rule):
        factor = np.eye(dim, dtype=complex)
        matched = cols[match_mask(cells, rule, site, boundary)]
        bit = 1 << site
        for col in matched:
            b = (col >> site) & 1
            base = col & ~bit
            factor[col, col] = 0.0
            factor[base, col] = local[0, b]
            factor[base | bit, col] = local[1, b]
        unitary = factor @ unitary
    return unitary


def _apply_factor(data: np.ndarray, local: np.ndarray, site: int,
                  matched: np.ndarray) -> np.ndarray:
    """Rotate bit `site` along axis 0 for the basis indices flagged in `matched`."""
    n_idx = data.shape[0]
    idx = np.arange(n_idx)
    bit = 1 << site
    low = idx[((idx & bit) == 0) & matched]
    high = low | bit
    out = data.copy()
    a0 = data[low]
    a1 = data[high]
    out[low] = local[0, 0] * a0 + local[0, 1] * a1
    out[high] = local[1, 0] * a0 + local[1, 1] * a1
    return out


def apply_rule(state: ChainState, rule: GateRule,
               boundary: BoundaryPolicy = BoundaryPolicy()) -> ChainState:
    """Apply one rule to a pure state or density matrix."""
    local = rule_matrix(rule)
    data = state.data
    sites = target_sites(state.pattern, rule)
    logger.debug("Applying %s to sites %s", rule.describe(), sites)
    for site in sites:
        matched = match_mask(state.pattern, rule, site, boundary)
        data = _apply_factor(data, local, site, matched)
        if state.density:
            data = _apply_factor(data.conj().T, local, site, matched).conj().T
    return state.with_data(data)


def apply_rules(state: ChainState, rules: Iterable[GateRule],
                boundary: BoundaryPolicy = BoundaryPolicy()) -> ChainState:
    for rule in rules:
        state = apply_rule(state, rule, boundary)
    return state


def classical_automaton_step(bits: str, pattern, rule: GateRule,
                             boundary: BoundaryPolicy = BoundaryPolicy()) -> str:
    """Synchronous classical update: flip every matched target bit."""
    cells = parse_pattern(pattern)
    if rule.is_z or not math.isclose(rule.theta % (2 * math.pi), math.pi):
        raise StateError("Classical automaton steps need a θ = π rule")
    if len(bits) != len(cells):
        raise StateError(f"Bit string has {len(bits)} bits for a {len(cells)}-cell pattern")
    index = basis_index(bits)
    out = index
    for site in target_sites(cells, rule):
        if match_mask(cells, rule, site, boundary)[index]:
            out ^= 1 << site
    return basis_string(out, len(cells))
