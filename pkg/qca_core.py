"""
DonorQCA — Typed donor chain and its quantum state.

Basis convention: site k is bit k of the basis index (little-endian), and bit
value 1 is spin up. The σ_z observable is diag(−1, +1), so a spin-down site
reads −1.

States are dense: a complex amplitude vector of length 2^N or a 2^N × 2^N
density matrix. Operations never mutate their input; they return new states.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from models import CellType, StateError

logger = logging.getLogger(__name__)

MAX_PURE_SITES = 12
MAX_DENSITY_SITES = 8

NORM_TOL = 1e-9
PSD_TOL = 1e-7

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[-1, 0], [0, 1]], dtype=complex)
ID2 = np.eye(2, dtype=complex)

PAULIS: Dict[str, np.ndarray] = {"I": ID2, "X": SX, "Y": SY, "Z": SZ}


# ── Patterns ─────────────────────────────────────────────────────────────────

def parse_pattern(pattern: Union[str, Sequence]) -> Tuple[CellType, ...]:
    """Validate a cell-type sequence such as "ABCABCD"."""
    if isinstance(pattern, str):
        items = [ch for ch in pattern.strip() if not ch.isspace()]
    else:
        items = list(pattern)
    if not items:
        raise StateError("Pattern must contain at least one cell")
    cells = tuple(CellType.parse(item) for item in items)
    d_sites = [k for k, c in enumerate(cells) if c is CellType.D]
    if len(d_sites) > 1:
        raise StateError("Pattern may contain at most one D cell")
    if d_sites and d_sites[0] != len(cells) - 1:
        raise StateError("The D cell must be the last cell of the pattern")
    for k in range(len(cells) - 1):
        if cells[k] == cells[k + 1]:
            raise StateError(f"Consecutive cells {k} and {k + 1} share type {cells[k].value}")
    return cells


def pattern_string(pattern: Sequence[CellType]) -> str:
    return "".join(c.value for c in pattern)


def basis_index(bits: str) -> int:
    """Basis index of a bit string whose k-th character is site k."""
    index = 0
    for site, ch in enumerate(bits):
        if ch not in "01":
            raise StateError(f"Invalid basis character '{ch}' (expected 0 or 1)")
        if ch == "1":
            index |= 1 << site
    return index


def basis_string(index: int, n_sites: int) -> str:
    return "".join("1" if (index >> site) & 1 else "0" for site in range(n_sites))


# ── State container ──────────────────────────────────────────────────────────

@dataclass
class ChainState:
    """Pure state (vector) or density matrix over a typed chain."""
    pattern: Tuple[CellType, ...]
    data: np.ndarray
    density: bool = False

    @property
    def n_sites(self) -> int:
        return len(self.pattern)

    @property
    def dim(self) -> int:
        return 1 << self.n_sites

    def copy(self) -> "ChainState":
        return ChainState(self.pattern, self.data.copy(), self.density)

    def with_data(self, data: np.ndarray) -> "ChainState":
        return ChainState(self.pattern, data, self.density)

    def to_density(self) -> "ChainState":
        if self.density:
            return self.copy()
        _check_size(self.n_sites, True)
        return ChainState(self.pattern, np.outer(self.data, self.data.conj()), True)

    def norm(self) -> float:
        if self.density:
            return float(np.real(np.trace(self.data)))
        return float(np.vdot(self.data, self.data).real)

    def validate(self) -> "ChainState":
        """Check the representation invariants and return self."""
        if self.density:
            rho = self.data
            if rho.shape != (self.dim, self.dim):
                raise StateError(f"Density matrix shape {rho.shape} does not match {self.n_sites} sites")
            if not np.allclose(rho, rho.conj().T, atol=NORM_TOL):
                raise StateError("Density matrix is not Hermitian")
            if abs(np.trace(rho).real - 1.0) > NORM_TOL:
                raise StateError(f"Density matrix trace {np.trace(rho).real:.12g} is not 1")
            if np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min() < -PSD_TOL:
                raise StateError("Density matrix is not positive semidefinite")
        else:
            if self.data.shape != (self.dim,):
                raise StateError(f"Amplitude vector shape {self.data.shape} does not match {self.n_sites} sites")
            if abs(self.norm() - 1.0) > NORM_TOL:
                raise StateError(f"State norm {self.norm():.12g} is not 1")
        return self

    def to_dict(self) -> dict:
        """JSON-friendly dump: complex entries as [re, im] pairs."""
        flat = self.data.reshape(-1)
        return {
            "pattern": pattern_string(self.pattern),
            "density": self.density,
            "data": [[float(z.real), float(z.imag)] for z in flat],
        }

    @classmethod
    def from_dict(cls, payload: Mapping) -> "ChainState":
        pattern = parse_pattern(payload.get("pattern", ""))
        density = bool(payload.get("density", False))
        values = np.array([complex(re, im) for re, im in payload.get("data", [])])
        dim = 1 << len(pattern)
        data = values.reshape(dim, dim) if density else values
        return cls(pattern, data, density).validate()


def _check_size(n_sites: int, density: bool):
    cap = MAX_DENSITY_SITES if density else MAX_PURE_SITES
    if n_sites > cap:
        kind = "density-matrix" if density else "pure-state"
        raise StateError(f"{n_sites} sites exceeds the {kind} cap of {cap}")


def new_chain(pattern, bits: str, density: bool = False) -> ChainState:
    """Computational basis state |bits⟩ over `pattern`."""
    cells = parse_pattern(pattern)
    if len(bits) != len(cells):
        raise StateError(f"Basis string has {len(bits)} bits for a {len(cells)}-cell pattern")
    _check_size(len(cells), density)
    dim = 1 << len(cells)
    index = basis_index(bits)
    if density:
        data = np.zeros((dim, dim), dtype=complex)
        data[index, index] = 1.0
    else:
        data = np.zeros(dim, dtype=complex)
        data[index] = 1.0
    return ChainState(cells, data, density)


def from_amplitudes(pattern, amplitudes: Sequence[complex]) -> ChainState:
    cells = parse_pattern(pattern)
    _check_size(len(cells), False)
    return ChainState(cells, np.asarray(amplitudes, dtype=complex).copy()).validate()


def from_density(pattern, rho) -> ChainState:
    cells = parse_pattern(pattern)
    _check_size(len(cells), True)
    return ChainState(cells, np.asarray(rho, dtype=complex).copy(), True).validate()


# ── Observables ──────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class Observable:
    """Tensor product of site-local Paulis; labels[k] acts on site k."""
    labels: Tuple[str, ...]

    def __post_init__(self):
        labels = tuple(str(lab).upper() for lab in self.labels)
        for lab in labels:
            if lab not in PAULIS:
                raise StateError(f"Unknown Pauli label '{lab}'")
        object.__setattr__(self, "labels", labels)

    @classmethod
    def local(cls, n_sites: int, ops: Mapping[int, str]) -> "Observable":
        labels = ["I"] * n_sites
        for site, lab in ops.items():
            if not 0 <= site < n_sites:
                raise StateError(f"Site {site} outside chain of {n_sites}")
            labels[site] = lab
        return cls(tuple(labels))

    @classmethod
    def parse(cls, text: str, n_sites: int) -> "Observable":
        """Accept a full label string ("IZXI") or a compact form ("Z0", "X2Z3")."""
        text = text.strip().upper()
        if len(text) == n_sites and all(ch in PAULIS for ch in text):
            return cls(tuple(text))
        ops: Dict[int, str] = {}
        k = 0
        while k < len(text):
            lab = text[k]
            k += 1
            start = k
            while k < len(text) and text[k].isdigit():
                k += 1
            if lab not in PAULIS or start == k:
                raise StateError(f"Cannot parse observable '{text}'")
            ops[int(text[start:k])] = lab
        return cls.local(n_sites, ops)

    @property
    def name(self) -> str:
        parts = [f"{lab}{site}" for site, lab in enumerate(self.labels) if lab != "I"]
        return "".join(parts) or "I"

    def matrix(self) -> np.ndarray:
        out = np.array([[1.0 + 0j]])
        for lab in self.labels:
            out = np.kron(PAULIS[lab], out)
        return out


def _pauli_action(labels: Sequence[str]) -> Tuple[int, np.ndarray]:
    """O|b⟩ = phase[b]·|b ⊕ mask⟩ for a Pauli string."""
    n = len(labels)
    idx = np.arange(1 << n)
    mask = 0
    phase = np.ones(1 << n, dtype=complex)
    for site, lab in enumerate(labels):
        bit = (idx >> site) & 1
        if lab == "X":
            mask |= 1 << site
        elif lab == "Y":
            mask |= 1 << site
            phase = phase * np.where(bit == 1, -1j, 1j)
        elif lab == "Z":
            phase = phase * (2 * bit - 1)
    return mask, phase


def expect(state: ChainState, observable: Observable) -> float:
    """⟨O⟩ for a pure state or density matrix."""
    if len(observable.labels) != state.n_sites:
        raise StateError(f"Observable acts on {len(observable.labels)} sites, "
                         f"state has {state.n_sites}")
    mask, phase = _pauli_action(observable.labels)
    idx = np.arange(state.dim)
    if state.density:
        value = np.sum(phase * state.data[idx, idx ^ mask])
    else:
        psi = state.data
        value = np.sum(np.conj(psi[idx ^ mask]) * phase * psi)
    return float(value.real)


def site_z(state: ChainState, site: int) -> float:
    return expect(state, Observable.local(state.n_sites, {site: "Z"}))


def probabilities(state: ChainState) -> np.ndarray:
    if state.density:
        return np.clip(np.real(np.diag(state.data)), 0.0, None)
    return np.abs(state.data) ** 2


def reduced_site(state: ChainState, site: int) -> np.ndarray:
    """2×2 reduced density matrix of one site."""
    n = state.n_sites
    axis = n - 1 - site
    if state.density:
        tensor = state.data.reshape((2,) * (2 * n))
        letters = "abcdefghijklmnopqrstuvwxyz"
        rows = list(letters[:n])
        cols = list(rows)
        rows[axis] = "Y"
        cols[axis] = "Z"
        return np.einsum("".join(rows) + "".join(cols) + "->YZ", tensor)
    psi = np.moveaxis(state.data.reshape((2,) * n), axis, 0).reshape(2, -1)
    return psi @ psi.conj().T


# ── Operator application ─────────────────────────────────────────────────────

def _apply_local(tensor: np.ndarray, op: np.ndarray, support: Sequence[int],
                 n: int, offset: int) -> np.ndarray:
    """Contract a 2^m operator into the axes of `support` (axis n−1−s, shifted)."""
    m = len(support)
    op_t = op.reshape((2,) * (2 * m))
    axes = [offset + n - 1 - s for s in reversed(support)]
    out = np.tensordot(op_t, tensor, axes=(list(range(m, 2 * m)), axes))
    return np.moveaxis(out, list(range(m)), axes)


def _check_support(state: ChainState, op: np.ndarray, support: Sequence[int]) -> List[int]:
    support = [int(s) for s in support]
    if len(set(support)) != len(support):
        raise StateError(f"Repeated sites in support {support}")
    for s in support:
        if not 0 <= s < state.n_sites:
            raise StateError(f"Site {s} outside chain of {state.n_sites}")
    size = 1 << len(support)
    if op.shape != (size, size):
        raise StateError(f"Operator shape {op.shape} does not match support of {len(support)} sites")
    return support


def is_unitary(op: np.ndarray, tol: float = NORM_TOL) -> bool:
    return np.allclose(op.conj().T @ op, np.eye(op.shape[0]), atol=tol)


def apply_unitary(state: ChainState, op, support: Optional[Sequence[int]] = None,
                  check: bool = True) -> ChainState:
    """Apply U on `support` (U's bit j acts on support[j]); whole chain if omitted."""
    op = np.asarray(op, dtype=complex)
    n = state.n_sites
    if support is None:
        support = list(range(n))
    support = _check_support(state, op, support)
    if check and not is_unitary(op):
        raise StateError("Operator is not unitary")
    if state.density:
        tensor = state.data.reshape((2,) * (2 * n))
        tensor = _apply_local(tensor, op, support, n, 0)
        tensor = _apply_local(tensor, op.conj(), support, n, n)
        return state.with_data(tensor.reshape(state.dim, state.dim))
    tensor = _apply_local(state.data.reshape((2,) * n), op, support, n, 0)
    return state.with_data(tensor.reshape(state.dim))


def apply_channel(state: ChainState, kraus: Iterable, support: Optional[Sequence[int]] = None,
                  check: bool = True) -> ChainState:
    """ρ → Σ K ρ K† with the Kraus operators acting on `support`."""
    if not state.density:
        raise StateError("Channels act on density matrices")
    ops = [np.asarray(k, dtype=complex) for k in kraus]
    if not ops:
        raise StateError("Empty Kraus set")
    n = state.n_sites
    if support is None:
        support = list(range(n))
    for k in ops:
        support = _check_support(state, k, support)
    if check:
        total = sum(k.conj().T @ k for k in ops)
        if not np.allclose(total, np.eye(total.shape[0]), atol=NORM_TOL):
            raise StateError("Kraus operators are not trace preserving")
    tensor = state.data.reshape((2,) * (2 * n))
    out = np.zeros_like(tensor)
    for k in ops:
        part = _apply_local(tensor, k, support, n, 0)
        out = out + _apply_local(part, k.conj(), support, n, n)
    return state.with_data(out.reshape(state.dim, state.dim))


def apply_diagonal(state: ChainState, phases: np.ndarray) -> ChainState:
    """Apply a diagonal unitary given by its full-length phase vector."""
    if state.density:
        return state.with_data(phases[:, None] * state.data * np.conj(phases)[None, :])
    return state.with_data(phases * state.data)


def site_unitary(n_sites: int, op: np.ndarray, site: int) -> np.ndarray:
    """Embed a single-site operator into the full 2^N space."""
    out = np.array([[1.0 + 0j]])
    for k in range(n_sites):
        out = np.kron(op if k == site else ID2, out)
    return out


def z_spins(n_sites: int) -> np.ndarray:
    """Array (2^N, N) of σ_z eigenvalues ±1 for every basis index."""
    idx = np.arange(1 << n_sites)
    bits = (idx[:, None] >> np.arange(n_sites)[None, :]) & 1
    return (2 * bits - 1).astype(float)
