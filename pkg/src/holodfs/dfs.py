"""Collective-dephasing decoherence-free code and its tensor powers.

Each encoded qubit lives in a block of four physical qubits, with exactly one
excitation per block::

    |0>_L = |0001>   |1>_L = |0010>   |a1> = |1000>   |a2> = |0100>

Collective dephasing is modelled as a classical ensemble of collective phase
kicks exp(-i*lam*Z), Z = sum_i Z_i.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .qops import collective_z_diagonal

BLOCK = 4
BLOCK_LABELS: tuple[tuple[str, int], ...] = (
    ("0L", 0b0001),
    ("1L", 0b0010),
    ("a1", 0b1000),
    ("a2", 0b0100),
)
MAX_LOGICAL = 3
DEFAULT_SAMPLES = 4096
DEFAULT_SEED = 0x5EED
NORM_TOL = 1e-9

Subspace = Literal["logical", "logical+ancilla", "dfs"]


@dataclass(frozen=True)
class CodeBasis:
    """Labelled embedding of the code into ``4 * n_logical`` physical qubits."""

    n_logical: int
    labels: tuple[tuple[str, int], ...] = BLOCK_LABELS
    logical_indices: tuple[int, ...] = field(init=False)
    working_indices: tuple[int, ...] = field(init=False)

    def __post_init__(self):
        if not 1 <= self.n_logical <= MAX_LOGICAL:
            raise ValueError(f"n_logical must be in 1..{MAX_LOGICAL}, got {self.n_logical}")
        local = dict(self.labels)
        logical = [
            self.index_of(*("1L" if bit else "0L" for bit in bits))
            for bits in itertools.product((0, 1), repeat=self.n_logical)
        ]
        working = sorted(
            self._join(combo) for combo in itertools.product(local.values(), repeat=self.n_logical)
        )
        object.__setattr__(self, "logical_indices", tuple(logical))
        object.__setattr__(self, "working_indices", tuple(working))

    @property
    def n_physical(self) -> int:
        return BLOCK * self.n_logical

    @property
    def dim(self) -> int:
        return 1 << self.n_physical

    @staticmethod
    def _join(local_indices) -> int:
        # block b (0-based) holds qubits 4b+1..4b+4, i.e. bits 4b..4b+3
        return sum(idx << (BLOCK * b) for b, idx in enumerate(local_indices))

    def index_of(self, *labels: str) -> int:
        """Basis index of a product of block labels, block 1 first."""
        if len(labels) != self.n_logical:
            raise ValueError(f"need {self.n_logical} block labels, got {len(labels)}")
        local = dict(self.labels)
        try:
            return self._join(local[lab] for lab in labels)
        except KeyError as exc:
            raise ValueError(f"unknown block label {exc.args[0]!r}") from None

    def state(self, *labels: str) -> np.ndarray:
        v = np.zeros(self.dim, dtype=complex)
        v[self.index_of(*labels)] = 1.0
        return v

    def logical_matrix(self) -> np.ndarray:
        """Columns are the logical basis states, |0...0>_L first, binary ascending."""
        out = np.zeros((self.dim, len(self.logical_indices)), dtype=complex)
        out[list(self.logical_indices), np.arange(len(self.logical_indices))] = 1.0
        return out

    def mask(self, subspace: Subspace = "logical") -> np.ndarray:
        """Boolean mask of basis states spanning ``subspace``; all three are diagonal."""
        m = np.zeros(self.dim, dtype=bool)
        if subspace == "logical":
            m[list(self.logical_indices)] = True
        elif subspace == "logical+ancilla":
            m[list(self.working_indices)] = True
        elif subspace == "dfs":
            # full collective-Z eigenspace, not just the product code
            m = collective_z_diagonal(self.n_physical) == 2 * self.n_logical
        else:
            raise ValueError(f"unknown subspace {subspace!r}")
        return m

    def projector(self, subspace: Subspace = "logical") -> np.ndarray:
        return np.diag(self.mask(subspace).astype(complex))

    @property
    def code_projector(self) -> np.ndarray:
        return self.projector("logical")


def build_code(n_logical: int) -> CodeBasis:
    return CodeBasis(n_logical)


@dataclass(frozen=True)
class DephasingEnsemble:
    """Random collective phases lam ~ U[low, high) drawn from a seeded generator."""

    sample_count: int = DEFAULT_SAMPLES
    seed: int = DEFAULT_SEED
    low: float = 0.0
    high: float = 2 * np.pi

    def __post_init__(self):
        if self.sample_count < 1:
            raise ValueError("sample_count must be at least 1")
        if not (np.isfinite(self.low) and np.isfinite(self.high) and self.high > self.low):
            raise ValueError("angle range must be finite and non-empty")

    def angles(self) -> np.ndarray:
        rng = np.random.default_rng(self.seed)
        return rng.uniform(self.low, self.high, size=self.sample_count)


def _check_normalized(state: np.ndarray) -> None:
    nrm = np.linalg.norm(state)
    if abs(nrm - 1.0) > NORM_TOL:
        raise ValueError(f"state is not normalized (norm {nrm:.3e})")


def dephase(state: np.ndarray, ensemble: DephasingEnsemble | None = None) -> float:
    """Ensemble-averaged survival fidelity E|<psi|exp(-i lam Z)|psi>|^2."""
    ensemble = ensemble or DephasingEnsemble()
    state = np.asarray(state, dtype=complex)
    _check_normalized(state)
    n = int(state.size).bit_length() - 1
    z = collective_z_diagonal(n)
    pops = np.abs(state) ** 2
    support = pops > 0
    lam = ensemble.angles()
    # <psi|e^{-i lam Z}|psi> = sum_i |psi_i|^2 e^{-i lam z_i}
    amp = np.exp(-1j * np.outer(lam, z[support])) @ pops[support]
    return float(np.mean(np.abs(amp) ** 2))


def leakage(state: np.ndarray, code: CodeBasis, subspace: Subspace = "logical") -> float:
    """Population outside ``subspace``: 1 - ||P psi||^2."""
    state = np.asarray(state, dtype=complex)
    _check_normalized(state)
    inside = float(np.sum(np.abs(state[code.mask(subspace)]) ** 2))
    return min(1.0, max(0.0, 1.0 - inside))
