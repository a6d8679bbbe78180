"""Logical gate targets, fidelity, and small algebra checks on the gate set."""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .qops import dag

GATE_NAMES = ("Z_rot", "X_rot", "CP")
_I2 = np.eye(2, dtype=complex)
_X2 = np.array([[0, 1], [1, 0]], dtype=complex)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


def target_gate(name: str, omega: float) -> np.ndarray:
    """Analytic logical gate for solid angle ``omega``.

    Z_rot -> diag(1, e^{-i w/2});  X_rot -> cos(w/4) I + i sin(w/4) X;
    CP -> diag(1, 1, 1, e^{i w/2}).
    """
    if name == "Z_rot":
        return np.diag([1.0, np.exp(-0.5j * omega)])
    if name == "X_rot":
        return np.cos(omega / 4) * _I2 + 1j * np.sin(omega / 4) * _X2
    if name == "CP":
        return np.diag([1.0, 1.0, 1.0, np.exp(0.5j * omega)])
    raise ValueError(f"unknown gate {name!r}; expected one of {GATE_NAMES}")


def canonical_phase(u: np.ndarray) -> np.ndarray:
    """Remove the global phase so the first non-negligible entry (row-major,
    diagonal first) is real and non-negative."""
    u = np.asarray(u, dtype=complex)
    flat = u.ravel()
    for pos in [0] + list(range(flat.size)):
        z = flat[pos]
        if abs(z) > 1e-12:
            out = u * (abs(z) / z)
            out.flat[pos] = abs(z)  # exactly real, no rounding residue
            return out
    return u.copy()


def gate_fidelity(measured: np.ndarray, target: np.ndarray) -> float:
    """|tr(target^dag measured)| / d; insensitive to either global phase."""
    measured, target = np.asarray(measured), np.asarray(target)
    if measured.shape != target.shape or measured.ndim != 2:
        raise ValueError(f"dimension mismatch: {measured.shape} vs {target.shape}")
    m, t = canonical_phase(measured), canonical_phase(target)
    return float(abs(np.trace(dag(t) @ m)) / m.shape[0])


def phase_error(measured: np.ndarray, target: np.ndarray) -> float:
    """Spread of the eigenphases of target^dag measured, modulo a global phase.

    For diag(1, e^{i d}) against the identity this is |d| (wrapped to [0, pi]).
    """
    w = np.linalg.eigvals(dag(np.asarray(target)) @ np.asarray(measured))
    ang = np.sort(np.mod(np.angle(w), 2 * np.pi))
    if ang.size < 2:
        return 0.0
    gaps = np.diff(np.concatenate([ang, [ang[0] + 2 * np.pi]]))
    return float(2 * np.pi - gaps.max())


def relative_phase(u: np.ndarray, row: int = -1) -> float:
    """arg(U[row,row] / U[0,0]) in (-pi, pi]."""
    return float(np.angle(u[row, row] / u[0, 0]))


@dataclass(frozen=True)
class LogicalGate:
    name: str
    matrix: np.ndarray
    omega: float
    fidelity: float = 1.0

    @classmethod
    def from_target(cls, name: str, omega: float) -> "LogicalGate":
        return cls(name, target_gate(name, omega), omega, 1.0)

    @classmethod
    def measured(cls, name: str, matrix: np.ndarray, omega: float) -> "LogicalGate":
        return cls(name, matrix, omega, gate_fidelity(matrix, target_gate(name, omega)))


def promote(u: np.ndarray, factor: int, n_qubits: int = 2) -> np.ndarray:
    """Embed a one-qubit logical gate on ``factor`` (1-based, 1 = most significant)."""
    if u.shape != (2, 2):
        raise ValueError("only one-qubit gates can be promoted")
    if not 1 <= factor <= n_qubits:
        raise ValueError(f"factor {factor} out of range 1..{n_qubits}")
    out = np.ones((1, 1), dtype=complex)
    for q in range(1, n_qubits + 1):
        out = np.kron(out, u if q == factor else _I2)
    return out


def compose(gates, factors=None) -> np.ndarray:
    """Product of ``gates`` in application order (first element acts first).

    ``factors`` gives, per gate, the logical qubit a 2x2 gate acts on when the
    sequence mixes one- and two-qubit gates.
    """
    mats = [g.matrix if isinstance(g, LogicalGate) else np.asarray(g, dtype=complex) for g in gates]
    if not mats:
        raise ValueError("nothing to compose")
    dim = max(m.shape[0] for m in mats)
    factors = list(factors) if factors is not None else [1] * len(mats)
    if len(factors) != len(mats):
        raise ValueError("one factor per gate required")
    out = np.eye(dim, dtype=complex)
    for m, f in zip(mats, factors):
        if m.shape[0] != dim:
            if m.shape != (2, 2) or dim & (dim - 1):
                raise ValueError(f"incompatible gate dimensions {m.shape} and {dim}")
            m = promote(m, f, dim.bit_length() - 1)
        out = m @ out
    return out


def schmidt_rank(state: np.ndarray, tol: float = 1e-10) -> int:
    """Schmidt rank of a two-qubit logical state (length 4)."""
    sv = np.linalg.svd(np.asarray(state).reshape(2, 2), compute_uv=False)
    return int(np.sum(sv > tol))


def closest_word(generators: dict[str, np.ndarray], target: np.ndarray, max_len: int = 6):
    """Brute-force the word over ``generators`` (and inverses) nearest ``target``.

    Distance is 1 - gate_fidelity, so global phase is ignored.  Returns
    ``(word, distance)``.
    """
    alphabet = dict(generators)
    alphabet.update({k + "^-1": dag(v) for k, v in generators.items()})
    best, best_d = (), 1.0 - gate_fidelity(np.eye(target.shape[0]), target)
    for length in range(1, max_len + 1):
        for word in itertools.product(alphabet, repeat=length):
            u = compose([alphabet[w] for w in word])
            d = 1.0 - gate_fidelity(u, target)
            if d < best_d - 1e-15:
                best, best_d = word, d
    return best, best_d
