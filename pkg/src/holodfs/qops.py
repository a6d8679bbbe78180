"""Dense operator algebra on n-qubit spaces.

Basis convention
----------------
Qubit ``l`` (1-based) is stored in bit ``l - 1`` of the computational-basis
index, so a ket string is written with qubit ``n`` leftmost and qubit 1
rightmost: ``ket("0010")`` is qubit 2 excited and has index 2.  ``|0>`` is the
+1 eigenstate of Z and ``|1>`` the -1 eigenstate.

States are 1-D complex arrays of length ``2**n``; operators are 2-D complex
arrays.  Every function here is pure.
"""
from __future__ import annotations

import numpy as np
import scipy.linalg

HERMITIAN_TOL = 1e-12
NULL_TOL = 1e-9

_AXES = ("x", "y", "z")


def _check_qubit(l: int, n: int) -> None:
    if n < 1:
        raise ValueError(f"qubit count must be positive, got {n}")
    if not 1 <= l <= n:
        raise IndexError(f"qubit index {l} out of range 1..{n}")


def _check_axis(axis: str) -> str:
    axis = axis.lower()
    if axis not in _AXES:
        raise ValueError(f"unknown axis {axis!r}; expected one of {_AXES}")
    return axis


def ket(bits: str) -> np.ndarray:
    """Computational basis state from a ket string such as ``"0010"``."""
    if not bits or set(bits) - {"0", "1"}:
        raise ValueError(f"bad ket string {bits!r}")
    return basis_state(int(bits, 2), len(bits))


def basis_state(index: int, n: int) -> np.ndarray:
    dim = 1 << n
    if not 0 <= index < dim:
        raise IndexError(f"basis index {index} out of range for {n} qubits")
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


def normalize(v: np.ndarray) -> np.ndarray:
    nrm = np.linalg.norm(v)
    if nrm == 0:
        raise ValueError("cannot normalize the zero vector")
    return np.asarray(v, dtype=complex) / nrm


def n_qubits_of(dim: int) -> int:
    n = int(dim).bit_length() - 1
    if n < 0 or (1 << n) != dim:
        raise ValueError(f"dimension {dim} is not a power of two")
    return n


def dag(a: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(a, -1, -2))


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def is_hermitian(a: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    a = np.asarray(a)
    return a.ndim == 2 and a.shape[0] == a.shape[1] and np.max(np.abs(a - dag(a)), initial=0.0) < tol


def pauli(axis: str, l: int, n: int) -> np.ndarray:
    """Single-qubit Pauli ``axis`` on qubit ``l`` of ``n``, identity elsewhere."""
    axis = _check_axis(axis)
    _check_qubit(l, n)
    dim = 1 << n
    idx = np.arange(dim)
    bit = (idx >> (l - 1)) & 1
    if axis == "z":
        return np.diag((1 - 2 * bit).astype(complex))
    out = np.zeros((dim, dim), dtype=complex)
    flipped = idx ^ (1 << (l - 1))
    if axis == "x":
        out[flipped, idx] = 1.0
    else:
        # Y|0> = i|1>, Y|1> = -i|0>
        out[flipped, idx] = np.where(bit == 0, 1j, -1j)
    return out


def r_op(axis: str, l: int, m: int, n: int) -> np.ndarray:
    """Two-qubit exchange-type operator R^axis_{lm}.

    On span{|1_l 0_m>, |0_l 1_m>} (in that order) the three operators act as
    the Pauli matrices; they vanish on |0_l 0_m> and |1_l 1_m>.
    """
    axis = _check_axis(axis)
    _check_qubit(l, n)
    _check_qubit(m, n)
    if l == m:
        raise ValueError("r_op needs two distinct qubits")
    if axis == "x":
        return 0.5 * (pauli("x", l, n) @ pauli("x", m, n) + pauli("y", l, n) @ pauli("y", m, n))
    if axis == "y":
        return 0.5 * (pauli("x", l, n) @ pauli("y", m, n) - pauli("y", l, n) @ pauli("x", m, n))
    return 0.5 * (pauli("z", m, n) - pauli("z", l, n))


def collective_z_diagonal(n: int) -> np.ndarray:
    """Eigenvalues of sum_i Z_i on each computational basis state."""
    if n < 1:
        raise ValueError(f"qubit count must be positive, got {n}")
    idx = np.arange(1 << n)
    ones = np.zeros_like(idx)
    for k in range(n):
        ones += (idx >> k) & 1
    return (n - 2 * ones).astype(float)


def collective_z(n: int) -> np.ndarray:
    return np.diag(collective_z_diagonal(n).astype(complex))


def expm_hermitian(h: np.ndarray, scale: complex) -> np.ndarray:
    """exp(scale * H) for Hermitian H (or a stack of them) via eigh."""
    w, v = np.linalg.eigh(h)
    return (v * np.exp(scale * w)[..., None, :]) @ dag(v)


def mat_exp(a: np.ndarray, scale: complex = 1.0) -> np.ndarray:
    """Matrix exponential exp(scale * A).

    Hermitian ``a`` goes through an eigendecomposition; anything else through
    scipy's scaling-and-squaring Pade routine.
    """
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"mat_exp needs a square matrix, got shape {a.shape}")
    if not (np.all(np.isfinite(a)) and np.isfinite(scale)):
        raise ValueError("mat_exp input has non-finite entries")
    if is_hermitian(a):
        return expm_hermitian(a, scale)
    return scipy.linalg.expm(scale * a)


def null_space(a: np.ndarray, tol: float = NULL_TOL) -> list[np.ndarray]:
    """Orthonormal basis of the eigenvectors of Hermitian ``a`` with |eigenvalue| < tol.

    The basis is made deterministic by pivoted Gram-Schmidt on the projector
    columns: at each step the computational basis state with the largest
    remaining overlap is taken (ties go to the lower index).
    """
    if tol <= 0:
        raise ValueError(f"tolerance must be positive, got {tol}")
    a = np.asarray(a, dtype=complex)
    if not is_hermitian(a, tol=max(HERMITIAN_TOL, tol)):
        raise ValueError("null_space expects a Hermitian operator")
    w, v = np.linalg.eigh(a)
    kernel = v[:, np.abs(w) < tol]
    rank = kernel.shape[1]
    if rank == 0:
        return []
    proj = kernel @ dag(kernel)
    residual = proj.copy()
    basis: list[np.ndarray] = []
    for _ in range(rank):
        norms = np.linalg.norm(residual, axis=0)
        # round so near-ties resolve by index rather than by float noise
        pivot = int(np.argmax(np.round(norms, 10)))
        vec = residual[:, pivot] / norms[pivot]
        basis.append(vec)
        residual = residual - np.outer(vec, vec.conj() @ residual)
    return basis
