"""Clebsch-Gordan decomposition of n qubits and a noiseless-subsystem qubit.

For five qubits the collective su(2) action splits the space as

    C^4 (x) H_{3/2}  +  C^5 (x) H_{1/2}  +  C^1 (x) H_{5/2}

and the four-dimensional multiplicity space of J = 3/2 carries one logical
qubit plus two ancillae.  Controls act as A (x) 1 on that factor, so every
collective rotation leaves the encoded information alone.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .qops import collective_z_diagonal, dag, pauli

SQRT2 = np.sqrt(2.0)
NS_TOL = 1e-10
DEFAULT_ASSIGNMENT = (("a1", 0), ("a2", 1), ("0", 2), ("1", 3))


def collective_spin(n: int, axis: str) -> np.ndarray:
    """S^axis = (1/2) sum_l sigma^axis_l; ``axis`` in x, y, z, +, -."""
    if n < 1:
        raise ValueError(f"qubit count must be positive, got {n}")
    if axis == "z":
        return np.diag(0.5 * collective_z_diagonal(n)).astype(complex)
    if axis in ("x", "y"):
        return 0.5 * sum(pauli(axis, l, n) for l in range(1, n + 1))
    if axis in ("+", "-"):
        sx, sy = collective_spin(n, "x"), collective_spin(n, "y")
        return sx + 1j * sy if axis == "+" else sx - 1j * sy
    raise ValueError(f"unknown axis {axis!r}")


def total_spin_squared(n: int) -> np.ndarray:
    return sum(np.linalg.matrix_power(collective_spin(n, a), 2) for a in "xyz")


def exchange(l: int, m: int, n: int) -> np.ndarray:
    """Heisenberg coupling S_l . S_m = (X_l X_m + Y_l Y_m + Z_l Z_m) / 4."""
    if l == m:
        raise ValueError("exchange needs two distinct qubits")
    return 0.25 * sum(pauli(a, l, n) @ pauli(a, m, n) for a in "xyz")


@dataclass(frozen=True)
class CGBlock:
    j: float
    multiplicity: int
    basis: np.ndarray = field(repr=False)  # (2j+1, multiplicity, 2**n); m runs j, j-1, ..., -j

    @property
    def ms(self) -> np.ndarray:
        return self.j - np.arange(int(round(2 * self.j)) + 1)

    def m_index(self, m: float) -> int:
        idx = int(round(self.j - m))
        if not 0 <= idx < self.basis.shape[0] or abs(self.j - idx - m) > 1e-9:
            raise ValueError(f"m={m} not in block J={self.j}")
        return idx

    def matrix(self) -> np.ndarray:
        """Rows are basis vectors, ordered (m, k) with k fastest."""
        return self.basis.reshape(-1, self.basis.shape[-1])

    def projector(self) -> np.ndarray:
        b = self.matrix()
        return b.T @ b.conj()

    def embed(self, a: np.ndarray) -> np.ndarray:
        """Operator acting as ``a`` on the multiplicity factor and trivially on H_J."""
        b = self.matrix()
        return b.T @ np.kron(np.eye(len(self.ms)), a) @ b.conj()


@dataclass(frozen=True)
class CGDecomposition:
    n_qubits: int
    blocks: tuple[CGBlock, ...]

    def block(self, j: float) -> CGBlock:
        for b in self.blocks:
            if abs(b.j - j) < 1e-9:
                return b
        raise KeyError(f"no block with J={j}")

    @property
    def multiplicities(self) -> dict[float, int]:
        return {b.j: b.multiplicity for b in self.blocks}


def _gram_schmidt_columns(cols: np.ndarray, count: int, tol: float = 1e-8) -> np.ndarray:
    out: list[np.ndarray] = []
    for c in cols.T:
        r = c - sum(np.vdot(v, c) * v for v in out) if out else c.copy()
        nrm = np.linalg.norm(r)
        if nrm > tol:
            out.append(r / nrm)
            if len(out) == count:
                break
    return np.stack(out, axis=1)


def cg_decompose(n: int) -> CGDecomposition:
    """Simultaneous (S^2, S_z) eigenbasis with an m-aligned multiplicity frame.

    Highest-weight vectors of each J come from Gram-Schmidt over the
    projections of computational basis states (ascending index) onto
    ker(S^+) within the m = J sector; lower m follow from S^- and
    normalization.
    """
    if not 2 <= n <= 6:
        raise ValueError(f"cg_decompose supports 2..6 qubits, got {n}")
    dim = 1 << n
    ones = np.array([bin(i).count("1") for i in range(dim)])
    s_plus = collective_spin(n, "+").real
    s_minus = s_plus.T
    blocks = []
    j = n / 2
    while j >= 0:
        exc = int(round(n / 2 - j))
        sector = np.flatnonzero(ones == exc)
        above = np.flatnonzero(ones == exc - 1)
        if above.size:
            kernel = scipy.linalg.null_space(s_plus[np.ix_(above, sector)])
        else:
            kernel = np.eye(sector.size)
        mult = kernel.shape[1]
        expected = sector.size - above.size
        if mult != expected:
            raise RuntimeError(f"highest-weight space of J={j} has dim {mult}, expected {expected}")
        proj = kernel @ kernel.T
        hw = np.zeros((dim, mult))
        hw[sector] = _gram_schmidt_columns(proj, mult)
        size = int(round(2 * j)) + 1
        basis = np.zeros((size, mult, dim))
        basis[0] = hw.T
        for i in range(1, size):
            lowered = basis[i - 1] @ s_minus.T
            basis[i] = lowered / np.linalg.norm(lowered, axis=1, keepdims=True)
        blocks.append(CGBlock(j, mult, basis.astype(complex)))
        j -= 1
    return CGDecomposition(n, tuple(blocks))


@dataclass(frozen=True)
class NSReport:
    preserves_block: bool
    m_independent: bool
    multiplicity_action: np.ndarray
    per_m_actions: tuple[np.ndarray, ...]
    block_leak: float
    m_offdiag: float
    m_deviation: float


def verify_ns(decomp: CGDecomposition, op: np.ndarray, j: float, tol: float = NS_TOL) -> NSReport:
    """Check <J,m,k|op|J',m',k'> = delta_JJ' delta_mm' A_kk' with A independent of m."""
    blk = decomp.block(j)
    b = blk.matrix()
    if op.shape != (b.shape[1],) * 2:
        raise ValueError(f"operator shape {op.shape} does not match {b.shape[1]}-dim space")
    image = op @ b.T
    leak = float(np.max(np.abs(image - b.T @ (b.conj() @ image)), initial=0.0))
    nm, nk = len(blk.ms), blk.multiplicity
    g = (b.conj() @ image).reshape(nm, nk, nm, nk)
    per_m = tuple(g[i, :, i, :].copy() for i in range(nm))
    off = 0.0
    for a, c in itertools.permutations(range(nm), 2):
        off = max(off, float(np.max(np.abs(g[a, :, c, :]))))
    dev = max((float(np.max(np.abs(a - per_m[0]))) for a in per_m[1:]), default=0.0)
    preserves = leak < tol
    return NSReport(preserves, preserves and off < tol and dev < tol, per_m[0], per_m,
                    leak, off, dev)


def ns_content(decomp: CGDecomposition, j: float, psi: np.ndarray) -> np.ndarray:
    """Reduced state of ``psi`` on the multiplicity factor of block J.

    rho_kk' = sum_m c_mk conj(c_mk'), with c_mk = <J,m,k|psi>.  Collective
    rotations mix the m index only, so rho is invariant under them.
    """
    blk = decomp.block(j)
    c = (blk.basis.conj() @ psi)  # (m, k)
    return c.T @ c.conj()


# -- NS code and its control Hamiltonian ------------------------------------


_DECOMP5: CGDecomposition | None = None


def five_qubit_decomposition() -> CGDecomposition:
    global _DECOMP5
    if _DECOMP5 is None:
        _DECOMP5 = cg_decompose(5)
    return _DECOMP5


@dataclass(frozen=True)
class NSCode:
    """One logical qubit and two ancillae in the C^4 multiplicity space of J = 3/2.

    Labels map to multiplicity indices k (0-based): a1 -> 0, a2 -> 1,
    0 -> 2, 1 -> 3.  The couplings define
    A = J'|a1><a2| + J0'' e^{i phi}|a1><0| + J1'' e^{i phi}|a1><1| + h.c.
    """

    j_prime: float = 1.0
    j0: float = 0.0
    j1: float = 0.0
    phi: float = 0.0
    assignment: tuple[tuple[str, int], ...] = DEFAULT_ASSIGNMENT
    j: float = 1.5
    decomp: CGDecomposition = field(default_factory=five_qubit_decomposition, repr=False)

    def __post_init__(self):
        if not all(np.isfinite([self.j_prime, self.j0, self.j1, self.phi])):
            raise ValueError("NS couplings must be finite")
        if sorted(k for _, k in self.assignment) != [0, 1, 2, 3]:
            raise ValueError("assignment must use each multiplicity index once")

    @property
    def block(self) -> CGBlock:
        return self.decomp.block(self.j)

    def label_vector(self, label: str) -> np.ndarray:
        """Multiplicity-space vector for a label; ``+``/``-`` are (|1> +- |0>)/sqrt2."""
        if label in ("+", "-"):
            one, zero = self.label_vector("1"), self.label_vector("0")
            return (one + zero) / SQRT2 if label == "+" else (one - zero) / SQRT2
        k = dict(self.assignment)[label]
        v = np.zeros(self.block.multiplicity, dtype=complex)
        v[k] = 1.0
        return v

    def state(self, label: str, m: float) -> np.ndarray:
        """|label, m> in the 32-dim physical space."""
        blk = self.block
        return self.label_vector(label) @ blk.basis[blk.m_index(m)]

    def multiplicity_operator(self) -> np.ndarray:
        a1, a2 = self.label_vector("a1"), self.label_vector("a2")
        ph = np.exp(1j * self.phi)
        a = (self.j_prime * np.outer(a1, a2.conj())
             + self.j0 * ph * np.outer(a1, self.label_vector("0").conj())
             + self.j1 * ph * np.outer(a1, self.label_vector("1").conj()))
        return a + dag(a)

    def dark_state(self, m: float) -> np.ndarray:
        """cos(t)|1~> - sin(t) e^{i phi}|a2~> at magnetic number m, tan t = J1''/J'.

        Dark only when ``j0 == 0``.
        """
        t = np.arctan2(self.j1, self.j_prime)
        return np.cos(t) * self.state("1", m) - np.sin(t) * np.exp(1j * self.phi) * self.state("a2", m)


def x_variant(j_prime: float, j_double: float, phi: float, **kw) -> NSCode:
    """Couplings that drive |a1~><-~| with strength J'': J0'' = -J''/sqrt2, J1'' = J''/sqrt2."""
    return NSCode(j_prime, -j_double / SQRT2, j_double / SQRT2, phi, **kw)


def h_ns(code: NSCode) -> np.ndarray:
    """H_NS = A (x) 1 in the aligned frame of the J = 3/2 block (dim 32)."""
    return code.block.embed(code.multiplicity_operator())


def ns_family(variant: str = "z", j_scale: float = 1.0, m: float | None = 1.5,
              code: NSCode | None = None):
    """Loop family on the NS block: J' = j cos(theta), J'' = j sin(theta).

    ``variant="z"`` couples |a1~> to |1~> (phase gate); ``"x"`` couples it to
    |-~> (X rotation).  ``m=None`` carries the logical pair of every m sector.
    """
    from .hams import HamiltonianFamily, _single_coeffs

    if variant not in ("z", "x"):
        raise ValueError(f"unknown NS variant {variant!r}")
    code = code or NSCode()
    blk = code.block
    a1, a2 = code.label_vector("a1"), code.label_vector("a2")
    v = code.label_vector("1" if variant == "z" else "-")
    spectator = code.label_vector("0" if variant == "z" else "+")
    up = np.outer(a1, v.conj())
    terms = np.stack([
        blk.embed(up + dag(up)),
        blk.embed(1j * (up - dag(up))),
        blk.embed(np.outer(a1, a2.conj()) + np.outer(a2, a1.conj())),
    ])
    ms = list(blk.ms) if m is None else [m]
    bvec = blk.basis

    def lift(vec, mm):
        return vec @ bvec[blk.m_index(mm)]

    logical = np.stack([lift(code.label_vector(lab), mm) for mm in ms for lab in ("0", "1")], axis=1)

    def dark(p):
        cols = []
        for mm in ms:
            cols.append(lift(spectator, mm))
            cols.append(lift(np.cos(p.theta) * v - np.sin(p.theta) * np.exp(1j * p.phi) * a2, mm))
        return np.stack(cols, axis=1)

    labels = tuple(f"{lab}~(m={mm:+g})" for mm in ms for lab in ("0", "1"))
    name = "h_ns" if variant == "z" else "h_ns_x"
    return HamiltonianFamily(name, terms, _single_coeffs, dark, logical, blk.projector(),
                             "Z_rot" if variant == "z" else "X_rot", j_scale, labels, None)


@dataclass(frozen=True)
class NSHolonomyResult:
    sectors: dict  # m -> HolonomyResult
    m_spread: float  # max pairwise 1 - fidelity between sector holonomies

    @property
    def unitary(self) -> np.ndarray:
        return next(iter(self.sectors.values())).unitary


def ns_holonomy(loop, variant: str = "z", code: NSCode | None = None, j_scale: float = 1.0,
                method: str = "blocked") -> NSHolonomyResult:
    """Holonomy on the NS qubit, read out separately in each m sector."""
    from .adiabatic import check_dark_at_origin, evolve, readout
    from .gates import gate_fidelity

    fam = ns_family(variant, j_scale, m=None, code=code)
    check_dark_at_origin(fam, loop, fam.logical)
    traj = evolve(fam, loop, fam.logical, method=method)
    ms = (code or NSCode()).block.ms
    sectors = {}
    for i, mm in enumerate(ms):
        sl = slice(2 * i, 2 * i + 2)
        sectors[float(mm)] = readout(fam, loop, fam.logical[:, sl], traj.final[:, sl], traj)
    us = [r.unitary for r in sectors.values()]
    spread = max((1.0 - gate_fidelity(a, b) for a, b in itertools.combinations(us, 2)), default=0.0)
    return NSHolonomyResult(sectors, float(spread))
