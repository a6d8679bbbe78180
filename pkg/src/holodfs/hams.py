"""Controllable Hamiltonians and their analytic dark states.

All single-block families act on the 4-qubit code of :mod:`holodfs.dfs`.  The
mixing angle ``theta`` sets the coupling ratio through
``(J_24, J_34) = j_scale * (sin theta, cos theta)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .dfs import CodeBasis, build_code
from .qops import r_op

SQRT2 = np.sqrt(2.0)


@dataclass(frozen=True)
class ControlParams:
    theta: float
    phi: float
    j_scale: float = 1.0

    def __post_init__(self):
        if not (np.isfinite(self.theta) and np.isfinite(self.phi)):
            raise ValueError("theta and phi must be finite")
        if not (np.isfinite(self.j_scale) and self.j_scale > 0):
            raise ValueError(f"j_scale must be positive, got {self.j_scale}")


# -- general exchange Hamiltonian -------------------------------------------


def h_general(n: int, couplings) -> np.ndarray:
    """sum over entries (l, m, Jx, Jy) of Jx R^x_lm + Jy R^y_lm.

    Each unordered pair may appear once.  Pairs are normalized to l > m, so
    (1, 2, Jx, Jy) and (2, 1, Jx, Jy) build the same operator.
    """
    out = np.zeros((1 << n, 1 << n), dtype=complex)
    seen = set()
    for l, m, jx, jy in couplings:
        key = frozenset((l, m))
        if key in seen:
            raise ValueError(f"duplicate coupling for pair {sorted(key)}")
        seen.add(key)
        l, m = max(l, m), min(l, m)
        if jx:
            out += jx * r_op("x", l, m, n)
        if jy:
            out += jy * r_op("y", l, m, n)
    return out


# -- Lambda systems ---------------------------------------------------------


@dataclass(frozen=True)
class LambdaSystem:
    """Upper level ``e`` coupled to ``g1`` and ``g2`` (basis indices)."""

    e: int
    g1: int
    g2: int
    j_lm: float
    phi_lm: float
    j_ln: float
    phi_ln: float

    def __post_init__(self):
        if len({self.e, self.g1, self.g2}) != 3:
            raise ValueError("Lambda levels must be three distinct basis states")


class LambdaResult(NamedTuple):
    hamiltonian: np.ndarray
    dark: np.ndarray  # (dim,) normally; (dim, 2) bottom span when degenerate
    degenerate: bool


def h_lambda(sys: LambdaSystem, n: int) -> LambdaResult:
    dim = 1 << n
    for idx in (sys.e, sys.g1, sys.g2):
        if not 0 <= idx < dim:
            raise IndexError(f"basis index {idx} out of range for {n} qubits")
    c1 = sys.j_lm * np.exp(1j * sys.phi_lm)
    c2 = sys.j_ln * np.exp(1j * sys.phi_ln)
    h = np.zeros((dim, dim), dtype=complex)
    h[sys.e, sys.g1] = c1
    h[sys.e, sys.g2] = c2
    h = h + h.conj().T
    if c1 == 0 and c2 == 0:
        # every bottom state is dark; direction undefined
        span = np.zeros((dim, 2), dtype=complex)
        span[sys.g1, 0] = span[sys.g2, 1] = 1.0
        return LambdaResult(h, span, True)
    dark = np.zeros(dim, dtype=complex)
    dark[sys.g2] = c1
    dark[sys.g1] = -c2
    return LambdaResult(h, dark / np.linalg.norm(dark), False)


def h_lmn(l: int, m: int, k: int, n: int, j_lm: float, phi_lm: float,
          j_lk: float, phi_lk: float) -> tuple[np.ndarray, LambdaSystem]:
    """Lambda scheme built from R operators on qubits (l; m, k).

    Returns the n-qubit operator and the LambdaSystem it reduces to on the
    single-excitation triple e = l excited, g1 = m excited, g2 = k excited.
    """
    h = np.zeros((1 << n, 1 << n), dtype=complex)
    for j, jj, ph in ((m, j_lm, phi_lm), (k, j_lk, phi_lk)):
        h += jj * (np.cos(ph) * r_op("x", j, l, n) + np.sin(ph) * r_op("y", j, l, n))
    sys = LambdaSystem(1 << (l - 1), 1 << (m - 1), 1 << (k - 1), j_lm, phi_lm, j_lk, phi_lk)
    return h, sys


# -- single-block gate Hamiltonians -----------------------------------------

_CODE1 = None


def _code1() -> CodeBasis:
    global _CODE1
    if _CODE1 is None:
        _CODE1 = build_code(1)
    return _CODE1


def _z_terms() -> np.ndarray:
    return np.stack([r_op("x", 2, 4, 4), r_op("y", 2, 4, 4), r_op("x", 3, 4, 4)])


def _x_terms() -> np.ndarray:
    return np.stack([
        (r_op("x", 2, 4, 4) - r_op("x", 1, 4, 4)) / SQRT2,
        (r_op("y", 2, 4, 4) - r_op("y", 1, 4, 4)) / SQRT2,
        r_op("x", 3, 4, 4),
    ])


def _single_coeffs(p: ControlParams) -> np.ndarray:
    s = p.j_scale * np.sin(p.theta)
    return np.array([s * np.cos(p.phi), s * np.sin(p.phi), p.j_scale * np.cos(p.theta)])


def h_z(p: ControlParams) -> np.ndarray:
    """J_24 (R^x_24 cos phi + R^y_24 sin phi) + J_34 R^x_34 on four qubits."""
    return np.tensordot(_single_coeffs(p), _z_terms(), axes=1)


def h_x(p: ControlParams) -> np.ndarray:
    """J_34 R^x_34 + J_24 [cos phi (R^x_24 - R^x_14) + sin phi (R^y_24 - R^y_14)] / sqrt2."""
    return np.tensordot(_single_coeffs(p), _x_terms(), axes=1)


def plus_minus(code: CodeBasis | None = None) -> tuple[np.ndarray, np.ndarray]:
    """|+->_L = (|1>_L +- |0>_L)/sqrt2."""
    code = code or _code1()
    one, zero = code.state("1L"), code.state("0L")
    return (one + zero) / SQRT2, (one - zero) / SQRT2


def psi1(p: ControlParams) -> np.ndarray:
    """cos(theta)|1>_L - sin(theta) e^{i phi}|a2>, dark state of h_z."""
    c = _code1()
    return np.cos(p.theta) * c.state("1L") - np.sin(p.theta) * np.exp(1j * p.phi) * c.state("a2")


def psi2(p: ControlParams) -> np.ndarray:
    """cos(theta)|->_L - sin(theta) e^{i phi}|a2>, dark state of h_x."""
    c = _code1()
    _, minus = plus_minus(c)
    return np.cos(p.theta) * minus - np.sin(p.theta) * np.exp(1j * p.phi) * c.state("a2")


# -- two-block controlled phase ---------------------------------------------


def cp_indices(i: int, j: int, n_logical: int) -> tuple[tuple[tuple[int, int], tuple[int, int]], ...]:
    """Physical qubit pairs of the controlled-phase Hamiltonian on encoded qubits i < j.

    Returns ``(((a, b), (c, d)), ((e, f), (g, h)))`` for the phase-carrying
    product R_ab R_cd and the fixed product R^x_ef R^x_gh.
    """
    if not 1 <= i < j <= n_logical:
        raise ValueError(f"need 1 <= i < j <= N, got i={i}, j={j}, N={n_logical}")
    bi, bj = 4 * (i - 1), 4 * (j - 1)
    return (
        ((bi + 2, bi + 4), (bj + 2, bj + 4)),
        ((bi + 3, bi + 4), (bj + 3, bj + 4)),
    )


def _cp_terms(i: int, j: int, n_logical: int) -> np.ndarray:
    (p1, p2), (q1, q2) = cp_indices(i, j, n_logical)
    n = 4 * n_logical
    ax, ay = r_op("x", *p1, n), r_op("y", *p1, n)
    bx, by = r_op("x", *p2, n), r_op("y", *p2, n)
    return np.stack([ax @ bx, ax @ by + ay @ bx, ay @ by, r_op("x", *q1, n) @ r_op("x", *q2, n)])


def _cp_coeffs(p: ControlParams) -> np.ndarray:
    # each factor carries phi/2 so the |a1 a1><1_L 1_L| coupling carries e^{i phi}
    c, s = np.cos(p.phi / 2), np.sin(p.phi / 2)
    st = p.j_scale * np.sin(p.theta)
    return np.array([st * c * c, st * c * s, st * s * s, p.j_scale * np.cos(p.theta)])


def h_cp(p: ControlParams, i: int = 1, j: int = 2, n_logical: int = 2) -> np.ndarray:
    return np.tensordot(_cp_coeffs(p), _cp_terms(i, j, n_logical), axes=1)


def h_4(p: ControlParams) -> np.ndarray:
    """Two-block controlled-phase Hamiltonian on eight qubits (dim 256)."""
    return h_cp(p, 1, 2, 2)


def cp_dark(p: ControlParams, code: CodeBasis | None = None, i: int = 1, j: int = 2) -> np.ndarray:
    """cos(theta)|1_i 1_j>_L - sin(theta) e^{i phi}|a2_i a2_j>, other blocks in |0>_L."""
    code = code or build_code(2)
    labs_11 = ["0L"] * code.n_logical
    labs_aa = ["0L"] * code.n_logical
    labs_11[i - 1] = labs_11[j - 1] = "1L"
    labs_aa[i - 1] = labs_aa[j - 1] = "a2"
    return (np.cos(p.theta) * code.state(*labs_11)
            - np.sin(p.theta) * np.exp(1j * p.phi) * code.state(*labs_aa))


# -- families ---------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class HamiltonianFamily:
    """H(theta, phi) = sum_k coeffs(theta, phi)[k] * terms[k], plus its dark frame.

    ``logical`` holds the computational states carried around the loop (as
    columns); ``dark`` returns an orthonormal analytic basis of the dark
    manifold that contains them at every parameter point.
    """

    name: str
    terms: np.ndarray
    coeffs: Callable[[ControlParams], np.ndarray]
    dark: Callable[[ControlParams], np.ndarray]
    logical: np.ndarray
    protected: np.ndarray  # projector whose complement counts as DFS/NS leakage
    gate: str
    j_scale: float = 1.0
    logical_labels: tuple[str, ...] = ()
    code: CodeBasis | None = None
    pattern: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "pattern", np.any(np.abs(self.terms) > 0, axis=0))

    @property
    def dim(self) -> int:
        return self.terms.shape[-1]

    def params(self, theta: float, phi: float) -> ControlParams:
        return ControlParams(theta, phi, self.j_scale)

    def hamiltonian(self, theta: float, phi: float) -> np.ndarray:
        return np.tensordot(self.coeffs(self.params(theta, phi)), self.terms, axes=1)

    def dark_basis(self, theta: float, phi: float) -> np.ndarray:
        return self.dark(self.params(theta, phi))


def _stack_cols(*vs) -> np.ndarray:
    return np.stack(vs, axis=1)


def make_family(name: str, j_scale: float = 1.0) -> HamiltonianFamily:
    """Family by name: ``h_z``, ``h_x``, ``h_4``, ``h_ns`` or ``h_ns_x``."""
    if name in ("h_z", "h_x"):
        code = _code1()
        protected = code.projector("dfs")
        logical = code.logical_matrix()
        if name == "h_z":
            return HamiltonianFamily(
                name, _z_terms(), _single_coeffs,
                lambda p: _stack_cols(code.state("0L"), psi1(p)),
                logical, protected, "Z_rot", j_scale, ("0L", "1L"), code,
            )
        plus, _ = plus_minus(code)
        return HamiltonianFamily(
            name, _x_terms(), _single_coeffs,
            lambda p: _stack_cols(plus, psi2(p)),
            logical, protected, "X_rot", j_scale, ("0L", "1L"), code,
        )
    if name == "h_4":
        code = build_code(2)
        fixed = [code.state("0L", "0L"), code.state("0L", "1L"), code.state("1L", "0L")]
        return HamiltonianFamily(
            name, _cp_terms(1, 2, 2), _cp_coeffs,
            lambda p: _stack_cols(*fixed, cp_dark(p, code)),
            code.logical_matrix(), code.projector("dfs"), "CP", j_scale,
            ("00L", "01L", "10L", "11L"), code,
        )
    if name in ("h_ns", "h_ns_x"):
        from .ns import ns_family

        return ns_family(variant="x" if name == "h_ns_x" else "z", j_scale=j_scale)
    raise ValueError(f"unknown Hamiltonian family {name!r}")


FAMILY_NAMES = ("h_z", "h_x", "h_4", "h_ns", "h_ns_x")
