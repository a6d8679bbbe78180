"""Invariant suites behind ``holodfs verify``.

Each check measures a deviation and compares it with a fixed tolerance.  The
report is deterministic: random draws use fixed seeds and no timings are
recorded.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import adiabatic, dfs, gates, hams, ns, qops


@dataclass
class Check:
    name: str
    deviation: float
    tolerance: float
    value: object = None

    @property
    def passed(self) -> bool:
        return bool(self.deviation < self.tolerance)

    def summary(self) -> str:
        if self.value is not None:
            return f"{self.name} = {_compact(self.value)}"
        return f"{self.name}: deviation {self.deviation:.3e} (tol {self.tolerance:.1e})"


def _compact(value) -> str:
    if isinstance(value, (list, tuple)):
        return "[" + ",".join(_compact(v) for v in value) + "]"
    return str(value)


def _maxabs(a) -> float:
    return float(np.max(np.abs(a), initial=0.0))


# -- qops -------------------------------------------------------------------


def check_r_subspace() -> float:
    dev = 0.0
    for n in (2, 3, 4):
        for l, m in itertools.permutations(range(1, n + 1), 2):
            dim = 1 << n
            idx = np.arange(dim)
            bl, bm = (idx >> (l - 1)) & 1, (idx >> (m - 1)) & 1
            active = bl != bm
            rx = qops.r_op("x", l, m, n)
            sq = rx @ rx
            dev = max(dev, _maxabs(sq[np.ix_(active, active)] - np.eye(active.sum())))
            for ax in "xyz":
                r = qops.r_op(ax, l, m, n)
                dev = max(dev, _maxabs(r[:, ~active]), _maxabs(r[~active, :]))
    return dev


def check_su2_closure() -> float:
    dev = 0.0
    for n in (2, 3, 4):
        for l, m in itertools.permutations(range(1, n + 1), 2):
            r = {a: qops.r_op(a, l, m, n) for a in "xyz"}
            for a, b, c in (("x", "y", "z"), ("y", "z", "x"), ("z", "x", "y")):
                dev = max(dev, _maxabs(qops.commutator(r[a], r[b]) - 2j * r[c]))
    return dev


def check_r_commutes_z() -> float:
    dev = 0.0
    for n in (4, 8):
        z = qops.collective_z_diagonal(n)
        for l, m in itertools.combinations(range(1, n + 1), 2):
            for a in "xyz":
                r = qops.r_op(a, l, m, n)
                # [R, Z] with Z diagonal: R_ij (z_j - z_i)
                dev = max(dev, _maxabs(r * (z[None, :] - z[:, None])))
    return dev


def check_mat_exp_unitary() -> float:
    rng = np.random.default_rng(11)
    dev = 0.0
    for dim in (2, 16, 64):
        a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        h = a + a.conj().T
        for dt in (0.01, 1.0, 5.0):
            u = qops.mat_exp(h, -1j * dt)
            dev = max(dev, _maxabs(u.conj().T @ u - np.eye(dim)))
    return dev


def _null_space_samples():
    rng = np.random.default_rng(12)
    for _ in range(10):
        p = hams.ControlParams(rng.uniform(0, np.pi / 2), rng.uniform(-np.pi, np.pi))
        for h in (hams.h_z(p), hams.h_x(p)):
            yield h, np.stack(qops.null_space(h), axis=1)


def check_null_space() -> float:
    return max(_maxabs(v.conj().T @ v - np.eye(v.shape[1])) for _, v in _null_space_samples())


def check_null_space_residual() -> float:
    return max(float(np.max(np.linalg.norm(h @ v, axis=0))) for h, v in _null_space_samples())


# -- dfs --------------------------------------------------------------------


def check_code_dephasing() -> float:
    rng = np.random.default_rng(21)
    ens = dfs.DephasingEnsemble(512, 21)
    dev = 0.0
    for n_log in (1, 2):
        code = dfs.build_code(n_log)
        idx = list(code.working_indices)
        for _ in range(5):
            psi = np.zeros(code.dim, dtype=complex)
            psi[idx] = rng.normal(size=len(idx)) + 1j * rng.normal(size=len(idx))
            psi /= np.linalg.norm(psi)
            dev = max(dev, abs(1.0 - dfs.dephase(psi, ens)))
    return dev


def check_dfs_projector() -> float:
    dev = 0.0
    for n_log in (1, 2):
        code = dfs.build_code(n_log)
        p = code.projector("dfs")
        z = qops.collective_z(code.n_physical)
        dev = max(dev, _maxabs(qops.commutator(p, z)))
    return dev


def check_leakage_order() -> float:
    rng = np.random.default_rng(23)
    code = dfs.build_code(1)
    worst = 0.0
    for _ in range(50):
        psi = rng.normal(size=16) + 1j * rng.normal(size=16)
        psi /= np.linalg.norm(psi)
        a, b, c = (dfs.leakage(psi, code, s) for s in ("logical", "logical+ancilla", "dfs"))
        worst = max(worst, b - a, c - b, -a, a - 1)
    return max(0.0, worst)


# -- hams -------------------------------------------------------------------


def _random_params(rng, count):
    return [hams.ControlParams(rng.uniform(0, np.pi), rng.uniform(-np.pi, np.pi)) for _ in range(count)]


def check_families_hermitian() -> float:
    rng = np.random.default_rng(31)
    dev = 0.0
    for name in ("h_z", "h_x", "h_4"):
        fam = hams.make_family(name)
        z = qops.collective_z_diagonal(qops.n_qubits_of(fam.dim))
        for p in _random_params(rng, 5):
            h = fam.hamiltonian(p.theta, p.phi)
            dev = max(dev, _maxabs(h - h.conj().T), _maxabs(h * (z[None, :] - z[:, None])))
    return dev


def check_dark_vs_null_space() -> float:
    rng = np.random.default_rng(32)
    dev = 0.0
    for p in _random_params(rng, 50):
        for h, dark in ((hams.h_z(p), hams.psi1(p)), (hams.h_x(p), hams.psi2(p))):
            kernel = np.stack(qops.null_space(h), axis=1)
            dev = max(dev, float(np.linalg.norm(dark - kernel @ (kernel.conj().T @ dark))))
    return dev


def check_zx_relabel() -> float:
    code = dfs.build_code(1)
    _, minus = hams.plus_minus(code)
    wz = np.stack([code.state("a1"), code.state("1L"), code.state("a2")], axis=1)
    wx = np.stack([code.state("a1"), minus, code.state("a2")], axis=1)
    rng = np.random.default_rng(33)
    dev = 0.0
    for p in _random_params(rng, 20):
        a = wz.conj().T @ hams.h_z(p) @ wz
        b = wx.conj().T @ hams.h_x(p) @ wx
        dev = max(dev, _maxabs(a - b))
    return dev


def check_h4_lambda() -> float:
    code = dfs.build_code(2)
    rng = np.random.default_rng(34)
    e, g1, g2 = (code.index_of(x, x) for x in ("a1", "1L", "a2"))
    dev = 0.0
    for p in _random_params(rng, 10):
        h = hams.h_4(p)
        lam = hams.h_lambda(hams.LambdaSystem(e, g1, g2, np.sin(p.theta), p.phi, np.cos(p.theta), 0.0), 8)
        sel = [e, g1, g2]
        dev = max(dev, _maxabs(h[np.ix_(sel, sel)] - lam.hamiltonian[np.ix_(sel, sel)]))
        # the triple is closed under h
        rest = np.setdiff1d(np.arange(h.shape[0]), sel)
        dev = max(dev, _maxabs(h[np.ix_(rest, sel)]))
    return dev


# -- adiabatic --------------------------------------------------------------


def _hz_holonomy(phi0, reverse=False, method="blocked"):
    loop = adiabatic.standard_loop(phi0)
    if reverse:
        loop = loop.reversed()
    return adiabatic.holonomy(hams.make_family("h_z"), loop, method=method, stride=500)


def check_dfs_confinement() -> float:
    res = _hz_holonomy(np.pi, method="dense")
    code = dfs.build_code(1)
    worst = res.protected_leakage_max
    for snap in res.trajectory.snapshots:
        for col in snap.states.T:
            worst = max(worst, dfs.leakage(col / np.linalg.norm(col), code, "dfs"))
    return worst


def check_identity_loop() -> float:
    return _maxabs(_hz_holonomy(0.0).unitary - np.eye(2))


def check_reversal() -> float:
    fwd, bwd = _hz_holonomy(np.pi / 2), _hz_holonomy(np.pi / 2, reverse=True)
    return gates.phase_error(bwd.unitary, fwd.unitary.conj().T)


def check_composition() -> float:
    u1, u2 = _hz_holonomy(np.pi / 3).unitary, _hz_holonomy(np.pi / 2).unitary
    u12 = _hz_holonomy(np.pi / 3 + np.pi / 2).unitary
    return gates.phase_error(u2 @ u1, u12)


# -- gates ------------------------------------------------------------------


def check_noncommuting() -> float:
    z, x = gates.target_gate("Z_rot", np.pi / 2), gates.target_gate("X_rot", np.pi / 2)
    # deviation is small when the commutator is large
    return 1.0 / (1.0 + _maxabs(qops.commutator(z, x)))


def check_universality_smoke() -> float:
    gens = {"Z": gates.target_gate("Z_rot", np.pi / 2), "X": gates.target_gate("X_rot", np.pi / 2)}
    _, dist = gates.closest_word(gens, gates.HADAMARD, max_len=6)
    return dist


def check_cp_diagonal() -> float:
    dev = _maxabs(gates.target_gate("CP", 0.0) - np.eye(4))
    for w in np.linspace(-2 * np.pi, 2 * np.pi, 9):
        cp = gates.target_gate("CP", w)
        dev = max(dev, _maxabs(cp - np.diag(np.diag(cp))))
    return dev


def check_fidelity_phase_invariance() -> float:
    rng = np.random.default_rng(41)
    dev = 0.0
    for _ in range(10):
        a = np.linalg.qr(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))[0]
        b = np.linalg.qr(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))[0]
        f = gates.gate_fidelity(a, b)
        ph1, ph2 = np.exp(1j * rng.uniform(0, 7)), np.exp(1j * rng.uniform(0, 7))
        dev = max(dev, abs(f - gates.gate_fidelity(ph1 * a, ph2 * b)))
    return dev


# -- ns ---------------------------------------------------------------------


def check_cg_invariants() -> float:
    dev = 0.0
    for n in range(2, 7):
        d = ns.cg_decompose(n)
        dev = max(dev, abs(sum(b.multiplicity * len(b.ms) for b in d.blocks) - (1 << n)))
        s2, sz, sm = ns.total_spin_squared(n), ns.collective_spin(n, "z"), ns.collective_spin(n, "-")
        for b in d.blocks:
            for i, m in enumerate(b.ms):
                vecs = b.basis[i].T
                dev = max(dev, _maxabs(s2 @ vecs - b.j * (b.j + 1) * vecs), _maxabs(sz @ vecs - m * vecs))
                if i + 1 < len(b.ms):
                    lowered = sm @ vecs
                    coef = np.sqrt(b.j * (b.j + 1) - m * (m - 1))
                    dev = max(dev, _maxabs(lowered - coef * b.basis[i + 1].T))
    return dev


def check_exchange_ns() -> float:
    d = ns.five_qubit_decomposition()
    dev = 0.0
    for l, m in itertools.combinations(range(1, 6), 2):
        op = ns.exchange(l, m, 5)
        for b in d.blocks:
            r = ns.verify_ns(d, op, b.j)
            dev = max(dev, r.block_leak, r.m_offdiag, r.m_deviation)
    return dev


def check_h_ns_commutes() -> float:
    rng = np.random.default_rng(51)
    dev = 0.0
    spins = [ns.collective_spin(5, a) for a in "xyz"]
    for _ in range(5):
        code = ns.NSCode(*rng.normal(size=3), rng.uniform(-np.pi, np.pi))
        h = ns.h_ns(code)
        dev = max(dev, *(_maxabs(qops.commutator(h, s)) for s in spins))
    return dev


def check_ns_sectors() -> float:
    return ns.ns_holonomy(adiabatic.standard_loop(np.pi)).m_spread


# -- suite ------------------------------------------------------------------

SUITE: tuple[tuple[str, Callable[[], float], float], ...] = (
    ("qops.r_op_subspace_action", check_r_subspace, 1e-12),
    ("qops.su2_closure", check_su2_closure, 1e-12),
    ("qops.r_op_commutes_collective_z", check_r_commutes_z, 1e-12),
    ("qops.mat_exp_unitary", check_mat_exp_unitary, 1e-10),
    ("qops.null_space_orthonormal", check_null_space, 1e-10),
    ("qops.null_space_residual", check_null_space_residual, 10 * qops.NULL_TOL),
    ("dfs.code_dephasing_immunity", check_code_dephasing, 1e-12),
    ("dfs.projector_commutes_collective_z", check_dfs_projector, 1e-12),
    ("dfs.leakage_ordering", check_leakage_order, 1e-12),
    ("hams.hermitian_and_z_commuting", check_families_hermitian, 1e-12),
    ("hams.dark_states_in_null_space", check_dark_vs_null_space, 1e-9),
    ("hams.z_x_relabeling", check_zx_relabel, 1e-10),
    ("hams.h4_lambda_restriction", check_h4_lambda, 1e-12),
    ("adiabatic.dfs_confinement", check_dfs_confinement, 1e-10),
    ("adiabatic.identity_loop", check_identity_loop, 1e-6),
    ("adiabatic.reversal_conjugates", check_reversal, 1e-2),
    ("adiabatic.composition", check_composition, 2e-2),
    ("gates.noncommuting_generators", check_noncommuting, 0.9),
    ("gates.universality_smoke", check_universality_smoke, 0.05),
    ("gates.cp_diagonal", check_cp_diagonal, 1e-15),
    ("gates.fidelity_phase_invariance", check_fidelity_phase_invariance, 1e-12),
    ("cg.invariants_n2_to_6", check_cg_invariants, 1e-10),
    ("ns.exchange_m_independent", check_exchange_ns, 1e-10),
    ("ns.h_ns_commutes_collective_spin", check_h_ns_commutes, 1e-12),
    ("ns.holonomy_m_consistency", check_ns_sectors, 1e-6),
)


def _multiplicities_check() -> Check:
    mult = ns.five_qubit_decomposition().multiplicities
    value = [mult[1.5], mult[0.5], mult[2.5]]
    return Check("cg.multiplicities", 0.0 if value == [4, 5, 1] else 1.0, 0.5, value)


def run_suite(corrupt: str | None = None, only=None) -> list[Check]:
    """Run every invariant check.  ``corrupt`` names a check whose tolerance is
    forced negative so it must fail (exercises the failure path)."""
    checks = []
    for name, fn, tol in SUITE:
        if only is not None and name not in only:
            continue
        checks.append(Check(name, float(fn()), tol))
    if only is None or "cg.multiplicities" in only:
        checks.append(_multiplicities_check())
    names = {c.name for c in checks}
    if corrupt is not None:
        if corrupt not in names:
            raise KeyError(f"no invariant named {corrupt!r}")
        for c in checks:
            if c.name == corrupt:
                c.tolerance = -1.0
    return checks
