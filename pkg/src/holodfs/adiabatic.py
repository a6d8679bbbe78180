"""Adiabatic transport around closed control loops and holonomy readout.

The propagator is piecewise constant: step k uses exp(-i H(p_k) dt) with p_k
the loop parameters at the temporal midpoint of the step.  Each step is exact
for its frozen Hamiltonian, so unitarity holds to rounding.
"""
from __future__ import annotations

import warnings
import weakref
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .gates import canonical_phase, gate_fidelity, phase_error, target_gate
from .hams import HamiltonianFamily, make_family
from .qops import dag

DEFAULT_TIME = 200.0
DEFAULT_STEPS = 20_000
DARK_TOL = 1e-9
NORM_TOL = 1e-9
_CLOSE_TOL = 1e-12


@dataclass(frozen=True)
class ParameterLoop:
    """Piecewise-linear closed path in (theta, phi) traversed at constant speed per segment."""

    waypoints: tuple[tuple[float, float], ...]
    segment_fractions: tuple[float, ...]
    total_time: float = DEFAULT_TIME
    steps: int = DEFAULT_STEPS

    def __post_init__(self):
        wp = tuple((float(t), float(p)) for t, p in self.waypoints)
        fr = tuple(float(f) for f in self.segment_fractions)
        object.__setattr__(self, "waypoints", wp)
        object.__setattr__(self, "segment_fractions", fr)
        if len(wp) < 2:
            raise ValueError("a loop needs at least two waypoints")
        if len(fr) != len(wp) - 1:
            raise ValueError("need one segment fraction per segment")
        if any(f <= 0 for f in fr) or abs(sum(fr) - 1.0) > 1e-12:
            raise ValueError("segment fractions must be positive and sum to 1")
        if not is_closed(wp):
            raise ValueError(f"loop is open: {wp[0]} -> {wp[-1]}")
        if not (np.isfinite(self.total_time) and self.total_time >= 0):
            raise ValueError("total_time must be finite and non-negative")
        if int(self.steps) != self.steps or self.steps < 1:
            raise ValueError("steps must be a positive integer")

    @property
    def dt(self) -> float:
        return self.total_time / self.steps

    @property
    def origin(self) -> tuple[float, float]:
        return self.waypoints[0]

    def points(self, s) -> tuple[np.ndarray, np.ndarray]:
        """(theta, phi) at fractional times ``s`` in [0, 1]."""
        s = np.atleast_1d(np.asarray(s, dtype=float))
        edges = np.concatenate([[0.0], np.cumsum(self.segment_fractions)])
        edges[-1] = 1.0
        seg = np.clip(np.searchsorted(edges, s, side="right") - 1, 0, len(self.segment_fractions) - 1)
        u = (s - edges[seg]) / (edges[seg + 1] - edges[seg])
        wp = np.asarray(self.waypoints)
        start, stop = wp[seg], wp[seg + 1]
        val = start + u[:, None] * (stop - start)
        return val[:, 0], val[:, 1]

    def midpoints(self) -> tuple[np.ndarray, np.ndarray]:
        return self.points((np.arange(self.steps) + 0.5) / self.steps)

    def reversed(self) -> "ParameterLoop":
        return replace(self, waypoints=self.waypoints[::-1],
                       segment_fractions=self.segment_fractions[::-1])

    def with_time(self, total_time: float, keep_dt: bool = True) -> "ParameterLoop":
        steps = self.steps
        if keep_dt and self.total_time > 0:
            steps = max(3, int(round(self.steps * total_time / self.total_time)))
        return replace(self, total_time=float(total_time), steps=steps)


def is_closed(waypoints) -> bool:
    (t0, p0), (t1, p1) = waypoints[0], waypoints[-1]
    if abs(t0 - t1) < _CLOSE_TOL and abs(p0 - p1) < _CLOSE_TOL:
        return True
    # at theta = 0 the dark frame does not depend on phi
    return abs(t0) < _CLOSE_TOL and abs(t1) < _CLOSE_TOL


def standard_loop(phi0: float, total_time: float = DEFAULT_TIME, steps: int = DEFAULT_STEPS,
                  theta_max: float = np.pi / 2, fractions=None) -> ParameterLoop:
    """(0,0) -> (theta_max,0) -> (theta_max,phi0) -> (0,phi0), equal thirds by default."""
    if not -2 * np.pi < phi0 < 2 * np.pi:
        raise ValueError(f"phi0 must lie in (-2pi, 2pi), got {phi0}")
    if steps < 3:
        raise ValueError("standard_loop needs at least 3 steps")
    if not total_time > 0:
        raise ValueError("total_time must be positive")
    fractions = tuple(fractions) if fractions is not None else (1 / 3, 1 / 3, 1 / 3)
    wp = ((0.0, 0.0), (theta_max, 0.0), (theta_max, phi0), (0.0, phi0))
    return ParameterLoop(wp, fractions, total_time, steps)


def _cap_integral(loop: ParameterLoop, k: float) -> float:
    # closed form of sum over segments of int (1 - cos(k theta)) dphi, theta and phi linear
    total = 0.0
    for (ta, pa), (tb, pb) in zip(loop.waypoints[:-1], loop.waypoints[1:]):
        dphi, dth = pb - pa, tb - ta
        if dphi == 0:
            continue
        if abs(dth) < 1e-14:
            mean_cos = np.cos(k * ta)
        else:
            mean_cos = (np.sin(k * tb) - np.sin(k * ta)) / (k * dth)
        total += dphi * (1.0 - mean_cos)
    return float(total)


def solid_angle(loop: ParameterLoop) -> float:
    """Line integral of (1 - cos theta) dphi, theta read as the polar angle."""
    if not is_closed(loop.waypoints):
        raise ValueError("solid angle is defined for closed loops only")
    return _cap_integral(loop, 1.0)


def dark_solid_angle(loop: ParameterLoop) -> float:
    """Solid angle swept by the dark-state Bloch vector (polar angle 2 theta).

    The dark state cos(t)|g> - sin(t) e^{i p}|a> sits at polar angle 2t on
    its Bloch sphere, so this is the line integral of (1 - cos 2 theta) dphi.
    """
    if not is_closed(loop.waypoints):
        raise ValueError("solid angle is defined for closed loops only")
    return _cap_integral(loop, 2.0)


def berry_phase(loop: ParameterLoop) -> float:
    """Adiabatic phase of the moving dark state: -int sin^2(theta) dphi."""
    return -0.5 * dark_solid_angle(loop)


def predicted_unitary(gate: str, loop: ParameterLoop) -> np.ndarray:
    """Adiabatic-limit holonomy on the logical basis for a family's gate type."""
    omega = dark_solid_angle(loop)
    if gate == "CP":
        # the |11> dark state picks up the same -omega/2 as the one-block case
        return target_gate("CP", -omega)
    return target_gate(gate, omega)


# -- propagation ------------------------------------------------------------


@dataclass(frozen=True)
class Snapshot:
    step: int
    theta: float
    phi: float
    states: np.ndarray


@dataclass(frozen=True)
class Trajectory:
    final: np.ndarray
    snapshots: tuple[Snapshot, ...]
    protected_leakage_max: float
    dynamical_phase: np.ndarray  # integral of <psi|H|psi> dt, one per column
    max_step_norm: float  # max over steps of dt * ||H||
    warnings: tuple[str, ...] = ()


_BLOCKS: "weakref.WeakKeyDictionary[HamiltonianFamily, list[np.ndarray]]" = weakref.WeakKeyDictionary()


def invariant_blocks(family: HamiltonianFamily) -> list[np.ndarray]:
    """Connected components of the coupling graph, grouped by size.

    Every H(theta, phi) of the family is block diagonal on these index sets,
    so diagonalizing each block is the same as diagonalizing H.
    """
    if family not in _BLOCKS:
        n_comp, labels = connected_components(csr_matrix(family.pattern), directed=False)
        comps = [np.flatnonzero(labels == c) for c in range(n_comp)]
        by_size: dict[int, list[np.ndarray]] = {}
        for c in comps:
            by_size.setdefault(len(c), []).append(c)
        _BLOCKS[family] = [np.stack(v) for _, v in sorted(by_size.items())]
    return _BLOCKS[family]


def _protected_leak(protected: np.ndarray, diag_mask, psi: np.ndarray) -> float:
    if diag_mask is not None:
        out = np.sum(np.abs(psi[~diag_mask]) ** 2, axis=0)
    else:
        out = np.sum(np.abs(psi - protected @ psi) ** 2, axis=0)
    return float(np.max(out))


def evolve(family: HamiltonianFamily, loop: ParameterLoop, psi0: np.ndarray, *,
           stride: int = 0, method: str = "blocked") -> Trajectory:
    """Propagate ``psi0`` (a state or matrix of column states) around ``loop``.

    ``method="dense"`` diagonalizes the full Hamiltonian at every step;
    ``"blocked"`` diagonalizes its invariant blocks (same result, faster).
    Snapshots are taken every ``stride`` steps when ``stride > 0``.
    """
    psi = np.array(psi0, dtype=complex)
    single = psi.ndim == 1
    if single:
        psi = psi[:, None]
    if psi.shape[0] != family.dim:
        raise ValueError(f"state dimension {psi.shape[0]} does not match family dim {family.dim}")
    norms = np.linalg.norm(psi, axis=0)
    if np.any(np.abs(norms - 1.0) > NORM_TOL):
        raise ValueError("initial states must be normalized")
    if method not in ("blocked", "dense"):
        raise ValueError(f"unknown method {method!r}")

    protected = family.protected
    off = protected - np.diag(np.diag(protected))
    diag_mask = np.real(np.diag(protected)) > 0.5 if not np.any(off) else None
    blocks = invariant_blocks(family) if method == "blocked" else None

    dt = loop.dt
    thetas, phis = loop.midpoints()
    snap_t, snap_p = loop.points((np.arange(loop.steps) + 1.0) / loop.steps)
    snapshots = []
    if stride > 0:
        t0, p0 = loop.origin
        snapshots.append(Snapshot(0, t0, p0, psi.copy()))
    dyn = np.zeros(psi.shape[1])
    leak_max = _protected_leak(protected, diag_mask, psi)
    max_norm = 0.0

    for k in range(loop.steps):
        h = family.hamiltonian(thetas[k], phis[k])
        # energy at the step start, weighted by dt (left-point rule on a midpoint grid)
        dyn += dt * np.real(np.sum(psi.conj() * (h @ psi), axis=0))
        if blocks is None:
            w, v = np.linalg.eigh(h)
            psi = v @ (np.exp(-1j * dt * w)[:, None] * (dag(v) @ psi))
            hnorm = float(np.max(np.abs(w)))
        else:
            hnorm = 0.0
            for idx in blocks:
                hb = h[idx[:, :, None], idx[:, None, :]]
                w, v = np.linalg.eigh(hb)
                sub = psi[idx]
                psi[idx] = v @ (np.exp(-1j * dt * w)[..., None] * (dag(v) @ sub))
                hnorm = max(hnorm, float(np.max(np.abs(w))))
        max_norm = max(max_norm, dt * hnorm)
        leak_max = max(leak_max, _protected_leak(protected, diag_mask, psi))
        if stride > 0 and ((k + 1) % stride == 0 or k + 1 == loop.steps):
            snapshots.append(Snapshot(k + 1, float(snap_t[k]), float(snap_p[k]), psi.copy()))

    notes = []
    if max_norm > 1.0:
        msg = f"coarse time step: dt*||H|| reached {max_norm:.3g} (> 1); increase steps"
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
        notes.append(msg)
    return Trajectory(psi[:, 0] if single else psi, tuple(snapshots), leak_max, dyn,
                      max_norm, tuple(notes))


# -- holonomy ---------------------------------------------------------------


@dataclass(frozen=True)
class HolonomyResult:
    unitary: np.ndarray
    raw_overlap: np.ndarray
    leakage_max: float
    dynamical_phase_check: float
    solid_angle_analytic: float
    dark_solid_angle: float = 0.0
    predicted: np.ndarray | None = None
    fidelity: float = float("nan")
    protected_leakage_max: float = 0.0
    warnings: tuple[str, ...] = ()
    trajectory: Trajectory | None = field(default=None, repr=False, compare=False)

    @property
    def phase_error(self) -> float:
        return phase_error(self.unitary, self.predicted)


def polar_unitary(m: np.ndarray) -> np.ndarray:
    """Unitary factor of the polar decomposition (closest unitary to ``m``)."""
    w, _, vh = np.linalg.svd(m)
    return w @ vh


def check_dark_at_origin(family: HamiltonianFamily, loop: ParameterLoop, logical: np.ndarray) -> None:
    h0 = family.hamiltonian(*loop.origin)
    resid = float(np.max(np.linalg.norm(h0 @ logical, axis=0)))
    if resid > DARK_TOL:
        raise ValueError(f"logical states are not dark at the loop origin (residual {resid:.3e})")


def readout(family: HamiltonianFamily, loop: ParameterLoop, logical: np.ndarray,
            final: np.ndarray, traj: Trajectory | None = None) -> HolonomyResult:
    """Holonomy from final states: polar factor of M_ab = <a_L|psi_b(T)>."""
    m = dag(logical) @ final
    u = canonical_phase(polar_unitary(m))
    leak = float(np.clip(np.max(1.0 - np.sum(np.abs(m) ** 2, axis=0)), 0.0, 1.0))
    predicted = predicted_unitary(family.gate, loop)
    return HolonomyResult(
        unitary=u,
        raw_overlap=m,
        leakage_max=leak,
        dynamical_phase_check=float(np.max(np.abs(traj.dynamical_phase))) if traj else 0.0,
        solid_angle_analytic=solid_angle(loop),
        dark_solid_angle=dark_solid_angle(loop),
        predicted=predicted,
        fidelity=gate_fidelity(u, predicted),
        protected_leakage_max=traj.protected_leakage_max if traj else 0.0,
        warnings=traj.warnings if traj else (),
        trajectory=traj,
    )


def holonomy(family: HamiltonianFamily, loop: ParameterLoop, *, stride: int = 0,
             method: str = "blocked") -> HolonomyResult:
    """Carry every logical basis state of ``family`` around ``loop`` and read out the gate."""
    logical = family.logical
    check_dark_at_origin(family, loop, logical)
    traj = evolve(family, loop, logical, stride=stride, method=method)
    return readout(family, loop, logical, traj.final, traj)


# -- adiabaticity sweep -----------------------------------------------------


@dataclass(frozen=True)
class SweepRow:
    total_time: float
    phase_error: float
    leakage_max: float
    protected_leakage_max: float
    fidelity: float


def _sweep_point(family: HamiltonianFamily, loop: ParameterLoop) -> SweepRow:
    res = holonomy(family, loop)
    return SweepRow(loop.total_time, res.phase_error, res.leakage_max,
                    res.protected_leakage_max, res.fidelity)


def _sweep_worker(args) -> SweepRow:
    name, j_scale, loop = args
    return _sweep_point(make_family(name, j_scale), loop)


def adiabaticity_sweep(family: HamiltonianFamily, loop_template: ParameterLoop, times,
                       jobs: int = 1) -> list[SweepRow]:
    """Holonomy error against the adiabatic prediction for each total time.

    The template's time step is kept fixed, so steps scale with T.  Rows come
    back ordered by T whatever the completion order.
    """
    times = [float(t) for t in times]
    if not times:
        raise ValueError("no times given")
    if any(b <= a for a, b in zip(times, times[1:])):
        raise ValueError("times must be strictly increasing")
    loops = [loop_template.with_time(t) for t in times]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_sweep_worker, [(family.name, family.j_scale, lp) for lp in loops]))
    else:
        rows = [_sweep_point(family, lp) for lp in loops]
    return sorted(rows, key=lambda r: r.total_time)


def trend_fraction(rows) -> float:
    """Fraction of consecutive (by T) pairs whose phase error decreases."""
    errs = [r.phase_error for r in sorted(rows, key=lambda r: r.total_time)]
    pairs = list(zip(errs, errs[1:]))
    if not pairs:
        return 0.0
    return sum(b < a for a, b in pairs) / len(pairs)
