"""Command-line harness: ``holodfs {verify,loop-sim,sweep,cg,noise-test}``.

Exit codes: 0 success, 1 invariant failure, 2 configuration error.  JSON is
written with sorted keys and numbers rounded to 12 significant digits; CSV has
a header row and LF line endings.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, fields
from fractions import Fraction
from pathlib import Path

import numpy as np

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2
COMMANDS = ("verify", "loop-sim", "sweep", "cg", "noise-test")
LOOP_FAMILIES = ("h_z", "h_x", "h_4", "h_ns", "h_ns_x")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    family: str = "h_z"
    phi0: float = math.pi
    total_time: float = 200.0
    steps: int = 20_000
    j_scale: float = 1.0
    seed: int = 0x5EED
    output_path: str | None = None
    times: tuple[float, ...] = ()
    samples: int = 4096
    qubits: int = 5
    stride: int = 100
    jobs: int = 1
    json_path: str | None = None
    figure_path: str | None = None

    @classmethod
    def from_mapping(cls, data: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config fields: {', '.join(unknown)}")
        if "command" not in data:
            raise ConfigError("config needs a 'command' field")
        data = dict(data)
        if "times" in data:
            data["times"] = tuple(data["times"])
        cfg = cls(**data)
        cfg.validate()
        return cfg

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        for name in ("phi0", "total_time", "j_scale"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or not math.isfinite(v):
                raise ConfigError(f"{name} must be a finite number")
        for name in ("total_time", "j_scale"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        for name in ("steps", "samples", "qubits", "seed", "jobs", "stride"):
            v = getattr(self, name)
            if not isinstance(v, int) or isinstance(v, bool):
                raise ConfigError(f"{name} must be an integer")
        if self.steps < 1 or self.samples < 1 or self.jobs < 1 or self.stride < 1:
            raise ConfigError("steps, samples, jobs and stride must be positive")
        if self.seed < 0:
            raise ConfigError("seed must be non-negative")
        if any(not math.isfinite(t) or t <= 0 for t in self.times):
            raise ConfigError("times must be finite and positive")


# -- output helpers ---------------------------------------------------------


def _num(x: float) -> float:
    x = float(f"{float(x):.12g}")
    return 0.0 if x == 0 else x


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return {"re": _clean(obj.real.tolist()), "im": _clean(obj.imag.tolist())}
        return _clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    if isinstance(obj, complex):
        return {"re": _num(obj.real), "im": _num(obj.imag)}
    return obj


def dumps(obj) -> str:
    return json.dumps(_clean(obj), sort_keys=True, indent=2) + "\n"


def to_csv(rows: list[dict], columns: list[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([f"{r[c]:.12g}" if isinstance(r[c], float) else r[c] for c in columns])
    return buf.getvalue()


def _write(path: str | None, text: str) -> None:
    if path:
        Path(path).write_text(text, newline="")


def _json_out(cfg: RunConfig, payload: dict) -> None:
    text = dumps(payload)
    sys.stdout.write(text)
    _write(cfg.json_path, text)


# -- commands ---------------------------------------------------------------


def cmd_verify(cfg: RunConfig, corrupt: str | None = None) -> int:
    from .verify import run_suite

    try:
        checks = run_suite(corrupt=corrupt)
    except KeyError as exc:
        raise ConfigError(str(exc.args[0])) from None
    failed = [c.name for c in checks if not c.passed]
    report = {
        "passed": not failed,
        "failed": failed,
        "entries": [
            {"name": c.name, "deviation": c.deviation, "tolerance": c.tolerance,
             "passed": c.passed, "summary": c.summary(),
             **({"value": c.value} if c.value is not None else {})}
            for c in checks
        ],
    }
    _json_out(cfg, report)
    _write(cfg.output_path, dumps(report))
    return EXIT_OK if not failed else EXIT_FAIL


def _loop_setup(cfg: RunConfig):
    from .adiabatic import standard_loop
    from .hams import make_family

    if cfg.family not in LOOP_FAMILIES:
        raise ConfigError(f"family must be one of {LOOP_FAMILIES}, got {cfg.family!r}")
    try:
        loop = standard_loop(cfg.phi0, cfg.total_time, cfg.steps)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return make_family(cfg.family, cfg.j_scale), loop


def cmd_loop_sim(cfg: RunConfig) -> int:
    import warnings

    from .adiabatic import check_dark_at_origin, evolve, readout
    from .gates import gate_fidelity, target_gate

    fam, loop = _loop_setup(cfg)
    check_dark_at_origin(fam, loop, fam.logical)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        traj = evolve(fam, loop, fam.logical, stride=cfg.stride)
    res = readout(fam, loop, fam.logical, traj.final, traj)

    rows = []
    for snap in traj.snapshots:
        dark = fam.dark_basis(snap.theta, snap.phi)
        inside = np.sum(np.abs(dark.conj().T @ snap.states) ** 2, axis=0)
        outside = np.sum(np.abs(snap.states - fam.protected @ snap.states) ** 2, axis=0)
        rows.append({"step": snap.step, "theta": snap.theta, "phi": snap.phi,
                     "leakage": float(np.max(outside)), "dark_overlap": float(np.min(inside))})
    _write(cfg.output_path, to_csv(rows, ["step", "theta", "phi", "leakage", "dark_overlap"]))

    nominal = target_gate(fam.gate, res.solid_angle_analytic)
    payload = {
        "family": fam.name,
        "gate": fam.gate,
        "logical_labels": list(fam.logical_labels),
        "phi0": cfg.phi0,
        "total_time": cfg.total_time,
        "steps": cfg.steps,
        "j_scale": cfg.j_scale,
        "measured": res.unitary,
        "target": nominal,
        "fidelity": gate_fidelity(res.unitary, nominal),
        "solid_angle": res.solid_angle_analytic,
        "predicted": res.predicted,
        "predicted_fidelity": res.fidelity,
        "phase_error": res.phase_error,
        "dark_solid_angle": res.dark_solid_angle,
        "leakage_max": res.leakage_max,
        "protected_leakage_max": res.protected_leakage_max,
        "dynamical_phase": res.dynamical_phase_check,
        "max_step_norm": traj.max_step_norm,
        "warnings": list(res.warnings),
    }
    _json_out(cfg, payload)
    if cfg.figure_path:
        from .plotting import plot_loop

        plot_loop(_clean(rows), cfg.figure_path, title=f"{fam.name}, phi0={cfg.phi0:.4g}")
    return EXIT_OK


def cmd_sweep(cfg: RunConfig) -> int:
    from .adiabatic import adiabaticity_sweep, trend_fraction

    if len(cfg.times) < 2:
        raise ConfigError("sweep needs at least two times")
    times = sorted(cfg.times)
    if len(set(times)) != len(times):
        raise ConfigError("sweep times must be distinct")
    fam, loop = _loop_setup(cfg)
    sweep = adiabaticity_sweep(fam, loop, times, jobs=cfg.jobs)
    rows = [{"T": r.total_time, "phase_error": r.phase_error, "leakage": r.protected_leakage_max,
             "logical_leakage": r.leakage_max, "fidelity": r.fidelity} for r in sweep]
    _write(cfg.output_path, to_csv(rows, ["T", "phase_error", "leakage", "logical_leakage", "fidelity"]))
    payload = {"family": fam.name, "phi0": cfg.phi0, "dt": loop.dt, "rows": rows,
               "trend_fraction": trend_fraction(sweep)}
    _json_out(cfg, payload)
    if cfg.figure_path:
        from .plotting import plot_sweep

        plot_sweep(_clean(rows), cfg.figure_path, title=f"{fam.name}, phi0={cfg.phi0:.4g}")
    return EXIT_OK


def _spin_label(j: float) -> str:
    return str(Fraction(j).limit_denominator(2))


def cmd_cg(cfg: RunConfig) -> int:
    from .ns import cg_decompose

    try:
        d = cg_decompose(cfg.qubits)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    rows = [{"J": _spin_label(b.j), "multiplicity": b.multiplicity, "irrep_dim": len(b.ms),
             "block_dim": b.multiplicity * len(b.ms)} for b in d.blocks]
    _write(cfg.output_path, to_csv(rows, ["J", "multiplicity", "irrep_dim", "block_dim"]))
    payload = {"qubits": cfg.qubits, "blocks": rows,
               "dimension": sum(r["block_dim"] for r in rows)}
    _json_out(cfg, payload)
    if cfg.figure_path:
        from .plotting import plot_cg

        plot_cg(rows, cfg.figure_path, title=f"{cfg.qubits} qubits")
    return EXIT_OK


def cmd_noise_test(cfg: RunConfig) -> int:
    from .dfs import DephasingEnsemble, build_code, dephase
    from .hams import plus_minus
    from .qops import ket

    ens = DephasingEnsemble(cfg.samples, cfg.seed)
    code = build_code(1)
    plus, _ = plus_minus(code)
    ghz = (ket("0000") + ket("1111")) / np.sqrt(2)
    payload = {
        "samples": cfg.samples,
        "seed": cfg.seed,
        "in_code_state": "(|1>_L + |0>_L)/sqrt2",
        "out_of_code_state": "(|0000> + |1111>)/sqrt2",
        "in_code_fidelity": dephase(plus, ens),
        "out_of_code_fidelity": dephase(ghz, ens),
    }
    text = dumps(payload)
    sys.stdout.write(text)
    _write(cfg.output_path, text)
    return EXIT_OK


# -- argument parsing -------------------------------------------------------


def _times(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad times list {text!r}") from None


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="holodfs", description="Holonomic gates in decoherence-free subspaces.")
    p.add_argument("--config", help="JSON run configuration (strict schema)")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    v = sub.add_parser("verify", help="run every invariant suite")
    v.add_argument("--json", dest="json_path")
    v.add_argument("--corrupt", help=argparse.SUPPRESS)

    def loop_args(sp, sweep=False):
        sp.add_argument("--family", required=True, choices=LOOP_FAMILIES)
        sp.add_argument("--phi0", type=float, default=math.pi)
        if sweep:
            sp.add_argument("--times", type=_times, required=True)
            sp.add_argument("--jobs", type=int, default=1)
        else:
            sp.add_argument("--time", dest="total_time", type=float, default=200.0)
            sp.add_argument("--stride", type=int, default=100)
        sp.add_argument("--steps", type=int, default=20_000,
                        help="steps at the reference time (sweep keeps dt fixed)")
        sp.add_argument("--j-scale", type=float, default=1.0)
        sp.add_argument("--out", dest="output_path")
        sp.add_argument("--json", dest="json_path")
        sp.add_argument("--figure", dest="figure_path")

    loop_args(sub.add_parser("loop-sim", help="one adiabatic loop, CSV trace + holonomy JSON"))
    loop_args(sub.add_parser("sweep", help="holonomy error against total time"), sweep=True)

    c = sub.add_parser("cg", help="Clebsch-Gordan multiplicities")
    c.add_argument("--qubits", type=int, required=True)
    c.add_argument("--out", dest="output_path")
    c.add_argument("--figure", dest="figure_path")

    n = sub.add_parser("noise-test", help="collective dephasing fidelities")
    n.add_argument("--samples", type=int, default=4096)
    n.add_argument("--seed", type=int, default=0x5EED)
    n.add_argument("--out", dest="output_path")
    return p


def _config_from_args(ns: argparse.Namespace) -> RunConfig:
    data = {k: v for k, v in vars(ns).items() if k not in ("config", "corrupt") and v is not None}
    cfg = RunConfig(**data)
    if cfg.command == "sweep":
        # keep the time step of the reference (time, steps) pair
        cfg.total_time = 200.0
    cfg.validate()
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse usage errors and --help
        return exc.code if isinstance(exc.code, int) else EXIT_CONFIG
    corrupt = getattr(args, "corrupt", None)
    try:
        if args.config:
            try:
                data = json.loads(Path(args.config).read_text())
            except (OSError, json.JSONDecodeError) as exc:
                raise ConfigError(f"cannot read config: {exc}") from None
            if not isinstance(data, dict):
                raise ConfigError("config must be a JSON object")
            cfg = RunConfig.from_mapping(data)
        elif args.command is None:
            parser.print_usage(sys.stderr)
            return EXIT_CONFIG
        else:
            cfg = _config_from_args(args)
        handler = {"verify": lambda c: cmd_verify(c, corrupt), "loop-sim": cmd_loop_sim,
                   "sweep": cmd_sweep, "cg": cmd_cg, "noise-test": cmd_noise_test}[cfg.command]
        return handler(cfg)
    except ConfigError as exc:
        print(f"holodfs: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"holodfs: invalid run: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
