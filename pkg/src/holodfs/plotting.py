"""Figures written next to the CSV/JSON outputs of the command-line runs."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def _finish(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_loop(rows, path, title=""):
    """Dark-manifold overlap and protected-subspace leakage along the loop."""
    steps = [r["step"] for r in rows]
    fig, (ax1, ax2, ax3) = plt.subplots(3, 1, figsize=(6, 7), sharex=True)
    ax1.plot(steps, [r["theta"] for r in rows], label=r"$\theta$")
    ax1.plot(steps, [r["phi"] for r in rows], label=r"$\varphi$")
    ax1.set_ylabel("control (rad)")
    ax1.legend(loc="best", frameon=False)
    ax2.plot(steps, [1.0 - r["dark_overlap"] for r in rows], color="C2")
    ax2.set_ylabel("1 - dark overlap")
    ax2.set_yscale("symlog", linthresh=1e-8)
    ax3.plot(steps, [r["leakage"] for r in rows], color="C3")
    ax3.set_ylabel("protected leakage")
    ax3.set_xlabel("step")
    if title:
        ax1.set_title(title)
    _finish(fig, path)


def plot_sweep(rows, path, title=""):
    """Holonomy phase error against total loop time, log-log."""
    fig, ax = plt.subplots(figsize=(5, 4))
    ts = [r["T"] for r in rows]
    ax.loglog(ts, [max(r["phase_error"], 1e-16) for r in rows], "o-")
    ax.set_xlabel("total time T (1/J)")
    ax.set_ylabel("phase error (rad)")
    if title:
        ax.set_title(title)
    ax.grid(True, which="both", alpha=0.3)
    _finish(fig, path)


def plot_cg(rows, path, title=""):
    """Multiplicity of each total-spin block."""
    fig, ax = plt.subplots(figsize=(5, 3.5))
    labels = [str(r["J"]) for r in rows]
    ax.bar(labels, [r["multiplicity"] for r in rows], color="C0")
    ax.set_xlabel("J")
    ax.set_ylabel("multiplicity")
    if title:
        ax.set_title(title)
    _finish(fig, path)
