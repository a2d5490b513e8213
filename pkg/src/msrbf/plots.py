"""Figure rendering for solve reports: solution, point-wise error, coefficient."""

from __future__ import annotations

import os
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .problems import make_problem

# keep rendered grids modest; a million-point pcolormesh buys nothing at PNG scale
_PLOT_N_1D = 2001
_PLOT_N_2D = 201


def _tag(config):
    bits = [config.problem]
    for k in sorted(config.params):
        bits.append(f"{k}{config.params[k]:g}")
    return "-".join(bits)


def save_report_figures(report, outdir, samples=None):
    """Render the report's solution/error/coefficient panels as PNG files.

    ``samples`` takes (axes, u_num, u_ref) as produced by
    :func:`msrbf.runner.solution_samples`; when omitted they are
    recomputed at plotting resolution.  Returns the written paths.
    """
    from .runner import solution_samples

    os.makedirs(outdir, exist_ok=True)
    config = report.config
    problem = make_problem(config.problem, **config.params)
    if samples is None:
        n = _PLOT_N_1D if problem.dim == 1 else _PLOT_N_2D
        samples = solution_samples(report, n=n)
    axes, u_num, u_ref = samples
    tag = _tag(config)
    paths = []

    if problem.dim == 1:
        x = axes[0]
        fig, ax = plt.subplots(figsize=(6, 4))
        ax.plot(x, u_ref, "k-", lw=1.5, label="reference")
        ax.plot(x, u_num, "r--", lw=1.0, label="solver")
        ax.set_xlabel("x")
        ax.set_ylabel("u")
        ax.legend()
        ax.set_title(tag)
        paths.append(_save(fig, outdir, f"{tag}-solution.png"))

        fig, ax = plt.subplots(figsize=(6, 4))
        ax.semilogy(x, np.abs(u_num - u_ref) + 1e-20, "b-", lw=0.8)
        ax.set_xlabel("x")
        ax.set_ylabel("|error|")
        ax.set_title(f"{tag} point-wise error")
        paths.append(_save(fig, outdir, f"{tag}-error.png"))

        fig, ax = plt.subplots(figsize=(6, 4))
        ax.plot(x, problem.coefficient(x), "g-", lw=0.8)
        ax.set_xlabel("x")
        ax.set_ylabel("A(x)")
        ax.set_title(f"{tag} coefficient")
        paths.append(_save(fig, outdir, f"{tag}-coefficient.png"))
        return paths

    x, y = axes
    extent = (x[0], x[-1], y[0], y[-1])

    fig, axs = plt.subplots(1, 2, figsize=(10, 4), constrained_layout=True)
    for ax, field, title in ((axs[0], u_num, "solver"), (axs[1], u_ref, "reference")):
        im = ax.imshow(field.T, origin="lower", extent=extent, cmap="viridis")
        ax.set_title(title)
        fig.colorbar(im, ax=ax, shrink=0.85)
    fig.suptitle(tag)
    paths.append(_save(fig, outdir, f"{tag}-solution.png"))

    fig, ax = plt.subplots(figsize=(6, 4.5), constrained_layout=True)
    im = ax.imshow(np.abs(u_num - u_ref).T, origin="lower", extent=extent, cmap="magma")
    fig.colorbar(im, ax=ax)
    ax.set_title(f"{tag} point-wise error")
    paths.append(_save(fig, outdir, f"{tag}-error.png"))

    gx, gy = np.meshgrid(x, y, indexing="ij")
    fig, ax = plt.subplots(figsize=(6, 4.5), constrained_layout=True)
    im = ax.imshow(problem.coefficient(gx, gy).T, origin="lower", extent=extent, cmap="cividis")
    fig.colorbar(im, ax=ax)
    ax.set_title(f"{tag} coefficient")
    paths.append(_save(fig, outdir, f"{tag}-coefficient.png"))
    return paths


def _save(fig, outdir, name):
    path = Path(outdir) / name
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
