"""Figure rendering for experiment reports.

Renders PNGs next to the CSV exports: iterate traces for scalar runs,
contour plots with search paths for two-dimensional runs, tap-weight traces
for the filter identification runs.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .experiments import ExperimentSpec, RunReport, build_function, contour_grid
from .functions import MultivariateFunction
from .lms import FilterScenario, TapTrajectory

__all__ = [
    "render_experiment_figures",
    "plot_scalar_runs",
    "plot_contour_with_paths",
    "plot_lms_weights",
]


def plot_scalar_runs(report: RunReport, path: Path,
                     target: float | None = None) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    for res in report.results:
        if res.trajectory is None or isinstance(res.trajectory, TapTrajectory):
            continue
        ax.plot(res.trajectory.iterates[:, 0], label=res.label)
    if target is not None:
        ax.axhline(target, color="k", lw=0.8, ls="--")
    ax.set_xlabel("iteration k")
    ax.set_ylabel("$x_k$")
    ax.set_title(report.experiment_id)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_coordinate_traces(report: RunReport, path: Path) -> None:
    dims = max(
        (res.trajectory.dimension for res in report.results
         if res.trajectory is not None
         and not isinstance(res.trajectory, TapTrajectory)),
        default=0,
    )
    fig, axes = plt.subplots(dims, 1, figsize=(6, 3 * dims), sharex=True)
    axes = np.atleast_1d(axes)
    for res in report.results:
        if res.trajectory is None or isinstance(res.trajectory, TapTrajectory):
            continue
        for j in range(res.trajectory.dimension):
            axes[j].plot(res.trajectory.iterates[:, j], label=res.label)
    for j, ax in enumerate(axes):
        ax.set_ylabel(f"$x_{{{j + 1}}}$")
        ax.legend(fontsize=8)
    axes[-1].set_xlabel("iteration k")
    axes[0].set_title(report.experiment_id)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_contour_with_paths(f: MultivariateFunction, report: RunReport,
                            path: Path, levels: int = 30) -> None:
    pts = [
        res.trajectory.iterates
        for res in report.results
        if res.trajectory is not None
        and not isinstance(res.trajectory, TapTrajectory)
    ]
    if not pts:
        return
    allpts = np.vstack(pts)
    pad = 0.5
    bounds = (
        (allpts[:, 0].min() - pad, allpts[:, 0].max() + pad),
        (allpts[:, 1].min() - pad, allpts[:, 1].max() + pad),
    )
    X, Y, Z = contour_grid(f, bounds, 120)
    fig, ax = plt.subplots(figsize=(6, 5))
    ax.contour(X, Y, Z, levels=levels, linewidths=0.5, colors="gray")
    for res in report.results:
        if res.trajectory is None or isinstance(res.trajectory, TapTrajectory):
            continue
        it = res.trajectory.iterates
        ax.plot(it[:, 0], it[:, 1], label=res.label)
        ax.plot(it[0, 0], it[0, 1], "k.", ms=6)
    ax.set_xlabel("$x$")
    ax.set_ylabel("$y$")
    ax.set_title(report.experiment_id)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_lms_weights(report: RunReport, true_weights, path: Path) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    for res in report.results:
        if not isinstance(res.trajectory, TapTrajectory):
            continue
        for j in range(res.trajectory.weights.shape[1]):
            ax.plot(res.trajectory.weights[:, j],
                    label=f"{res.label} $w_{{{j + 1}}}$", lw=0.9)
    for w in true_weights:
        ax.axhline(w, color="k", lw=0.8, ls="--")
    ax.set_xlabel("sample k")
    ax.set_ylabel("tap weight")
    ax.set_title(report.experiment_id)
    ax.legend(fontsize=7, ncol=3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_experiment_figures(spec: ExperimentSpec, report: RunReport,
                              out_dir: Path) -> list[Path]:
    """Render the figures appropriate to the experiment's run kinds."""
    out_dir = Path(out_dir)
    written: list[Path] = []
    first = build_function(spec.runs[0].function)
    if isinstance(first, FilterScenario):
        p = out_dir / f"{spec.id}-weights.png"
        plot_lms_weights(report, first.true_weights, p)
        written.append(p)
    elif isinstance(first, MultivariateFunction):
        p = out_dir / f"{spec.id}-traces.png"
        plot_coordinate_traces(report, p)
        written.append(p)
        p = out_dir / f"{spec.id}-contour.png"
        plot_contour_with_paths(first, report, p)
        written.append(p)
    else:
        target = (spec.runs[0].band_target[0]
                  if spec.runs[0].band_target else None)
        p = out_dir / f"{spec.id}-iterates.png"
        plot_scalar_runs(report, p, target=target)
        written.append(p)
    return written
