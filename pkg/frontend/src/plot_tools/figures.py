"""Standard figure styles: field surfaces, mesh wireframes, contour comparison."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .loader import Frame

__all__ = ["plot_surface", "plot_mesh", "plot_contour_compare", "DEFAULT_LEVELS"]

DEFAULT_LEVELS = tuple(np.round(np.arange(0.1, 1.0, 0.1), 1))


def plot_surface(frame: Frame, field: str, out_path, title: str | None = None) -> Path:
    """3-D surface of E or T over the physical domain."""
    if not hasattr(frame, field):
        raise ValueError(f"frame has no field {field!r}")
    values = getattr(frame, field)
    fig = plt.figure(figsize=(6, 5))
    ax = fig.add_subplot(111, projection="3d")
    ax.plot_surface(frame.x, frame.y, values, cmap="inferno", linewidth=0, antialiased=True)
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_zlabel(field)
    ax.set_title(title or f"{field} at t = {frame.time:g}")
    out_path = Path(out_path)
    fig.savefig(out_path, dpi=130, bbox_inches="tight")
    plt.close(fig)
    return out_path


def plot_mesh(frame: Frame, out_path, title: str | None = None) -> Path:
    """Wireframe of the mesh lines in both grid directions."""
    fig, ax = plt.subplots(figsize=(5.2, 5))
    M, N = frame.shape
    for m in range(M):
        ax.plot(frame.x[m, :], frame.y[m, :], "k-", linewidth=0.4)
    for n in range(N):
        ax.plot(frame.x[:, n], frame.y[:, n], "k-", linewidth=0.4)
    ax.set_aspect("equal")
    ax.set_xlim(0, 1)
    ax.set_ylim(0, 1)
    ax.set_title(title or f"mesh at t = {frame.time:g}")
    out_path = Path(out_path)
    fig.savefig(out_path, dpi=130, bbox_inches="tight")
    plt.close(fig)
    return out_path


def plot_contour_compare(
    frame_a: Frame,
    frame_b: Frame,
    out_path,
    levels=DEFAULT_LEVELS,
    labels=("run A", "run B"),
    field: str = "T",
) -> Path:
    """Side-by-side temperature contours of two runs at the same time."""
    if abs(frame_a.time - frame_b.time) > 1e-9:
        raise ValueError(
            f"frames are at different times: {frame_a.time} vs {frame_b.time}"
        )
    fig, axes = plt.subplots(1, 2, figsize=(10, 4.6), sharey=True)
    for ax, frame, label in zip(axes, (frame_a, frame_b), labels):
        cs = ax.contour(frame.x, frame.y, getattr(frame, field), levels=list(levels))
        ax.clabel(cs, inline=True, fontsize=6)
        ax.set_aspect("equal")
        ax.set_title(f"{label}: {field} at t = {frame.time:g}")
        ax.set_xlabel("x")
    axes[0].set_ylabel("y")
    out_path = Path(out_path)
    fig.savefig(out_path, dpi=130, bbox_inches="tight")
    plt.close(fig)
    return out_path
