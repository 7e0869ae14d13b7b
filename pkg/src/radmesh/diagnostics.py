"""Probes used to compare runs: wave-front position and mesh concentration."""

from __future__ import annotations

import numpy as np
from scipy.interpolate import griddata

__all__ = ["front_position", "min_cell_width_near"]


def front_position(
    x: np.ndarray,
    y: np.ndarray,
    field: np.ndarray,
    level: float = 0.5,
    y_line: float = 0.5,
    samples: int = 2001,
) -> float:
    """x-coordinate where the field first drops through `level` along y = y_line.

    The field is interpolated linearly from the (possibly curvilinear) mesh
    onto a dense horizontal sample line; returns NaN when no crossing exists.
    """
    xs = np.linspace(0.0, 1.0, samples)
    pts = np.column_stack([x.ravel(), y.ravel()])
    line = griddata(pts, field.ravel(), (xs, np.full_like(xs, y_line)), method="linear")
    good = np.isfinite(line)
    xs, line = xs[good], line[good]
    above = line >= level
    cross = np.where(above[:-1] & ~above[1:])[0]
    if cross.size == 0:
        return float("nan")
    i = int(cross[0])
    f0, f1 = line[i], line[i + 1]
    w = (f0 - level) / (f0 - f1)
    return float(xs[i] + w * (xs[i + 1] - xs[i]))


def min_cell_width_near(
    x: np.ndarray, x_center: float, n_row: int | None = None, window: float = 0.1
) -> float:
    """Smallest xi-direction cell width within `window` of x_center along one
    grid row (the middle row by default)."""
    if n_row is None:
        n_row = x.shape[1] // 2
    col = x[:, n_row]
    widths = np.diff(col)
    mids = 0.5 * (col[:-1] + col[1:])
    near = np.abs(mids - x_center) <= window
    if not np.any(near):
        return float("nan")
    return float(widths[near].min())
