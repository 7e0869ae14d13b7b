"""Plain-text output: mesh/solution CSV, legacy-ASCII VTK structured grids,
cutoff and timing logs, and the run manifest.

Floats are written with 17 significant digits so that reading a file back
reproduces the arrays bitwise.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

__all__ = [
    "write_mesh_csv",
    "read_mesh_csv",
    "write_snapshot_csv",
    "write_monitor_csv",
    "read_snapshot_csv",
    "write_vtk",
    "write_cutoff_log",
    "write_timing_csv",
    "write_manifest",
    "read_manifest",
]

_FMT = "%.17g"


def _grid_rows(mesh, fields: dict[str, np.ndarray]) -> tuple[str, list[str]]:
    M, N = mesh.grid.shape
    names = ["m", "n", "x", "y"] + list(fields)
    header = ",".join(names)
    cols = [mesh.x, mesh.y] + [fields[k] for k in fields]
    lines = []
    for m in range(M):
        for n in range(N):
            vals = ",".join(_FMT % c[m, n] for c in cols)
            lines.append(f"{m + 1},{n + 1},{vals}")
    return header, lines


def write_mesh_csv(mesh, path) -> Path:
    """Mesh snapshot as CSV with 1-based (m, n) indices."""
    path = Path(path)
    header, lines = _grid_rows(mesh, {})
    path.write_text(header + "\n" + "\n".join(lines) + "\n")
    return path


def write_snapshot_csv(mesh, E: np.ndarray, T: np.ndarray, path) -> Path:
    path = Path(path)
    header, lines = _grid_rows(mesh, {"E": E, "T": T})
    path.write_text(header + "\n" + "\n".join(lines) + "\n")
    return path


def write_monitor_csv(mesh, monitor, path) -> Path:
    """Monitor tensor snapshot (m11, m12, m22 per node) as CSV."""
    path = Path(path)
    header, lines = _grid_rows(
        mesh, {"m11": monitor.m11, "m12": monitor.m12, "m22": monitor.m22}
    )
    path.write_text(header + "\n" + "\n".join(lines) + "\n")
    return path


def _read_grid_csv(path, value_names):
    """Shared CSV reader returning (x, y, values...) as (M, N) arrays."""
    path = Path(path)
    with path.open() as f:
        header = f.readline().strip().split(",")
        data = np.loadtxt(f, delimiter=",")
    data = np.atleast_2d(data)
    col = {name: i for i, name in enumerate(header)}
    m = data[:, col["m"]].astype(int) - 1
    n = data[:, col["n"]].astype(int) - 1
    M, N = m.max() + 1, n.max() + 1
    out = []
    for name in ("x", "y", *value_names):
        arr = np.empty((M, N))
        arr[m, n] = data[:, col[name]]
        out.append(arr)
    return out


def read_mesh_csv(path) -> tuple[np.ndarray, np.ndarray]:
    x, y = _read_grid_csv(path, ())
    return x, y


def read_snapshot_csv(path) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    x, y, E, T = _read_grid_csv(path, ("E", "T"))
    return x, y, E, T


def write_vtk(mesh, point_data: dict[str, np.ndarray], path, title="snapshot") -> Path:
    """Legacy-ASCII VTK structured grid; points written m-fastest."""
    path = Path(path)
    M, N = mesh.grid.shape
    lines = [
        "# vtk DataFile Version 3.0",
        title,
        "ASCII",
        "DATASET STRUCTURED_GRID",
        f"DIMENSIONS {M} {N} 1",
        f"POINTS {M * N} double",
    ]
    for n in range(N):
        for m in range(M):
            lines.append(f"{_FMT % mesh.x[m, n]} {_FMT % mesh.y[m, n]} 0")
    if point_data:
        lines.append(f"POINT_DATA {M * N}")
        for name, arr in point_data.items():
            lines.append(f"SCALARS {name} double 1")
            lines.append("LOOKUP_TABLE default")
            for n in range(N):
                for m in range(M):
                    lines.append(_FMT % arr[m, n])
    path.write_text("\n".join(lines) + "\n")
    return path


def write_cutoff_log(events, path) -> Path:
    path = Path(path)
    lines = ["step,time,field,nodes_clipped"]
    for e in events:
        lines.append(f"{e.step},{_FMT % e.time},{e.field},{e.count}")
    path.write_text("\n".join(lines) + "\n")
    return path


def write_timing_csv(rows, path=None) -> str:
    """Timing table with the schema mode, fine mesh, coarse mesh, total, ratio."""
    lines = ["mode,fine_mesh,coarse_mesh,total_seconds,ratio"]
    for r in rows:
        lines.append(
            f"{r['mode']},{r['fine_mesh']},{r['coarse_mesh']},"
            f"{r['total_seconds']:.3f},{r['ratio']}"
        )
    text = "\n".join(lines) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text


def write_manifest(manifest: dict, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


def read_manifest(path) -> dict:
    return json.loads(Path(path).read_text())
