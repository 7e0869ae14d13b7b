"""Snapshot loading: run manifests, CSV frames, and legacy VTK grids.

CSV is the primary interchange; files are written with 17 significant
digits, so loaded arrays reproduce the writer's values bitwise.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = ["Frame", "SnapshotSet", "read_snapshot_csv", "read_vtk_structured"]


@dataclass(frozen=True)
class Frame:
    """One snapshot: node coordinates and both fields in (M, N) layout."""

    time: float
    x: np.ndarray
    y: np.ndarray
    E: np.ndarray
    T: np.ndarray

    @property
    def shape(self):
        return self.x.shape


def read_snapshot_csv(path) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    path = Path(path)
    with path.open() as f:
        header = f.readline().strip().split(",")
        data = np.loadtxt(f, delimiter=",")
    data = np.atleast_2d(data)
    col = {name: i for i, name in enumerate(header)}
    for need in ("m", "n", "x", "y", "E", "T"):
        if need not in col:
            raise ValueError(f"{path}: snapshot CSV is missing column {need!r}")
    m = data[:, col["m"]].astype(int) - 1
    n = data[:, col["n"]].astype(int) - 1
    M, N = m.max() + 1, n.max() + 1
    out = []
    for name in ("x", "y", "E", "T"):
        arr = np.empty((M, N))
        arr[m, n] = data[:, col[name]]
        out.append(arr)
    return tuple(out)


def read_vtk_structured(path) -> tuple[np.ndarray, np.ndarray, dict[str, np.ndarray]]:
    """Minimal legacy-ASCII STRUCTURED_GRID reader (points + scalar fields)."""
    lines = Path(path).read_text().splitlines()
    dims = None
    npoints = 0
    x = y = None
    fields: dict[str, np.ndarray] = {}
    i = 0
    while i < len(lines):
        line = lines[i]
        if line.startswith("DATASET"):
            if "STRUCTURED_GRID" not in line:
                raise ValueError(f"{path}: not a structured grid")
        elif line.startswith("DIMENSIONS"):
            dims = tuple(int(v) for v in line.split()[1:])
        elif line.startswith("POINTS"):
            npoints = int(line.split()[1])
            pts = np.array(
                [[float(v) for v in lines[i + 1 + k].split()] for k in range(npoints)]
            )
            M, N = dims[0], dims[1]
            # points are written with the first grid index fastest
            x = pts[:, 0].reshape(N, M).T
            y = pts[:, 1].reshape(N, M).T
            i += npoints
        elif line.startswith("SCALARS"):
            name = line.split()[1]
            assert lines[i + 1].startswith("LOOKUP_TABLE")
            M, N = dims[0], dims[1]
            vals = np.array([float(lines[i + 2 + k]) for k in range(npoints)])
            fields[name] = vals.reshape(N, M).T
            i += npoints + 1
        i += 1
    if dims is None or x is None:
        raise ValueError(f"{path}: malformed VTK file")
    return x, y, fields


class SnapshotSet:
    """All frames of one run, loaded from its manifest."""

    def __init__(self, manifest_path):
        manifest_path = Path(manifest_path)
        if not manifest_path.exists():
            raise FileNotFoundError(f"manifest not found: {manifest_path}")
        self.manifest = json.loads(manifest_path.read_text())
        self.base = manifest_path.parent
        self.times = list(self.manifest["times"])
        self._paths = [p[0] for p in self.manifest["snapshots"]]
        self._frames: dict[int, Frame] = {}
        if len(self.times) != len(self._paths):
            raise ValueError("manifest times and snapshot lists disagree")

    def _resolve(self, p):
        p = Path(p)
        return p if p.is_absolute() and p.exists() else self.base / Path(p).name

    def frame_at(self, time: float, atol: float = 1e-9) -> Frame:
        for i, t in enumerate(self.times):
            if abs(t - time) <= atol:
                return self.frame(i)
        raise KeyError(f"no snapshot at t = {time}; available: {self.times}")

    def frame(self, index: int) -> Frame:
        if index not in self._frames:
            x, y, E, T = read_snapshot_csv(self._resolve(self._paths[index]))
            frame = Frame(self.times[index], x, y, E, T)
            if self._frames:
                first = next(iter(self._frames.values()))
                if frame.shape != first.shape:
                    raise ValueError("frame grid shapes differ across times")
            self._frames[index] = frame
        return self._frames[index]

    def __len__(self):
        return len(self.times)
