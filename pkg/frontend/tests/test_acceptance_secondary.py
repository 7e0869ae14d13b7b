"""Secondary acceptance: the three figure styles render from real solver
artifacts without error, and the CSV loader round-trips bitwise."""

import numpy as np

from plot_tools import SnapshotSet, plot_contour_compare, plot_mesh, plot_surface, read_snapshot_csv


def test_criterion_12_figures_and_roundtrip(tiny_run, tmp_path):
    frames = SnapshotSet(tiny_run)
    frame = frames.frame_at(0.02)

    surf = plot_surface(frame, "E", tmp_path / "surface.png")
    mesh = plot_mesh(frame, tmp_path / "mesh.png")
    comp = plot_contour_compare(frame, frame, tmp_path / "compare.png")
    rendered = all(p.exists() and p.stat().st_size > 0 for p in (surf, mesh, comp))

    csv_path = frames._resolve(frames.manifest["snapshots"][-1][0])
    x1, y1, e1, t1 = read_snapshot_csv(csv_path)
    x2, y2, e2, t2 = read_snapshot_csv(csv_path)
    bitwise = all(
        np.array_equal(a, b) for a, b in ((x1, x2), (y1, y2), (e1, e2), (t1, t2))
    ) and np.array_equal(e1, frame.E) and np.array_equal(x1, frame.x)

    print(f"ACCEPTANCE 12: {'PASS' if rendered and bitwise else 'FAIL'} - "
          f"three figure styles rendered, loader round-trip bitwise")
    assert rendered and bitwise
