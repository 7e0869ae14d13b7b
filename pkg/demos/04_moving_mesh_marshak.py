# The same wave on a moving mesh
# ===============================
#
# With mesh motion on, nodes chase the front: the monitor is rebuilt from
# the energy field every step and the mesh relaxes toward it before each
# implicit solve.  Compare the cell widths near the front with the uniform
# spacing of demo 03.

from dataclasses import replace

import numpy as np

from radmesh import preset, run_simulation
from radmesh.diagnostics import front_position, min_cell_width_near
from radmesh.io import read_snapshot_csv

cfg = replace(
    preset("example1"),
    M=41, N=41,
    t_end=0.3,
    snapshot_times=(0.1, 0.2, 0.3),
    out_dir="demo_out/moving_marshak",
)
art = run_simulation(cfg)

print("  time   front x   min cell width near front")
for t, (csv_path, _) in zip(art.times, art.snapshot_paths):
    x, y, E, T = read_snapshot_csv(csv_path)
    fr = front_position(x, y, T)
    if np.isfinite(fr):
        w = min_cell_width_near(x, fr)
        print(f"  {t:4.2f}   {fr:.4f}    {w:.4f} (uniform would be {1/40:.4f})")

worst_jac = min(r["min_jac"] for r in art.step_records)
print("\nmesh stayed valid: min J over the run =", round(worst_jac, 4))
print("phase timings [s]:", {k: round(v, 2) for k, v in art.timings.items()})
