# One-level versus two-level mesh movement
# =========================================
#
# The two-level strategy moves a coarse mesh and solves the physics on its
# uniform refinement, cutting the adaptation cost while keeping the fine
# resolution where it matters.  This compares both on a short window and
# prints the timing table.

from dataclasses import replace

from radmesh import preset, run_simulation, timing_report

window = dict(t_end=0.1, snapshot_times=(0.1,), pre_adapt_cycles=3)

one_level = run_simulation(
    replace(preset("example1"), M=41, N=41, out_dir="demo_out/one_level", **window)
)
two_level = run_simulation(
    replace(
        preset("example1"),
        M=41, N=41, two_level=True, refine_factor=2, coarse_M=21, coarse_N=21,
        out_dir="demo_out/two_level", **window,
    )
)
fixed = run_simulation(
    replace(
        preset("example1"), M=41, N=41, mesh_mode="fixed-uniform",
        out_dir="demo_out/fixed_41", **window,
    )
)

print(timing_report([fixed, one_level, two_level]))
m1 = one_level.timings["mesh"]
m2 = two_level.timings["mesh"]
print(f"mesh-step time: one-level {m1:.2f}s vs two-level {m2:.2f}s "
      f"({m2 / m1:.0%} of one-level)")
