"""Command-line entry point: run experiments, list presets, report timings."""

from __future__ import annotations

import argparse
import sys

from .driver import (
    config_from_sources,
    load_run_manifest,
    parse_config_file,
    preset,
    run_simulation,
    timing_report,
)
from .physics import PRESET_NAMES


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="radmesh", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a simulation")
    run.add_argument("--config", help="flat key = value configuration file")
    run.add_argument("--preset", choices=PRESET_NAMES)
    run.add_argument("--mesh", help="physics mesh, e.g. 41x41")
    run.add_argument("--coarse", help="coarse mesh for two-level runs, e.g. 41x41")
    run.add_argument("--two-level", type=int, metavar="R", help="refinement factor")
    run.add_argument("--fixed-mesh", action="store_true", help="disable mesh motion")
    run.add_argument("--t-end", type=float)
    run.add_argument("--dt", type=float)
    run.add_argument("--out", help="output directory")

    sub.add_parser("presets", help="list the built-in experiments")

    rep = sub.add_parser("report", help="emit a timing CSV from run manifests")
    rep.add_argument("manifests", nargs="+", help="manifest.json files of finished runs")
    rep.add_argument("--out", help="write the CSV here instead of stdout")
    return p


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "presets":
            for name in PRESET_NAMES:
                cfg = preset(name)
                print(
                    f"{name}: bc={cfg.bc_kind}, t_end={cfg.t_end}, "
                    f"snapshots={','.join(str(t) for t in cfg.snapshot_times)}"
                )
            return 0

        if args.command == "report":
            manifests = [load_run_manifest(p) for p in args.manifests]
            text = timing_report(manifests, args.out)
            if args.out is None:
                print(text, end="")
            return 0

        file_values = parse_config_file(args.config) if args.config else {}
        overrides = dict(
            preset=args.preset,
            t_end=args.t_end,
            dt=args.dt,
            out_dir=args.out,
        )
        if args.mesh:
            overrides["mesh"] = tuple(int(v) for v in args.mesh.lower().split("x"))
        if args.coarse:
            overrides["coarse"] = tuple(int(v) for v in args.coarse.lower().split("x"))
        if args.two_level:
            overrides["two_level_factor"] = args.two_level
        if args.fixed_mesh:
            overrides["mesh_mode"] = "fixed-uniform"
        cfg = config_from_sources(file_values, **overrides)
        artifacts = run_simulation(cfg)
        print(
            f"finished {cfg.preset} ({cfg.mode_label}, {cfg.M}x{cfg.N}) "
            f"to t={cfg.t_end} in {artifacts.timings['total']:.1f}s; "
            f"outputs in {artifacts.out_dir}"
        )
        return 0
    except Exception as exc:  # CLI boundary: fail with a diagnostic, not a trace
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
