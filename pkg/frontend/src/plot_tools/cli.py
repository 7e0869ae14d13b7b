"""Figure rendering from run manifests: plot surface|mesh|contour-compare."""

from __future__ import annotations

import argparse
import sys

from .figures import DEFAULT_LEVELS, plot_contour_compare, plot_mesh, plot_surface
from .loader import SnapshotSet


def _build_parser():
    p = argparse.ArgumentParser(prog="plot", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, two_inputs=False):
        sp.add_argument("--in", dest="manifest", required=True, help="run manifest.json")
        if two_inputs:
            sp.add_argument("--in2", dest="manifest2", help="second run to compare")
        sp.add_argument("--time", type=float, required=True, help="snapshot time")
        sp.add_argument("--out", required=True, help="output image file")

    surf = sub.add_parser("surface", help="3-D surface of one field")
    common(surf)
    surf.add_argument("--field", choices=("E", "T"), default="E")

    mesh = sub.add_parser("mesh", help="mesh wireframe")
    common(mesh)

    comp = sub.add_parser("contour-compare", help="side-by-side temperature contours")
    common(comp, two_inputs=True)
    comp.add_argument(
        "--levels", default=",".join(str(v) for v in DEFAULT_LEVELS),
        help="comma-separated contour levels",
    )
    return p


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        frames = SnapshotSet(args.manifest)
        frame = frames.frame_at(args.time)
        if args.command == "surface":
            plot_surface(frame, args.field, args.out)
        elif args.command == "mesh":
            plot_mesh(frame, args.out)
        else:
            other = SnapshotSet(args.manifest2 or args.manifest)
            frame_b = other.frame_at(args.time)
            levels = [float(v) for v in args.levels.split(",") if v.strip()]
            plot_contour_compare(frame, frame_b, args.out, levels=levels)
        print(f"wrote {args.out}")
        return 0
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
