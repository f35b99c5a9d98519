"""Command-line figure generation from covswe output files."""

import argparse
import sys

from .plots import (PlotDataError, plot_convergence, plot_profile_1d,
                    plot_surface_2d)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="covswe-plots",
        description="Render figures from covswe CSV/VTK outputs.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("profile", help="1D free-surface/bathymetry profile")
    p.add_argument("csv", help="1D result CSV")
    p.add_argument("out", help="output image (png/svg)")

    p = sub.add_parser("convergence", help="log-log convergence plot")
    p.add_argument("csv", help="convergence table CSV")
    p.add_argument("out", help="output image (png/svg)")

    p = sub.add_parser("surface", help="2D embedded surface render")
    p.add_argument("vtk", help="2D result VTK")
    p.add_argument("out", help="output image (png/svg)")

    args = parser.parse_args(argv)
    try:
        if args.command == "profile":
            plot_profile_1d(args.csv, args.out)
        elif args.command == "convergence":
            slopes = plot_convergence(args.csv, args.out)
            for name, slope in sorted(slopes.items()):
                print(f"{name}: fitted slope {slope:.3f}")
        else:
            plot_surface_2d(args.vtk, args.out)
    except PlotDataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
