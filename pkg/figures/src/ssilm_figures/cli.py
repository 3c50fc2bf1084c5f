"""figures <fig2|fig3|fig4|fig5> --in <dir> --out <file>

fig2/fig5 render trajectory panels from <dir>/trajectories.csv, fig3 the
transition plot from <dir>/summary.csv + <dir>/trajectories.csv, fig4
the architecture comparison from <dir>/compare.csv.
"""

import argparse
import os
import sys

from .plots import MissingColumnError, plot_compare, plot_trajectories, plot_transition


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="figures",
                                     description="Render simulation CSVs to figures")
    parser.add_argument("figure", choices=["fig2", "fig3", "fig4", "fig5"])
    parser.add_argument("--in", dest="indir", required=True,
                        help="directory holding the simulator's CSV outputs")
    parser.add_argument("--out", required=True, help="output image file")
    parser.add_argument("--p", type=float,
                        help="p value to select for trajectory figures")
    args = parser.parse_args(argv)

    traj = os.path.join(args.indir, "trajectories.csv")
    try:
        if args.figure in ("fig2", "fig5"):
            plot_trajectories(traj, args.out, p=args.p)
        elif args.figure == "fig3":
            plot_transition(os.path.join(args.indir, "summary.csv"), traj, args.out)
        else:
            plot_compare(os.path.join(args.indir, "compare.csv"), args.out)
    except MissingColumnError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
