"""Bohm residual convergence: halve dx four times and report the reduction ratios."""

import argparse
import sys

from qfound.config import from_mapping
from qfound.experiments import run
from qfound.io import to_csv


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=401, help="points on the coarsest grid")
    ap.add_argument("--half-width", type=float, default=20.0)
    ap.add_argument("--out", default="-")
    args = ap.parse_args(argv)
    cfg = from_mapping(
        "bohm",
        {"mode": "convergence", "n": str(args.n), "x_min": str(-args.half_width), "x_max": str(args.half_width)},
    )
    table = run(cfg)
    text = to_csv(table)
    if args.out == "-":
        sys.stdout.write(text)
    else:
        with open(args.out, "w") as fh:
            fh.write(text)
    worst = min(min(table.column("ratio_hj")[1:]), min(table.column("ratio_cont")[1:]))
    print(f"smallest reduction per halving: {worst:.3f}", file=sys.stderr)
    return 0 if worst >= 3.5 else 1


if __name__ == "__main__":
    sys.exit(main())
