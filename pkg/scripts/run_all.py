"""Run every experiment at its default config and collect the CSVs in one directory."""

import argparse
import sys
import time
from pathlib import Path

from qfound.config import CONFIG_TYPES
from qfound.experiments import run
from qfound.io import write_csv

# defaults that would take minutes are trimmed here
QUICK = {
    "bell-bounds": {"restarts": 4, "max_evals": 30_000, "n_random": 2_000},
}


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--outdir", type=Path, default=Path("results"))
    ap.add_argument("--full", action="store_true", help="use the unmodified defaults everywhere")
    args = ap.parse_args(argv)
    args.outdir.mkdir(parents=True, exist_ok=True)
    status = 0
    for kind, cls in CONFIG_TYPES.items():
        cfg = cls(**({} if args.full else QUICK.get(kind, {})))
        t0 = time.perf_counter()
        try:
            table = run(cfg)
        except Exception as exc:  # keep going; report at the end
            print(f"{kind:16s} FAILED {exc}", file=sys.stderr)
            status = 1
            continue
        path = args.outdir / f"{kind}.csv"
        write_csv(table, path)
        print(f"{kind:16s} {len(table.rows):5d} rows  {time.perf_counter() - t0:6.1f}s  -> {path}")
    return status


if __name__ == "__main__":
    sys.exit(main())
