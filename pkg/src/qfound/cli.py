"""Command line entry point: ``qfound <experiment> [--config F] [--out F] [--seed N] [--emit-plot]``."""

from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path

from .config import CONFIG_TYPES, ConfigError, config_fields, format_value, from_mapping, load_ini, validate
from .experiments import ExperimentFailure, run
from .io import gnuplot_script, to_csv

log = logging.getLogger("qfound")

EXIT_INVALID = 2
EXIT_FAILED = 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qfound", description="Run one experiment and emit a CSV table.")
    sub = ap.add_subparsers(dest="experiment", required=True)
    for kind in CONFIG_TYPES:
        p = sub.add_parser(kind)
        p.add_argument("--config", type=Path, help="INI file with a [%s] section" % kind)
        p.add_argument("--out", type=Path, help="CSV path (stdout if omitted)")
        p.add_argument("--seed", type=int, help="overrides the config seed")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override one config field")
        p.add_argument("--emit-plot", action="store_true", help="also write a gnuplot script next to the CSV")
        p.add_argument("-v", "--verbose", action="store_true")
    return ap


def _config_from_args(args):
    values: dict[str, str] = {}
    if args.config:
        base = load_ini(args.config.read_text(), args.experiment)
        values = {f.name: format_value(getattr(base, f.name)) for f in config_fields(type(base))}
    for item in args.set:
        if "=" not in item:
            raise ConfigError([f"--set expects KEY=VALUE, got {item!r}"])
        k, v = item.split("=", 1)
        values[k.strip()] = v.strip()
    if args.seed is not None:
        values["seed"] = str(args.seed)
    if args.out is not None:
        values["out"] = str(args.out)
    return from_mapping(args.experiment, values)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        config = _config_from_args(args)
        problems = validate(config)
        if problems:
            raise ConfigError(problems)
    except (ConfigError, OSError) as exc:
        for msg in getattr(exc, "violations", [str(exc)]):
            print(f"invalid config: {msg}", file=sys.stderr)
        return EXIT_INVALID
    t0 = time.perf_counter()
    try:
        table = run(config)
    except ExperimentFailure as exc:
        print(f"experiment failed: {exc}", file=sys.stderr)
        return EXIT_FAILED
    wall = time.perf_counter() - t0
    text = to_csv(table)
    if config.out:
        out = Path(config.out)
        out.write_text(text)
        # wall time lives beside the CSV so the table itself stays reproducible
        out.with_suffix(out.suffix + ".log").write_text(f"experiment = {config.KIND}\nwall_seconds = {wall:.3f}\n")
        if args.emit_plot:
            out.with_suffix(".gp").write_text(gnuplot_script(table, out.name))
    else:
        sys.stdout.write(text)
        if args.emit_plot:
            sys.stdout.write("\n" + gnuplot_script(table, "-"))
    log.info("%s finished in %.3f s", config.KIND, wall)
    return 0


if __name__ == "__main__":
    sys.exit(main())
