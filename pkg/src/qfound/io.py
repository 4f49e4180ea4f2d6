"""Result tables and their CSV form.

Dialect: comma separated, '.' decimal point, floats at 17 significant
digits, '#'-prefixed metadata lines above a single column-name line. The
metadata echoes the tool version and the exact config (as an INI section),
so a table can be regenerated from its own header. Wall-clock time is kept
out of the file to keep reruns byte-identical.
"""

from __future__ import annotations

import io as _io
import numbers
from dataclasses import dataclass, field

from . import __version__
from .config import ExperimentConfig, load_ini, to_ini_lines


@dataclass
class ResultTable:
    columns: list[str]
    rows: list[tuple]
    config: ExperimentConfig | None = None
    results: dict[str, object] = field(default_factory=dict)

    def __post_init__(self):
        width = len(self.columns)
        for i, r in enumerate(self.rows):
            if len(r) != width:
                raise ValueError(f"row {i} has {len(r)} cells, expected {width}")

    def column(self, name: str) -> list:
        j = self.columns.index(name)
        return [r[j] for r in self.rows]


def format_cell(x) -> str:
    if isinstance(x, bool):
        return str(int(x))
    if isinstance(x, numbers.Integral):
        return str(int(x))
    if isinstance(x, numbers.Real):
        return format(float(x), ".17g")
    s = str(x)
    if any(c in s for c in ',"\n'):
        raise ValueError(f"text cell {s!r} would break the CSV dialect")
    return s


def to_csv(table: ResultTable) -> str:
    buf = _io.StringIO()
    buf.write(f"# qfound {__version__}\n")
    if table.config is not None:
        buf.write(f"# experiment = {table.config.KIND}\n")
        buf.write(f"# seed = {table.config.seed}\n")
        for line in to_ini_lines(table.config):
            buf.write(f"# {line}\n")
    for key, val in table.results.items():
        buf.write(f"# result {key} = {format_cell(val)}\n")
    buf.write(",".join(table.columns) + "\n")
    for r in table.rows:
        buf.write(",".join(format_cell(c) for c in r) + "\n")
    return buf.getvalue()


def write_csv(table: ResultTable, path) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(to_csv(table))


def _parse_cell(s: str):
    for conv in (int, float):
        try:
            return conv(s)
        except ValueError:
            pass
    return s


def read_csv(text: str) -> tuple[list[str], list[str], list[tuple]]:
    """Split CSV text into (metadata lines, column names, parsed rows)."""
    meta, body = [], []
    for line in text.splitlines():
        (meta if line.startswith("#") else body).append(line)
    columns = body[0].split(",")
    rows = [tuple(_parse_cell(c) for c in line.split(",")) for line in body[1:] if line]
    return meta, columns, rows


def config_from_header(text: str) -> ExperimentConfig:
    """Rebuild the config echoed in a CSV header."""
    meta, _, _ = read_csv(text)
    ini, kind, inside = [], None, False
    for line in meta:
        body = line[1:].strip()
        if body.startswith("[") and body.endswith("]"):
            kind, inside = body[1:-1], True
            ini.append(body)
        elif inside and not body.startswith("result "):
            ini.append(body)
        else:
            inside = False
    if kind is None:
        raise ValueError("no config section in the header")
    return load_ini("\n".join(ini), kind)


def gnuplot_script(table: ResultTable, csv_name: str) -> str:
    """A gnuplot script for the table; the three-polarizer scan gets the two-panel layout."""
    head = [
        "set datafile separator ','",
        "set datafile commentschars '#'",
        "set key autotitle columnhead",
        "set grid",
    ]
    cols = table.columns
    if table.config is not None and table.config.KIND == "three-pol":
        a, b = cols.index("alpha") + 1, cols.index("beta_star") + 1
        p, q = cols.index("p_min") + 1, cols.index("p_copenhagen") + 1
        body = [
            "set multiplot layout 1,2",
            "set xlabel 'alpha (deg)'",
            "set ylabel 'minimal transmission'",
            f"plot '{csv_name}' using {a}:{p} with linespoints title 'model P_min', \\",
            f"     '' using {a}:{q} with lines title 'cos^2(a) cos^2(a-b*)'",
            "set ylabel 'beta* (deg)'",
            f"plot '{csv_name}' using {a}:{b} with linespoints title 'beta*'",
            "unset multiplot",
        ]
    else:
        numeric = [j for j, c in enumerate(cols) if table.rows and isinstance(table.rows[0][j], numbers.Real)]
        if len(numeric) < 2:
            return "\n".join(head + ["# no numeric columns to plot"]) + "\n"
        x = numeric[0] + 1
        body = [f"set xlabel '{cols[numeric[0]]}'"]
        series = [f"'{csv_name}' using {x}:{j + 1} with linespoints" for j in numeric[1:]]
        body.append("plot " + ", \\\n     ".join(series))
    return "\n".join(head + body) + "\n"
