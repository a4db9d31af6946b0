"""Plot-ready CSV series.

Every file starts with a ``#`` provenance line (gnuplot skips it), then a
header row of ``name[unit]`` cells. Floats are written with 17 significant
digits so values round-trip exactly.
"""
import csv
import math
from typing import Iterable, Optional, Sequence

from .diagnostics import GAUSS, MEAN, ScalingSeries

UNITS = {
    "t": "time", "w_origin": "1", "trace_H": "1/length^2", "det_H": "1/length^4",
    "s_gauss": "length", "s_mean": "length",
    "E_kin": "energy", "E_pot": "energy", "E_tot": "energy",
    "E_kin_local": "energy", "E_pot_local": "energy", "E_tot_local": "energy",
    "max_abs_phi": "1", "max_abs_qp": "1/time", "lambda_max": "1/time^2", "projection_iters": "count",
    "direction": "-", "r": "length", "w": "1", "s": "length", "r_over_s": "1",
    "run": "count", "A": "1", "outcome": "-", "flip_time": "time", "hover_duration": "time",
    "t_end": "time", "bracket_lo": "1", "bracket_hi": "1", "note": "-",
}


def format_value(v):
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return "nan" if math.isnan(v) else format(v, ".17g")
    if hasattr(v, "dtype"):
        return format_value(v.item())
    return str(v)


def header_cell(name):
    return f"{name}[{UNITS.get(name, '-')}]"


def split_header(cell):
    cell = cell.strip()
    return cell[: cell.index("[")] if "[" in cell else cell


def write_csv(path, columns: Sequence[str], rows: Iterable[Sequence], provenance: Optional[str] = None):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# wavemap {provenance or ''}".rstrip() + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([header_cell(c) for c in columns])
        for row in rows:
            w.writerow([format_value(v) for v in row])


def read_csv(path):
    """Return ``(column names, rows of strings)``, skipping ``#`` lines."""
    with open(path, newline="", encoding="utf-8") as fh:
        lines = [ln for ln in fh if ln.strip() and not ln.lstrip().startswith("#")]
    reader = csv.reader(lines)
    try:
        header = next(reader)
    except StopIteration:
        raise ValueError(f"{path}: empty series file") from None
    return [split_header(c) for c in header], list(reader)


def read_series(path, method=GAUSS) -> ScalingSeries:
    """Scaling series from an origin CSV or a two-column ``t, s`` file."""
    columns, rows = read_csv(path)
    want = {GAUSS: "s_gauss", MEAN: "s_mean"}[method]
    if "t" in columns and want in columns:
        it, js = columns.index("t"), columns.index(want)
    elif len(columns) == 2:
        it, js = 0, 1
    else:
        raise ValueError(f"{path}: need columns t and {want}, found {columns}")
    series = ScalingSeries(method=method)
    for row in rows:
        series.append(float(row[it]), float(row[js]))
    return series
