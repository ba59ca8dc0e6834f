"""Rectangular result tables, deterministic writers, sweep parallelism.

Tables are plain column stores. The writers promise byte-identical output
for identical inputs: CSV uses %.12e floats with LF endings, JSON wraps a
meta block and column arrays with a fixed key order and turns non-finite
floats into null.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .errors import IoError, OutOfRange

UNITS_NOTE = "reduced units: wavelength = 1, gamma_e = 1"


@dataclass
class SweepTable:
    """Columns of equal length plus free-form metadata.

    Column order is meaningful and preserved on output. A flags column, if
    present, holds per-row strings of semicolon-joined tokens with "" for
    clean rows.
    """

    columns: dict
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.columns:
            raise OutOfRange("a table needs at least one column")
        lengths = {name: len(vals) for name, vals in self.columns.items()}
        if len(set(lengths.values())) > 1:
            raise OutOfRange(f"ragged table columns: {lengths}")

    @property
    def n_rows(self) -> int:
        return len(next(iter(self.columns.values())))

    def column(self, name):
        if name not in self.columns:
            raise OutOfRange(f"no column {name!r}; have {list(self.columns)}")
        return self.columns[name]


def thread_budget() -> int:
    """Worker count for sweep parallelism from ARRAYMIRROR_THREADS (0 = auto)."""
    raw = os.environ.get("ARRAYMIRROR_THREADS", "0").strip()
    try:
        n = int(raw)
    except ValueError:
        raise OutOfRange(f"ARRAYMIRROR_THREADS must be an integer, got {raw!r}") from None
    if n < 0:
        raise OutOfRange(f"ARRAYMIRROR_THREADS must be nonnegative, got {n}")
    if n == 0:
        return max(1, min(4, os.cpu_count() or 1))
    return n


def ordered_parallel_map(fn, items) -> list:
    """Map fn over items, in parallel when allowed, emitting results in order.

    Each item must be independent; the output order never depends on the
    worker count, so parallel runs stay deterministic.
    """
    items = list(items)
    workers = thread_budget()
    if workers <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def config_meta(config, geometry=None, drive=None) -> dict:
    """Echo the effective physical settings for output metadata."""
    meta = {
        "lattice_constant": config.lattice_constant,
        "gamma_r": config.gamma_r,
        "polarization": list(config.polarization),
    }
    if geometry is not None:
        meta["theta"] = geometry.theta
        meta["plane"] = geometry.plane
        meta["probe_pol"] = geometry.probe_pol
    if drive is not None:
        om = complex(drive.omega_c)
        meta["omega_c"] = om.real if om.imag == 0.0 else [om.real, om.imag]
        meta["delta_c"] = drive.delta_c
    return meta


def join_flags(tokens) -> str:
    return ";".join(t for t in tokens if t)


def _pyval(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return float(v)
    if isinstance(v, str):
        return v
    raise IoError(f"cannot serialize table cell of type {type(v).__name__}")


def _format_cell(v) -> str:
    v = _pyval(v)
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return "%.12e" % v
    return v


def _emit_columns(table: SweepTable) -> dict:
    cols = dict(table.columns)
    flags = cols.get("flags")
    if flags is not None and all(f == "" for f in flags):
        # the flags column appears in files only when some row is flagged
        del cols["flags"]
    return cols


def _csv_text(cols: dict) -> str:
    names = list(cols)
    lines = [",".join(names)]
    series = [cols[n] for n in names]
    for row in zip(*series):
        lines.append(",".join(_format_cell(v) for v in row))
    return "\n".join(lines) + "\n"


def _json_text(cols: dict, meta: dict) -> str:
    def clean(v):
        v = _pyval(v)
        if isinstance(v, float) and not math.isfinite(v):
            return None
        return v

    doc = {
        "meta": {"version": __version__, "units": UNITS_NOTE, **meta},
        "data": {name: [clean(v) for v in vals] for name, vals in cols.items()},
    }
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def write_table(table: SweepTable, fmt: str, path) -> None:
    """Write a table as csv or json; identical inputs give identical bytes."""
    if table.n_rows == 0:
        raise IoError("refusing to write an empty table")
    cols = _emit_columns(table)
    if fmt == "csv":
        text = _csv_text(cols)
    elif fmt == "json":
        text = _json_text(cols, table.meta)
    else:
        raise OutOfRange(f"unknown output format {fmt!r}, use csv or json")
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc
