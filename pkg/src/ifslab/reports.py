"""Report serialization: tabular CSV and structured JSON.

Tabular files are long-format CSV with a header row ``quantity,index,value``:
one row per (quantity, n or x), summary quantities with a blank index.
Structured files mirror the report dataclasses as nested JSON.  Both print
binary64 values with shortest round-trip decimals (Python ``repr``), and all
writes are atomic (temp file + rename).
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import os
import tempfile

import numpy as np

from .attractor import AttractorMesh
from .conditions import ConditionReport, ExampleSpec
from .convergence import ConvergenceReport
from .measure import EigenMeasureResult
from .operator import EigenPair, SandwichReport, SpectralEstimate

__all__ = ["to_struct", "to_rows", "emit_report", "FORMAT_EXT"]

FORMAT_EXT = {"tabular": "csv", "structured": "json"}


def _scalar(v):
    if isinstance(v, (np.floating, float)):
        return float(v)
    if isinstance(v, (np.integer, int)):
        return int(v)
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    return v


def to_struct(obj):
    """Recursively convert dataclasses/arrays to JSON-compatible structures."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_struct(getattr(obj, f.name))
                for f in dataclasses.fields(obj)}
    if isinstance(obj, np.ndarray):
        return [_scalar(v) for v in obj.tolist()] if obj.ndim == 1 else obj.tolist()
    if isinstance(obj, (list, tuple)):
        return [to_struct(v) for v in obj]
    if isinstance(obj, dict):
        return {str(k): to_struct(v) for k, v in obj.items()}
    if hasattr(obj, "source"):
        return str(obj.source)
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return _scalar(obj)
    if isinstance(obj, (str, int, float, bool)) or obj is None:
        return obj
    return repr(obj)


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def _row(quantity, index, value):
    return (str(quantity), "" if index is None else _fmt(index), _fmt(value))


def to_rows(obj):
    """Long-format rows for a report object."""
    rows = []
    if isinstance(obj, AttractorMesh):
        rows.append(_row("hull_lo", None, obj.hull[0]))
        rows.append(_row("hull_hi", None, obj.hull[1]))
        rows.append(_row("resolution", None, obj.resolution))
        rows.append(_row("depth", None, obj.depth))
        rows.append(_row("method", None, obj.method))
        rows.append(_row("minimal_certified", None, obj.minimal_certified))
        rows.append(_row("n_points", None, obj.size))
        rows.extend(_row("point", i, x) for i, x in enumerate(obj.points))
    elif isinstance(obj, SpectralEstimate):
        rows.append(_row("rho", None, obj.rho))
        rows.append(_row("lower_bound", None, obj.lower_bound))
        rows.append(_row("bracket_lo", None, obj.bracket[0]))
        rows.append(_row("bracket_hi", None, obj.bracket[1]))
        rows.append(_row("converged", None, obj.converged))
        for n, (g, r) in enumerate(zip(obj.gelfand, obj.ratios), start=1):
            rows.append(_row("gelfand", n, g))
            rows.append(_row("ratio", n, r))
    elif isinstance(obj, SandwichReport):
        rows.append(_row("rho", None, obj.rho))
        rows.append(_row("passed", None, obj.passed))
        for r in obj.rows:
            rows.append(_row("min", r.n, r.low))
            rows.append(_row("max", r.n, r.high))
            rows.append(_row("eps", r.n, r.eps))
            rows.append(_row("ok", r.n, r.ok))
    elif isinstance(obj, EigenPair):
        rows.append(_row("rho", None, obj.rho))
        rows.append(_row("residual", None, obj.residual))
        rows.append(_row("iterations", None, obj.iterations))
        rows.append(_row("converged", None, obj.converged))
        rows.extend(_row("h", i, v) for i, v in enumerate(obj.h.values))
    elif isinstance(obj, EigenMeasureResult):
        rows.append(_row("rho_dual", None, obj.rho))
        rows.append(_row("iterations", None, obj.iterations))
        rows.append(_row("converged", None, obj.converged))
        rows.append(_row("n_atoms", None, obj.mu.n_atoms))
        for i, (x, m) in enumerate(zip(obj.mu.positions, obj.mu.masses)):
            rows.append(_row("atom_position", i, x))
            rows.append(_row("atom_mass", i, m))
    elif isinstance(obj, ConditionReport):
        rows.extend(_condition_rows(obj))
    elif isinstance(obj, ConvergenceReport):
        rows.append(_row("rho", None, obj.rho))
        for tr in obj.traces:
            for n, e in enumerate(tr.errors):
                rows.append(_row(f"error[{tr.label}]", n, e))
            rows.append(_row(f"rate[{tr.label}]", None,
                             "at-floor" if tr.rate is None else tr.rate))
            if tr.fit_residual is not None:
                rows.append(_row(f"fit_residual[{tr.label}]", None, tr.fit_residual))
            rows.append(_row(f"floor[{tr.label}]", None, tr.floor))
    elif isinstance(obj, ExampleSpec):
        rows.append(_row("delta", None, obj.delta))
        rows.append(_row("p1", None, getattr(obj.p1, "source", repr(obj.p1))))
        rows.append(_row("p2", None, getattr(obj.p2, "source", repr(obj.p2))))
        rows.append(_row("grid_n", None, obj.grid_n))
    elif isinstance(obj, (list, tuple)):
        for item in obj:
            rows.extend(to_rows(item))
    elif isinstance(obj, dict):
        for key, item in obj.items():
            if isinstance(item, (int, float, str, bool, np.floating, np.integer)):
                rows.append(_row(key, None, item))
            else:
                rows.extend(to_rows(item))
    else:
        raise TypeError(f"no tabular form for {type(obj).__name__}")
    return rows


def _condition_rows(rep):
    base = rep.condition_id
    return [
        _row(f"{base}.lhs", None, rep.lhs),
        _row(f"{base}.comparator", None, rep.comparator),
        _row(f"{base}.bracket_lo", None, rep.comparator_bracket[0]),
        _row(f"{base}.bracket_hi", None, rep.comparator_bracket[1]),
        _row(f"{base}.margin", None, rep.margin),
        _row(f"{base}.width", None, rep.width),
        _row(f"{base}.verdict", None, rep.verdict),
        _row(f"{base}.certified", None, rep.certified),
    ]


def _atomic_write(path, text):
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-report-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def emit_report(name, obj, fmt, out_dir):
    """Write one report file <out_dir>/<name>.<ext>; returns the path."""
    if fmt not in FORMAT_EXT:
        raise ValueError(f"unknown format {fmt!r}")
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, f"{name}.{FORMAT_EXT[fmt]}")
    if fmt == "tabular":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(("quantity", "index", "value"))
        writer.writerows(to_rows(obj))
        _atomic_write(path, buf.getvalue())
    else:
        _atomic_write(path, json.dumps(to_struct(obj), indent=2) + "\n")
    return path
