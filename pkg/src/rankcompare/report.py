"""Typed result tables and their text/CSV/JSON serialization.

Floats are rounded to 12 significant digits when a report is built, so the
emitted bytes do not depend on last-ulp differences between platforms.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from .errors import RenderError

DTYPES = ("str", "int", "float", "bool")
FORMATS = ("text", "csv", "json")
EXTENSIONS = {"text": "txt", "csv": "csv", "json": "json"}


@dataclass(frozen=True)
class Column:
    name: str
    dtype: str = "str"

    def __post_init__(self):
        if self.dtype not in DTYPES:
            raise RenderError(f"column {self.name}: unknown dtype {self.dtype!r}")


def _canon_float(v: float) -> float:
    if not math.isfinite(v):
        raise RenderError(f"non-finite value {v!r} in report")
    v = float(format(v, ".12g"))
    return 0.0 if v == 0 else v


def _coerce(col: Column, v):
    if v is None:
        return None
    if col.dtype == "float":
        return _canon_float(float(v))
    if col.dtype == "int":
        if isinstance(v, float) and not v.is_integer():
            raise RenderError(f"column {col.name}: {v!r} is not an integer")
        return int(v)
    if col.dtype == "bool":
        return bool(v)
    v = str(v)
    if "\x00" in v:
        raise RenderError(f"column {col.name}: NUL character in text cell")
    return v


@dataclass(frozen=True)
class AnalysisReport:
    kind: str
    columns: tuple
    rows: tuple = ()
    metadata: Mapping = field(default_factory=dict)

    def __post_init__(self):
        cols = tuple(c if isinstance(c, Column) else Column(*c) for c in self.columns)
        object.__setattr__(self, "columns", cols)
        rows = []
        for r in self.rows:
            if len(r) != len(cols):
                raise RenderError(f"{self.kind}: row has {len(r)} cells, expected {len(cols)}")
            rows.append(tuple(_coerce(c, v) for c, v in zip(cols, r)))
        object.__setattr__(self, "rows", tuple(rows))
        object.__setattr__(self, "metadata", dict(self.metadata))

    @property
    def column_names(self):
        return tuple(c.name for c in self.columns)

    def with_metadata(self, **extra) -> "AnalysisReport":
        return AnalysisReport(self.kind, self.columns, self.rows, {**self.metadata, **extra})


def _cell_text(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def to_csv(report: AnalysisReport) -> str:
    buf = io.StringIO(newline="")
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(report.column_names)
    for r in report.rows:
        writer.writerow([_cell_text(v) for v in r])
    return buf.getvalue()


def _json_default(o):
    if isinstance(o, (set, frozenset, tuple)):
        return list(o)
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def to_json(report: AnalysisReport) -> str:
    obj = {
        "kind": report.kind,
        "columns": [{"name": c.name, "type": c.dtype} for c in report.columns],
        "rows": [list(r) for r in report.rows],
        "metadata": _sorted(report.metadata),
    }
    return json.dumps(obj, indent=2, ensure_ascii=False, default=_json_default) + "\n"


def _sorted(obj):
    if isinstance(obj, Mapping):
        return {k: _sorted(obj[k]) for k in sorted(obj)}
    if isinstance(obj, (list, tuple)):
        return [_sorted(v) for v in obj]
    if isinstance(obj, float):
        return _canon_float(obj)
    return obj


def to_text(report: AnalysisReport) -> str:
    lines = [f"# {report.kind}"]
    for key, value in _sorted(report.metadata).items():
        lines.append(f"# {key}: {json.dumps(value, ensure_ascii=False, default=_json_default)}")
    header = list(report.column_names)
    body = [[_cell_text(v) for v in r] for r in report.rows]
    widths = [max([len(h)] + [len(r[i]) for r in body]) for i, h in enumerate(header)]
    numeric = [c.dtype in ("int", "float") for c in report.columns]

    def fmt(cells):
        out = [c.rjust(w) if num else c.ljust(w) for c, w, num in zip(cells, widths, numeric)]
        return "  ".join(out).rstrip()

    lines.append(fmt(header))
    lines.append("  ".join("-" * w for w in widths))
    lines.extend(fmt(r) for r in body)
    return "\n".join(lines) + "\n"


def render(report: AnalysisReport, fmt: str) -> str:
    if fmt == "csv":
        return to_csv(report)
    if fmt == "json":
        return to_json(report)
    if fmt == "text":
        return to_text(report)
    raise RenderError(f"unknown format {fmt!r}")


def emit_table(report: AnalysisReport, fmt: str, path) -> Path:
    """Write the report to ``path``; raises OSError if it cannot be written."""
    path = Path(path)
    data = render(report, fmt)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(data)
    return path


def _parse_cell(col: Column, text: str):
    if text == "":
        return None
    if col.dtype == "float":
        return float(text)
    if col.dtype == "int":
        return int(text)
    if col.dtype == "bool":
        if text not in ("true", "false"):
            raise RenderError(f"column {col.name}: bad boolean {text!r}")
        return text == "true"
    return text


def read_csv_report(text: str, kind: str, columns: Sequence[Column]) -> AnalysisReport:
    """Parse CSV produced by ``to_csv`` back into a report with the given schema."""
    rows = list(csv.reader(io.StringIO(text, newline="")))
    if not rows:
        raise RenderError("empty CSV")
    columns = tuple(columns)
    if tuple(rows[0]) != tuple(c.name for c in columns):
        raise RenderError(f"CSV header {rows[0]} does not match schema")
    body = [tuple(_parse_cell(c, v) for c, v in zip(columns, r)) for r in rows[1:]]
    return AnalysisReport(kind, columns, tuple(body))
