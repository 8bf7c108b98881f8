"""Tidy-table output shared by every result type: CSV, aligned text, JSON rows."""

from __future__ import annotations

import csv
import io
import json
import math
import numbers
from collections.abc import Mapping, Sequence
from typing import Any


def format_value(v: Any) -> str:
    """Shortest round-trip text for floats; NaN as empty string."""
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return "" if math.isnan(v) else repr(float(v))
    if isinstance(v, numbers.Integral):
        return str(int(v))
    return str(v)


def write_csv(fh, header: Sequence[str], rows: Sequence[Mapping[str, Any]]) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([format_value(row[h]) for h in header])


def to_csv(path_or_file, header: Sequence[str], rows: Sequence[Mapping[str, Any]]) -> None:
    if hasattr(path_or_file, "write"):
        write_csv(path_or_file, header, rows)
    else:
        with open(path_or_file, "w", newline="") as fh:
            write_csv(fh, header, rows)


def csv_text(header: Sequence[str], rows: Sequence[Mapping[str, Any]]) -> str:
    buf = io.StringIO()
    write_csv(buf, header, rows)
    return buf.getvalue()


def text_table(header: Sequence[str], rows: Sequence[Sequence[Any]], digits: int = 4) -> str:
    """Right-aligned plain-text table; the first column is left-aligned."""

    def cell(v):
        if isinstance(v, float):
            return "-" if math.isnan(v) else f"{v:.{digits}f}"
        return str(v)

    body = [[cell(v) for v in r] for r in rows]
    widths = [max(len(str(h)), *(len(r[j]) for r in body)) if body else len(str(h)) for j, h in enumerate(header)]

    def line(cells):
        return "  ".join(c.ljust(widths[0]) if j == 0 else c.rjust(widths[j]) for j, c in enumerate(cells))

    return "\n".join([line([str(h) for h in header]), "  ".join("-" * w for w in widths), *map(line, body)]) + "\n"


def _jsonable(v: Any) -> Any:
    if isinstance(v, bool):
        return v
    if isinstance(v, numbers.Integral):
        return int(v)
    if isinstance(v, numbers.Real):
        v = float(v)
        return v if math.isfinite(v) else None
    return v


def json_document(meta: Mapping[str, Any], rows: Sequence[Mapping[str, Any]]) -> str:
    data = [{k: _jsonable(v) for k, v in r.items()} for r in rows]
    return json.dumps({"meta": dict(meta), "data": data}, indent=2, allow_nan=False) + "\n"
