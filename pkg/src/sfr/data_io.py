"""CSV ingestion with an explicit column schema, export, and summary statistics."""

from __future__ import annotations

import csv
import logging
import math
import os
from dataclasses import dataclass
from typing import Literal

import numpy as np

from . import tabular
from .core import Dataset
from .errors import EmptyAfterNaDrop, MissingColumn, NonNumericCell, ValidationError

log = logging.getLogger(__name__)

NA_TOKENS = frozenset({"", "na", "n/a", "nan", "null"})
DESCRIBE_HEADER = ("column", "count", "mean", "std", "min", "25%", "50%", "75%", "max")


@dataclass(frozen=True)
class CsvSchema:
    """Which columns of a CSV file form the regression.

    Without a header row, columns are addressed by their zero-based position
    written as a string (``"0"``, ``"1"``, ...).
    """

    outcome_column: str
    feature_columns: tuple[str, ...]
    delimiter: str = ","
    has_header: bool = True
    na_policy: Literal["reject", "drop_rows"] = "reject"

    def __post_init__(self):
        object.__setattr__(self, "feature_columns", tuple(self.feature_columns))
        if not self.feature_columns:
            raise ValidationError("at least one feature column is required")
        if self.outcome_column in self.feature_columns:
            raise ValidationError(f"outcome column {self.outcome_column!r} is also listed as a feature")
        if len(set(self.feature_columns)) != len(self.feature_columns):
            raise ValidationError("duplicate feature columns")
        if self.na_policy not in ("reject", "drop_rows"):
            raise ValidationError(f"unknown na_policy {self.na_policy!r}")
        if len(self.delimiter) != 1:
            raise ValidationError("delimiter must be a single character")

    @property
    def columns(self) -> tuple[str, ...]:
        return (self.outcome_column, *self.feature_columns)


def _parse(cell: str) -> float | None:
    """Float value of a cell, ``None`` for a missing-value token; raises ``ValueError`` otherwise."""
    text = cell.strip()
    if text.lower() in NA_TOKENS:
        return None
    v = float(text)
    if not math.isfinite(v):
        raise ValueError(text)
    return v


def load_csv(path: str | os.PathLike, schema: CsvSchema, add_intercept: bool = True) -> Dataset:
    """Read the schema's columns from a delimited text file.

    Parameters
    ----------
    path : path-like
    schema : CsvSchema
    add_intercept : bool, default True

    Returns
    -------
    Dataset

    Raises
    ------
    MissingColumn
        A schema column is absent from the header (or out of range).
    NonNumericCell
        A cell cannot be parsed, or is missing under ``na_policy="reject"``.
        ``row`` is the 1-based line number in the file.
    EmptyAfterNaDrop
        Dropping incomplete rows leaves too few observations.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh, delimiter=schema.delimiter)
        if schema.has_header:
            try:
                header = [h.strip() for h in next(reader)]
            except StopIteration:
                raise MissingColumn(f"{path}: empty file") from None
            positions = {name: j for j, name in enumerate(header)}
        else:
            positions = None
        idx = []
        for name in schema.columns:
            if positions is not None:
                if name not in positions:
                    raise MissingColumn(f"column {name!r} not found in {path}")
                idx.append(positions[name])
            else:
                if not name.isdigit():
                    raise MissingColumn(f"without a header, columns are positions; got {name!r}")
                idx.append(int(name))

        rows: list[list[float]] = []
        total = dropped = 0
        for record in reader:
            if not record or all(not c.strip() for c in record):
                continue
            total += 1
            line = reader.line_num
            values: list[float | None] = []
            for name, j in zip(schema.columns, idx):
                if j >= len(record):
                    if positions is None and total == 1:
                        raise MissingColumn(f"column {name} out of range in {path}")
                    raise NonNumericCell(line, name, "")
                try:
                    v = _parse(record[j])
                except ValueError:
                    raise NonNumericCell(line, name, record[j]) from None
                if v is None and schema.na_policy == "reject":
                    raise NonNumericCell(line, name, record[j])
                values.append(v)
            if any(v is None for v in values):
                dropped += 1
                continue
            rows.append(values)  # type: ignore[arg-type]

    log.info("read %d rows from %s, dropped %d with missing values", total, path, dropped)
    p = len(schema.feature_columns)
    if len(rows) < p + 2:
        if dropped:
            raise EmptyAfterNaDrop(f"{len(rows)} complete rows remain after dropping {dropped}; need {p + 2}")
        raise ValidationError(f"{path}: {len(rows)} rows, need at least {p + 2}")
    arr = np.array(rows, dtype=np.float64)
    return Dataset(arr[:, 0], arr[:, 1:], schema.feature_columns, add_intercept, schema.outcome_column)


def write_csv(data: Dataset, path_or_file) -> None:
    """Export outcome and features with shortest round-trip float text."""
    header = (data.outcome_name, *data.feature_names)
    rows = [
        dict(zip(header, map(float, (yv, *xv))))
        for yv, xv in zip(data.y, data.X)
    ]
    tabular.to_csv(path_or_file, header, rows)


def _summary(name: str, v: np.ndarray) -> dict:
    q1, q2, q3 = np.quantile(v, [0.25, 0.5, 0.75], method="linear")
    return {
        "column": name,
        "count": int(v.size),
        "mean": float(v.mean()),
        "std": float(v.std(ddof=1)) if v.size > 1 else float("nan"),
        "min": float(v.min()),
        "25%": float(q1),
        "50%": float(q2),
        "75%": float(q3),
        "max": float(v.max()),
    }


def describe(data: Dataset) -> list[dict]:
    """Count, mean, sample SD, min, quartiles and max for the outcome and each feature.

    Quartiles interpolate linearly between order statistics.
    """
    out = [_summary(data.outcome_name, data.y)]
    out.extend(_summary(name, data.X[:, j]) for j, name in enumerate(data.feature_names))
    return out
