"""CSV / JSON record output with round-trip float formatting."""

from __future__ import annotations

import csv
import hashlib
import json
import math
from pathlib import Path
from typing import Iterable, Sequence

__all__ = ["DataError", "format_value", "write_csv", "write_json", "write_records", "read_column", "file_digest"]


def format_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float) or hasattr(v, "dtype") and v.dtype.kind == "f":
        v = float(v)
        if math.isnan(v):
            return "nan"
        return format(v, ".17g")
    return str(v)


def _plain(v):
    if hasattr(v, "item"):
        v = v.item()
    if isinstance(v, float) and math.isnan(v):
        return None
    return v


def write_csv(path: Path, fields: Sequence[str], rows: Iterable[dict]) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(fields)
        for row in rows:
            w.writerow([format_value(row.get(f)) for f in fields])
    return path


def write_json(path: Path, fields: Sequence[str], rows: Iterable[dict]) -> Path:
    path = Path(path)
    records = [{f: _plain(row.get(f)) for f in fields} for row in rows]
    path.write_text(json.dumps(records, indent=1) + "\n")
    return path


def write_records(path: Path, fields: Sequence[str], rows: Sequence[dict], also_json: bool = False) -> list[Path]:
    """Write ``path`` as CSV and, with ``also_json``, a ``.json`` twin."""
    rows = list(rows)
    out = [write_csv(path, fields, rows)]
    if also_json:
        out.append(write_json(Path(path).with_suffix(".json"), fields, rows))
    return out


class DataError(ValueError):
    """Bad user-supplied data (as opposed to bad configuration)."""


def read_column(path: Path) -> list[float]:
    """Numbers from a single-column CSV; a non-numeric first line is taken as a header."""
    values = []
    with Path(path).open(newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != 1:
                raise DataError(f"line {lineno}: expected one column, got {len(row)}")
            cell = row[0].strip()
            try:
                value = float(cell)
            except ValueError:
                if lineno == 1:
                    continue
                raise DataError(f"line {lineno}: not a number: {cell!r}") from None
            if not math.isfinite(value):
                raise DataError(f"line {lineno}: non-finite value {cell!r}")
            values.append(value)
    if not values:
        raise DataError("no observations")
    return values


def file_digest(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
