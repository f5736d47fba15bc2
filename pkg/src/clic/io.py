"""CSV and manifest reading/writing shared by the command line tools."""

from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path

import numpy as np


class DataError(ValueError):
    """Malformed input file; the message names the offending row and column."""


def read_matrix_csv(path, header: bool = False) -> np.ndarray:
    """Read a numeric CSV into an ``(n, d)`` float array.

    Ragged rows, empty cells and non-numeric cells are rejected with the
    1-based row and column of the first problem.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"{path}: no such file")
    rows = []
    width = None
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        for lineno, raw in enumerate(reader, start=1):
            if header and lineno == 1:
                continue
            if not raw or all(not c.strip() for c in raw) or raw[0].lstrip().startswith("#"):
                continue
            if width is None:
                width = len(raw)
            elif len(raw) != width:
                raise DataError(f"{path}: row {lineno} has {len(raw)} columns, expected {width}")
            vals = []
            for col, cell in enumerate(raw, start=1):
                try:
                    x = float(cell)
                except ValueError:
                    raise DataError(f"{path}: row {lineno}, column {col}: "
                                    f"non-numeric value {cell.strip()!r}") from None
                if not np.isfinite(x):
                    raise DataError(f"{path}: row {lineno}, column {col}: missing or non-finite value")
                vals.append(x)
            rows.append(vals)
    if not rows:
        raise DataError(f"{path}: no data rows")
    return np.array(rows, dtype=float)


def _comment(fh, provenance):
    if provenance:
        fh.write(f"# manifest_sha256={provenance}\n")


def write_matrix_csv(path, matrix, header=None, provenance: str | None = None, fmt="{:.17g}"):
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        _comment(fh, provenance)
        if header is not None:
            fh.write(",".join(str(h) for h in header) + "\n")
        for row in np.atleast_2d(matrix):
            fh.write(",".join(fmt.format(x) if isinstance(x, (float, np.floating)) else str(x)
                              for x in row) + "\n")


def write_labels_csv(path, labels, provenance: str | None = None):
    """One partition per row, comma-separated 1-based labels."""
    labels = np.atleast_2d(np.asarray(labels, dtype=np.int64))
    with Path(path).open("w", encoding="utf-8") as fh:
        _comment(fh, provenance)
        for row in labels:
            fh.write(",".join(map(str, row)) + "\n")


def read_labels_csv(path) -> np.ndarray:
    arr = read_matrix_csv(path)
    if np.any(arr != np.round(arr)) or np.any(arr < 1):
        raise DataError(f"{path}: labels must be positive integers")
    return arr.astype(np.int64)


def write_table(path, header, rows, provenance: str | None = None):
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        _comment(fh, provenance)
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x
                             for x in row])


def read_table(path) -> tuple[list, list]:
    """Header and rows of a CSV written by :func:`write_table`."""
    with Path(path).open(newline="", encoding="utf-8") as fh:
        lines = [line for line in fh if not line.startswith("#")]
    reader = csv.reader(lines)
    header = next(reader)
    return header, [row for row in reader if row]


def write_json(path, obj) -> str:
    """Write ``obj`` deterministically and return the file's sha256."""
    text = json.dumps(obj, indent=2, sort_keys=True, default=_jsonable) + "\n"
    Path(path).write_text(text, encoding="utf-8")
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def _jsonable(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (tuple, set)):
        return list(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def file_sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
