"""CSV ingestion and result serialization.

CSV dialect: comma-separated, one header row, decimal point, UTF-8.  Rows
with missing or non-numeric cells are rejected with the offending position.
Floats are written with repr so that export/import round-trips exactly.
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .errors import InvalidInput, IoError, ParseError
from .scm import Dataset
from .simulate import SimulationRecord

__all__ = [
    "read_dataset_csv",
    "write_dataset_csv",
    "write_records_csv",
    "json_document",
    "write_json",
]


def _resolve_column(header: list[str], selector: str | int, what: str) -> int:
    if isinstance(selector, int) or (isinstance(selector, str) and selector.lstrip("-").isdigit()):
        idx = int(selector)
        if not 0 <= idx < len(header):
            raise InvalidInput(f"{what} index {idx} out of range for {len(header)} columns")
        return idx
    try:
        return header.index(str(selector))
    except ValueError:
        raise InvalidInput(f"{what} column {selector!r} not found in header {header}") from None


def read_dataset_csv(path, target: str | int, drop: tuple[str | int, ...] = ()):
    """Read a dataset, selecting the target column by name or 0-based index.

    Returns (dataset, feature_names, target_name).  Additional columns can be
    excluded via ``drop`` (names or indices).
    """
    path = Path(path)
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as err:
        raise IoError(f"{path}: {err}") from err
    if len(rows) < 2:
        raise InvalidInput(f"{path}: need a header row and at least one data row")
    header = [name.strip() for name in rows[0]]
    target_idx = _resolve_column(header, target, "target")
    drop_idx = {_resolve_column(header, sel, "drop") for sel in drop}
    if target_idx in drop_idx:
        raise InvalidInput("target column cannot be dropped")
    feature_idx = [j for j in range(len(header)) if j != target_idx and j not in drop_idx]
    x_rows, y_vals = [], []
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise ParseError(i, len(row) + 1, f"expected {len(header)} cells, got {len(row)}")
        parsed = []
        for j, cell in enumerate(row):
            text = cell.strip()
            if not text:
                raise ParseError(i, j + 1, "missing value")
            try:
                parsed.append(float(text))
            except ValueError:
                raise ParseError(i, j + 1, f"non-numeric value {cell!r}") from None
        x_rows.append([parsed[j] for j in feature_idx])
        y_vals.append(parsed[target_idx])
    ds = Dataset(x=np.array(x_rows, dtype=float), y=np.array(y_vals, dtype=float))
    return ds, [header[j] for j in feature_idx], header[target_idx]


def _fmt(value) -> str:
    return repr(float(value)) if isinstance(value, (float, np.floating)) else str(value)


def write_dataset_csv(ds: Dataset, path, feature_names: list[str] | None = None,
                      include_z: bool = False) -> None:
    """Write a dataset with one header row; the confounder column is opt-in."""
    names = feature_names or [f"x{j + 1}" for j in range(ds.dim)]
    if len(names) != ds.dim:
        raise InvalidInput("feature name count must match the number of columns")
    with_z = include_z and ds.z is not None
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(names + ["y"] + (["z"] if with_z else []))
            for i in range(ds.n_samples):
                row = [_fmt(v) for v in ds.x[i]] + [_fmt(ds.y[i])]
                if with_z:
                    row.append(_fmt(ds.z[i]))
                writer.writerow(row)
    except OSError as err:
        raise IoError(f"{path}: {err}") from err


def write_records_csv(records: list[SimulationRecord], path) -> None:
    """Flat per-replication table for external plotting."""
    fields = list(SimulationRecord.__dataclass_fields__)
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(fields)
            for rec in records:
                row = asdict(rec)
                writer.writerow([_fmt(row[name]) for name in fields])
    except OSError as err:
        raise IoError(f"{path}: {err}") from err


def json_document(doc: dict) -> str:
    """Deterministic JSON text: sorted keys, two-space indent, newline-terminated."""
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_json(doc: dict, path) -> None:
    try:
        Path(path).write_text(json_document(doc), encoding="utf-8")
    except OSError as err:
        raise IoError(f"{path}: {err}") from err
