"""CSV ingestion/output and JSON report writing.

CSV dialect: comma-separated, UTF-8, header row required, "." decimal,
scientific notation accepted. Non-numeric or non-finite cells are validation
errors; nothing is imputed. All files are written to a temporary name and
atomically renamed, so a failed run never leaves partial output.
"""

from __future__ import annotations

import csv
import json
import os
import tempfile
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .data import DataMatrix
from .errors import ValidationError

SCHEMA_VERSION = 1


def read_numeric_csv(
    path: str | Path,
    label_col: str | None = None,
    pred_col: str | None = None,
) -> tuple[DataMatrix, np.ndarray | None, np.ndarray | None]:
    """Load a numeric CSV into (features, labels, predictions).

    Every column other than the named label/prediction columns is a feature.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise ValidationError(f"{path}: empty file, header row required") from None
        header = [h.strip() for h in header]
        if len(set(header)) != len(header):
            raise ValidationError(f"{path}: duplicate column names in header")
        for wanted, flag in ((label_col, "label"), (pred_col, "prediction")):
            if wanted is not None and wanted not in header:
                raise ValidationError(f"{path}: {flag} column {wanted!r} not found")
        rows = []
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ValidationError(
                    f"{path}:{line_no}: expected {len(header)} cells, got {len(row)}"
                )
            parsed = []
            for name, cell in zip(header, row):
                try:
                    value = float(cell)
                except ValueError:
                    raise ValidationError(
                        f"{path}:{line_no}: non-numeric cell {cell!r} in column {name!r}"
                    ) from None
                if not np.isfinite(value):
                    raise ValidationError(
                        f"{path}:{line_no}: non-finite value in column {name!r}"
                    )
                parsed.append(value)
            rows.append(parsed)
    if len(rows) < 2:
        raise ValidationError(f"{path}: need at least 2 data rows, got {len(rows)}")
    table = np.asarray(rows, dtype=np.float64)
    labels = predictions = None
    feature_idx = []
    for i, name in enumerate(header):
        if name == label_col:
            labels = table[:, i]
        elif name == pred_col:
            predictions = table[:, i]
        else:
            feature_idx.append(i)
    if not feature_idx:
        raise ValidationError(f"{path}: no feature columns left")
    features = DataMatrix(table[:, feature_idx], tuple(header[i] for i in feature_idx))
    return features, labels, predictions


def _atomic_write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.replace(tmp_name, path)
    except BaseException:
        try:
            os.unlink(tmp_name)
        except OSError:
            pass
        raise


def write_sample_csv(path: str | Path, features: DataMatrix, y: np.ndarray) -> None:
    """Write features plus a final "y" column; floats round-trip exactly."""
    path = Path(path)
    lines = [",".join(features.column_names + ("y",))]
    for i in range(features.n):
        cells = [repr(float(v)) for v in features.values[i]]
        cells.append(repr(float(y[i])))
        lines.append(",".join(cells))
    _atomic_write_text(path, "\n".join(lines) + "\n")


def write_records_csv(path: str | Path, records: list[dict], columns: list[str]) -> None:
    path = Path(path)
    lines = [",".join(columns)]
    for record in records:
        cells = []
        for col in columns:
            value = record.get(col, "")
            if isinstance(value, float):
                cells.append(repr(value))
            else:
                cells.append(str(value))
        lines.append(",".join(cells))
    _atomic_write_text(path, "\n".join(lines) + "\n")


def new_report(command: str, **fields) -> dict:
    """Report skeleton; ``created_at`` is the only field that varies per run."""
    report = {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "created_at": datetime.now(timezone.utc).isoformat(),
    }
    report.update(fields)
    return report


def write_report_json(path: str | Path, report: dict) -> None:
    _atomic_write_text(Path(path), json.dumps(report, indent=2, sort_keys=True) + "\n")


def load_report_json(path: str | Path) -> dict:
    with Path(path).open(encoding="utf-8") as handle:
        return json.load(handle)
