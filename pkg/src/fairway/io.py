"""CSV and text output with provenance headers and atomic replacement."""

from __future__ import annotations

import csv
import io
import math
import os
import tempfile
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .analysis import MetricMatrix
from .errors import FairwayError


class SchemaError(FairwayError, ValueError):
    """A CSV does not have the expected layout."""


def format_value(v) -> str:
    """Shortest round-tripping text for numbers; ints stay ints."""
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        f = float(v)
        if math.isnan(f):
            return "nan"
        if f == 0.0:
            return "0.0"  # no negative zero
        return repr(f)
    if v is None:
        return ""
    return str(v)


def provenance_line(fields: Mapping[str, object]) -> str:
    return "# " + " ".join(f"{k}={v}" for k, v in fields.items())


def atomic_write_text(path: str | Path, text: str) -> Path:
    """Write ``text`` to a sibling temp file, then rename over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if not text.endswith("\n"):
        text += "\n"
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def render_csv(header: Sequence[str], rows: Iterable[Sequence], provenance: Mapping[str, object]) -> str:
    buf = io.StringIO()
    buf.write(provenance_line(provenance) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_value(v) for v in row])
    return buf.getvalue()


def write_csv(path, header, rows, provenance) -> tuple[Path, int]:
    """Atomically write a CSV; returns the path and the number of data rows."""
    rows = list(rows)
    atomic_write_text(path, render_csv(header, rows, provenance))
    return Path(path), len(rows)


def write_matrix(path, m: MetricMatrix, provenance: Mapping[str, object], names: Sequence[str] | None = None):
    """Row-key columns first, then metrics alphabetically."""
    names = sorted(names) if names is not None else m.metric_names
    header = list(m.key_names) + names
    cols = [m.column(n) for n in names]
    rows = [list(key) + [c[i] for c in cols] for i, key in enumerate(m.row_keys)]
    prov = dict(provenance)
    prov["keys"] = ",".join(m.key_names)
    return write_csv(path, header, rows, prov)


def parse_provenance(line: str) -> dict[str, str]:
    out = {}
    for token in line.lstrip("#").split():
        k, sep, v = token.partition("=")
        if sep:
            out[k] = v
    return out


def _key_value(text: str):
    try:
        f = float(text)
    except ValueError:
        return text
    return int(f) if f.is_integer() and "." not in text and "e" not in text.lower() else f


def read_matrix(path: str | Path) -> MetricMatrix:
    """Read a CSV written by :func:`write_matrix`.

    Key columns come from the ``keys=`` provenance field; every other column
    must be numeric.

    Raises:
        SchemaError: missing header, ragged rows or non-numeric metrics.
    """
    path = Path(path)
    provenance: dict[str, str] = {}
    body = []
    with path.open(encoding="utf-8", newline="") as fh:
        for line in fh:
            if line.startswith("#"):
                provenance.update(parse_provenance(line))
            elif line.strip():
                body.append(line)
    reader = csv.reader(body)
    try:
        header = next(reader)
    except StopIteration:
        raise SchemaError(f"{path}: no header row") from None
    keys = [k for k in provenance.get("keys", "").split(",") if k]
    missing = [k for k in keys if k not in header]
    if missing:
        raise SchemaError(f"{path}: key column(s) {missing} not in header")
    key_idx = [header.index(k) for k in keys]
    metric_idx = [i for i, h in enumerate(header) if i not in key_idx]
    row_keys, values = [], []
    for lineno, row in enumerate(reader, 2):
        if len(row) != len(header):
            raise SchemaError(f"{path}: row {lineno} has {len(row)} fields, header has {len(header)}")
        row_keys.append(tuple(_key_value(row[i]) for i in key_idx))
        try:
            values.append([float(row[i]) for i in metric_idx])
        except ValueError as exc:
            raise SchemaError(f"{path}: row {lineno}: {exc}") from None
    arr = np.array(values, dtype=float).reshape(len(row_keys), len(metric_idx))
    columns = {header[i]: arr[:, j] for j, i in enumerate(metric_idx)}
    if not keys:
        row_keys = [(i,) for i in range(len(row_keys))]
        keys = ["row"]
    try:
        return MetricMatrix(row_keys, tuple(keys), columns, provenance)
    except ValueError as exc:
        raise SchemaError(f"{path}: {exc}") from None
