"""Reading labeled point patterns from delimited text."""

from __future__ import annotations

import csv
import hashlib
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DegenerateConfigurationWarning
from .geom import PointSet

__all__ = ["Schema", "EmptyInputError", "MalformedInputError", "ingest", "parse_window"]

_MAX_REPORTED = 10


class EmptyInputError(ValueError):
    """The file holds a header but no data rows."""


class MalformedInputError(ValueError):
    """Rows that cannot be parsed; ``lines`` lists their 1-based line numbers."""

    def __init__(self, message: str, lines: list[int]):
        super().__init__(message)
        self.lines = lines


@dataclass(frozen=True)
class Schema:
    """Column names and delimiter of the input file."""

    x: str = "x"
    y: str = "y"
    label: str = "label"
    delimiter: str = ","


def parse_window(text: str) -> tuple[float, float, float, float]:
    """Parse ``"xmin,xmax,ymin,ymax"`` (commas or blanks)."""
    parts = text.replace(",", " ").split()
    if len(parts) != 4:
        raise ValueError(f"window needs 4 numbers xmin xmax ymin ymax, got {text!r}")
    xmin, xmax, ymin, ymax = (float(v) for v in parts)
    if not (xmin < xmax and ymin < ymax):
        raise ValueError(f"degenerate window {text!r}")
    return xmin, xmax, ymin, ymax


def ingest(path, schema: Schema | None = None, window=None) -> PointSet:
    """Read a point pattern with header columns ``x``, ``y``, ``label``.

    Blank lines are skipped. A leading ``# window: xmin,xmax,ymin,ymax``
    comment sets the study window unless ``window`` is given. Labels may be
    any strings; integer-like labels are ordered numerically. The returned
    point set carries a provenance record (source, checksum, row count,
    class sizes, bounding box).
    """
    schema = schema or Schema()
    path = Path(path)
    raw = path.read_bytes()
    text = raw.decode("utf-8-sig")
    lines = text.splitlines()

    meta_window = None
    start = 0
    while start < len(lines) and (lines[start].startswith("#") or not lines[start].strip()):
        body = lines[start].lstrip("#").strip()
        if body.lower().startswith("window"):
            meta_window = parse_window(body.split(":", 1)[-1].split("=", 1)[-1])
        start += 1
    if start >= len(lines):
        raise EmptyInputError(f"{path}: no header row")

    reader = csv.reader(lines[start:], delimiter=schema.delimiter)
    header = [h.strip() for h in next(reader)]
    try:
        ix, iy, il = (header.index(c) for c in (schema.x, schema.y, schema.label))
    except ValueError:
        raise ValueError(
            f"{path}: header {header} lacks one of the columns "
            f"{schema.x!r}, {schema.y!r}, {schema.label!r}"
        ) from None

    coords, labels, bad = [], [], []
    for offset, row in enumerate(reader, start=start + 2):
        if not row or all(not c.strip() for c in row):
            continue
        try:
            if len(row) != len(header):
                raise ValueError
            x, y = float(row[ix]), float(row[iy])
            lab = row[il].strip()
            if not lab or not np.isfinite(x) or not np.isfinite(y):
                raise ValueError
        except ValueError:
            bad.append(offset)
            continue
        coords.append((x, y))
        labels.append(lab)
    if bad:
        shown = ", ".join(map(str, bad[:_MAX_REPORTED]))
        more = f" and {len(bad) - _MAX_REPORTED} more" if len(bad) > _MAX_REPORTED else ""
        raise MalformedInputError(f"{path}: malformed rows at lines {shown}{more}", bad)
    if not coords:
        raise EmptyInputError(f"{path}: no data rows")
    if len(coords) < 2:
        raise ValueError(f"{path}: need at least 2 points, got {len(coords)}")

    xy = np.array(coords)
    _, counts = np.unique(xy, axis=0, return_counts=True)
    n_dup = int((counts - 1).sum())
    if n_dup:
        warnings.warn(
            f"{path}: {n_dup} duplicate coordinate rows; coincident points are mutual NNs at distance 0",
            DegenerateConfigurationWarning,
            stacklevel=2,
        )
    ps = PointSet.from_raw(xy, labels, window or meta_window)
    provenance = {
        "source": str(path),
        "sha256": hashlib.sha256(raw).hexdigest(),
        "rows": len(coords),
        "duplicates": n_dup,
        "class_sizes": {name: int(c) for name, c in zip(ps.label_names, ps.class_sizes)},
        "bounding_box": [float(xy[:, 0].min()), float(xy[:, 0].max()), float(xy[:, 1].min()), float(xy[:, 1].max())],
        "columns": {"x": schema.x, "y": schema.y, "label": schema.label},
    }
    return PointSet(ps.coords, ps.labels, ps.label_names, ps.window, provenance)
