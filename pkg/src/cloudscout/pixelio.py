"""Pixel CSV serialization and small JSON helpers.

The pixel CSV schema is fixed: one row per pixel, radiances at full decimal
precision (shortest round-trip repr), science and label columns empty when
absent, labels spelled as CloudClass5 names.
"""

from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path

import numpy as np

from .core import BAND_COLUMNS, CloudClass5, CloudScoutError, PixelTable

PIXEL_CSV_HEADER: tuple[str, ...] = (
    "image_id",
    "row",
    "col",
    *BAND_COLUMNS,
    "iwp",
    "particle_size",
    "cloud_top_height",
    "label",
)


class PixelCsvError(CloudScoutError):
    """Raised on malformed pixel CSV content; carries the offending line."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        suffix = f" (line {line})" if line is not None else ""
        super().__init__(message + suffix)


def write_pixels(pixels: PixelTable, path: str | Path) -> None:
    """Write a pixel table to CSV with the canonical header."""
    pixels = PixelTable.coerce(pixels)
    path = Path(path)
    has_science = pixels.has_science
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(PIXEL_CSV_HEADER)
        for i in range(len(pixels)):
            row: list[str] = [
                str(int(pixels.image_ids[i])),
                str(int(pixels.rows[i])),
                str(int(pixels.cols[i])),
            ]
            row.extend(repr(float(v)) for v in pixels.radiance[i])
            if has_science[i]:
                row.extend(repr(float(v)) for v in pixels.science[i])
            else:
                row.extend(["", "", ""])
            lab = int(pixels.labels[i])
            row.append(CloudClass5(lab).name if lab >= 0 else "")
            writer.writerow(row)


def read_pixels(path: str | Path) -> PixelTable:
    """Read a pixel CSV; raises PixelCsvError with a line number on bad rows."""
    path = Path(path)
    image_ids: list[int] = []
    rows: list[int] = []
    cols: list[int] = []
    radiance: list[list[float]] = []
    science: list[list[float]] = []
    labels: list[int] = []
    label_index = {c.name: int(c) for c in CloudClass5}
    with path.open("r", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise PixelCsvError(f"{path} is empty; expected a header row")
        if tuple(header) != PIXEL_CSV_HEADER:
            raise PixelCsvError(
                f"unexpected header {header!r}; expected {list(PIXEL_CSV_HEADER)}"
            )
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(PIXEL_CSV_HEADER):
                raise PixelCsvError(
                    f"expected {len(PIXEL_CSV_HEADER)} fields, got {len(row)}",
                    line=lineno,
                )
            try:
                image_ids.append(int(row[0]))
                rows.append(int(row[1]))
                cols.append(int(row[2]))
                radiance.append([float(v) for v in row[3:11]])
                sci = row[11:14]
                if all(v == "" for v in sci):
                    science.append([np.nan, np.nan, np.nan])
                elif any(v == "" for v in sci):
                    raise ValueError("partially empty science columns")
                else:
                    science.append([float(v) for v in sci])
            except ValueError as exc:
                raise PixelCsvError(str(exc), line=lineno) from exc
            lab = row[14]
            if lab == "":
                labels.append(-1)
            elif lab in label_index:
                labels.append(label_index[lab])
            else:
                raise PixelCsvError(f"unknown label {lab!r}", line=lineno)
    n = len(image_ids)
    return PixelTable(
        np.array(image_ids, dtype=np.int64),
        np.array(rows, dtype=np.int64),
        np.array(cols, dtype=np.int64),
        np.array(radiance, dtype=np.float64).reshape(n, 8),
        np.array(science, dtype=np.float64).reshape(n, 3),
        np.array(labels, dtype=np.int16),
    )


def write_json(data, path: str | Path) -> None:
    """Deterministic JSON dump: sorted keys, stable float repr, newline EOF."""
    path = Path(path)
    with path.open("w") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_json(path: str | Path):
    with Path(path).open("r") as fh:
        return json.load(fh)


def file_sha256(path: str | Path) -> str:
    h = hashlib.sha256()
    with Path(path).open("rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()
