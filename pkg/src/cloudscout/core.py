"""Shared domain types: radiometer bands, cloud-class taxonomies, class-collapse
maps, pixel containers, and confusion matrices.

Everything here is immutable after construction and safe to share across
threads without synchronization.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum, IntEnum
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np

# The eight radiometer channels, in frozen order. Every radiance vector,
# model file, and CSV column layout follows this ordering; models refuse to
# predict on data declaring a different order.
BAND_NAMES: tuple[str, ...] = (
    "Tb250+0.0",
    "Tb310+2.5",
    "Tb380-0.8",
    "Tb380-1.8",
    "Tb380-3.3",
    "Tb380-6.2",
    "Tb380-9.5",
    "Tb670+0.0",
)

# CSV-safe column names, index-aligned with BAND_NAMES.
BAND_COLUMNS: tuple[str, ...] = (
    "tb250_00",
    "tb310_p25",
    "tb380_m08",
    "tb380_m18",
    "tb380_m33",
    "tb380_m62",
    "tb380_m95",
    "tb670_00",
)

N_BANDS = 8

SCIENCE_COLUMNS: tuple[str, ...] = ("iwp", "particle_size", "cloud_top_height")

# Physical range of generated (noise-free) brightness temperatures, kelvin.
TB_MIN = 100.0
TB_MAX = 350.0


class CloudScoutError(Exception):
    """Base class for all errors raised by this package."""


class InvalidMappingError(CloudScoutError):
    """A class-collapse mapping does not cover every source class."""


def is_tb380(band: int | str) -> bool:
    """True exactly for the five 380-GHz channels."""
    name = BAND_NAMES[band] if isinstance(band, (int, np.integer)) else band
    if name not in BAND_NAMES:
        raise ValueError(f"unknown band {band!r}")
    return name.startswith("Tb380")


class CloudClass5(IntEnum):
    """Five cloud types, totally ordered by storm intensity."""

    ClearSky = 0
    ThinCirrus = 1
    Cirrus = 2
    RainyAnvil = 3
    ConvectionCore = 4


class CloudClass3(IntEnum):
    """Targeting-relevant classes: everything not actively targeted collapses
    to NonStorm."""

    NonStorm = 0
    RainyAnvil = 1
    ConvectionCore = 2


class CloudClass2(IntEnum):
    """Storm / non-storm split used for headline recall numbers."""

    NonStorm = 0
    Storm = 1


class Region(Enum):
    Tropical = "tropical"
    NonTropical = "nontropical"


# Default raster geometry per region: (height, width, pixel_size_km).
REGION_DEFAULT_GEOMETRY: dict[Region, tuple[int, int, float]] = {
    Region.Tropical: (119, 208, 15.0),
    Region.NonTropical: (1998, 270, 1.33),
}

_COLLAPSE_5_TO_3 = {
    CloudClass5.ClearSky: CloudClass3.NonStorm,
    CloudClass5.ThinCirrus: CloudClass3.NonStorm,
    CloudClass5.Cirrus: CloudClass3.NonStorm,
    CloudClass5.RainyAnvil: CloudClass3.RainyAnvil,
    CloudClass5.ConvectionCore: CloudClass3.ConvectionCore,
}

_COLLAPSE_3_TO_2 = {
    CloudClass3.NonStorm: CloudClass2.NonStorm,
    CloudClass3.RainyAnvil: CloudClass2.Storm,
    CloudClass3.ConvectionCore: CloudClass2.Storm,
}


def collapse5to3(label: CloudClass5) -> CloudClass3:
    """Clear sky and both cirrus types become NonStorm; storm classes survive."""
    return _COLLAPSE_5_TO_3[CloudClass5(label)]


def collapse3to2(label: CloudClass3) -> CloudClass2:
    """Rainy anvil and convection core are both storm clouds."""
    return _COLLAPSE_3_TO_2[CloudClass3(label)]


# Name-level collapse maps, convenient for confusion-matrix folding.
COLLAPSE_5_TO_3_NAMES: dict[str, str] = {
    k.name: v.name for k, v in _COLLAPSE_5_TO_3.items()
}
COLLAPSE_3_TO_2_NAMES: dict[str, str] = {
    k.name: v.name for k, v in _COLLAPSE_3_TO_2.items()
}
COLLAPSE_5_TO_2_NAMES: dict[str, str] = {
    k.name: _COLLAPSE_3_TO_2[v].name for k, v in _COLLAPSE_5_TO_3.items()
}

CLASS5_NAMES: tuple[str, ...] = tuple(c.name for c in CloudClass5)
CLASS3_NAMES: tuple[str, ...] = tuple(c.name for c in CloudClass3)
CLASS2_NAMES: tuple[str, ...] = tuple(c.name for c in CloudClass2)


def storm_preferring_argmax(scores: np.ndarray) -> int:
    """Index of the maximum score; exact ties go to the strongest storm class.

    Missing a storm is the costly error direction, so ambiguity is resolved
    upward in intensity.
    """
    scores = np.asarray(scores)
    return scores.size - 1 - int(np.argmax(scores[::-1]))


def storm_preferring_argmax_rows(scores: np.ndarray) -> np.ndarray:
    """Row-wise ``storm_preferring_argmax`` for a (n, k) score matrix."""
    scores = np.asarray(scores)
    return scores.shape[1] - 1 - np.argmax(scores[:, ::-1], axis=1)


@dataclass(frozen=True)
class ConfusionMatrix:
    """Counts of (true class, predicted class) pairs.

    Rows are true classes, columns predictions, both ordered by
    ``class_names``.
    """

    class_names: tuple[str, ...]
    counts: np.ndarray

    def __post_init__(self) -> None:
        counts = np.asarray(self.counts, dtype=np.int64)
        n = len(self.class_names)
        if counts.shape != (n, n):
            raise ValueError(
                f"counts shape {counts.shape} does not match {n} class names"
            )
        if (counts < 0).any():
            raise ValueError("confusion counts must be nonnegative")
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "class_names", tuple(self.class_names))

    @classmethod
    def from_labels(
        cls,
        true_idx: np.ndarray,
        pred_idx: np.ndarray,
        class_names: Sequence[str],
    ) -> "ConfusionMatrix":
        n = len(class_names)
        true_idx = np.asarray(true_idx, dtype=np.int64)
        pred_idx = np.asarray(pred_idx, dtype=np.int64)
        if true_idx.shape != pred_idx.shape:
            raise ValueError("true/predicted label arrays differ in length")
        flat = np.bincount(true_idx * n + pred_idx, minlength=n * n)
        return cls(tuple(class_names), flat.reshape(n, n))

    def total(self) -> int:
        return int(self.counts.sum())

    def recalls(self) -> dict[str, Optional[float]]:
        """Per-class recall (diagonal over row sum); None for empty rows."""
        row_sums = self.counts.sum(axis=1)
        out: dict[str, Optional[float]] = {}
        for i, name in enumerate(self.class_names):
            if row_sums[i] == 0:
                out[name] = None
            else:
                out[name] = float(self.counts[i, i] / row_sums[i])
        return out

    def overall_accuracy(self) -> float:
        total = self.total()
        if total == 0:
            raise ValueError("empty confusion matrix has no accuracy")
        return float(np.trace(self.counts) / total)

    def to_dict(self) -> dict:
        return {
            "class_names": list(self.class_names),
            "counts": self.counts.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ConfusionMatrix":
        return cls(tuple(data["class_names"]), np.array(data["counts"]))


def collapse_matrix(
    cm: ConfusionMatrix,
    mapping: dict[str, str],
    target_order: Sequence[str] | None = None,
) -> ConfusionMatrix:
    """Fold a confusion matrix through a class surjection.

    Counts are summed over preimage blocks, so the total is preserved. Raises
    InvalidMappingError when ``mapping`` misses any source class.
    """
    missing = [name for name in cm.class_names if name not in mapping]
    if missing:
        raise InvalidMappingError(f"mapping does not cover classes {missing}")
    if target_order is None:
        seen: list[str] = []
        for name in cm.class_names:
            t = mapping[name]
            if t not in seen:
                seen.append(t)
        target_order = seen
    target_index = {name: i for i, name in enumerate(target_order)}
    n_t = len(target_order)
    out = np.zeros((n_t, n_t), dtype=np.int64)
    for i, row_name in enumerate(cm.class_names):
        ti = target_index[mapping[row_name]]
        for j, col_name in enumerate(cm.class_names):
            tj = target_index[mapping[col_name]]
            out[ti, tj] += cm.counts[i, j]
    return ConfusionMatrix(tuple(target_order), out)


@dataclass(frozen=True)
class PixelRecord:
    """One grid cell: position, the 8-band radiance, and (optionally) the
    hidden science triple and a class label."""

    image_id: int
    row: int
    col: int
    radiance: tuple[float, ...]
    science: Optional[tuple[float, float, float]] = None
    label: Optional[CloudClass5] = None

    def __post_init__(self) -> None:
        if len(self.radiance) != N_BANDS:
            raise ValueError(f"radiance must have {N_BANDS} bands")


class PixelTable(Sequence[PixelRecord]):
    """Columnar, immutable container of pixel records.

    Behaves as a sequence of PixelRecord while keeping numpy columns
    internally, so bulk operations stay vectorized. Missing science is
    encoded as a NaN row, missing labels as -1.
    """

    __slots__ = ("image_ids", "rows", "cols", "radiance", "science", "labels")

    def __init__(
        self,
        image_ids: np.ndarray,
        rows: np.ndarray,
        cols: np.ndarray,
        radiance: np.ndarray,
        science: np.ndarray | None = None,
        labels: np.ndarray | None = None,
    ) -> None:
        n = len(image_ids)
        image_ids = np.asarray(image_ids, dtype=np.int64)
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        radiance = np.asarray(radiance, dtype=np.float64)
        if radiance.shape != (n, N_BANDS):
            raise ValueError(f"radiance must be (n, {N_BANDS}), got {radiance.shape}")
        if not np.isfinite(radiance).all():
            raise ValueError("radiance values must be finite")
        if science is None:
            science = np.full((n, 3), np.nan)
        science = np.asarray(science, dtype=np.float64)
        if science.shape != (n, 3):
            raise ValueError(f"science must be (n, 3), got {science.shape}")
        if labels is None:
            labels = np.full(n, -1, dtype=np.int16)
        labels = np.asarray(labels, dtype=np.int16)
        if labels.shape != (n,):
            raise ValueError("labels must be a flat array")
        if ((labels < -1) | (labels > 4)).any():
            raise ValueError("labels must be -1 (absent) or a CloudClass5 value")
        for arr in (image_ids, rows, cols, radiance, science, labels):
            arr.setflags(write=False)
        self.image_ids = image_ids
        self.rows = rows
        self.cols = cols
        self.radiance = radiance
        self.science = science
        self.labels = labels

    # -- sequence protocol ---------------------------------------------------

    def __len__(self) -> int:
        return len(self.image_ids)

    def __getitem__(self, key):
        if isinstance(key, (int, np.integer)):
            i = int(key)
            if i < 0:
                i += len(self)
            if not 0 <= i < len(self):
                raise IndexError(key)
            sci = self.science[i]
            has_sci = not np.isnan(sci).any()
            lab = int(self.labels[i])
            return PixelRecord(
                image_id=int(self.image_ids[i]),
                row=int(self.rows[i]),
                col=int(self.cols[i]),
                radiance=tuple(float(v) for v in self.radiance[i]),
                science=tuple(float(v) for v in sci) if has_sci else None,
                label=CloudClass5(lab) if lab >= 0 else None,
            )
        return self.select(key)

    def __iter__(self) -> Iterator[PixelRecord]:
        for i in range(len(self)):
            yield self[i]

    # -- bulk views ----------------------------------------------------------

    @property
    def has_science(self) -> np.ndarray:
        return ~np.isnan(self.science).any(axis=1)

    @property
    def has_labels(self) -> np.ndarray:
        return self.labels >= 0

    def select(self, key) -> "PixelTable":
        """New table with the rows picked by a slice, mask, or index array."""
        return PixelTable(
            self.image_ids[key],
            self.rows[key],
            self.cols[key],
            self.radiance[key],
            self.science[key],
            self.labels[key],
        )

    def with_labels(self, labels: np.ndarray) -> "PixelTable":
        return PixelTable(
            self.image_ids, self.rows, self.cols, self.radiance, self.science,
            np.asarray(labels, dtype=np.int16),
        )

    def with_radiance(self, radiance: np.ndarray) -> "PixelTable":
        return PixelTable(
            self.image_ids, self.rows, self.cols, radiance, self.science,
            self.labels,
        )

    @classmethod
    def concat(cls, tables: Iterable["PixelTable"]) -> "PixelTable":
        tables = list(tables)
        if not tables:
            return cls.empty()
        return cls(
            np.concatenate([t.image_ids for t in tables]),
            np.concatenate([t.rows for t in tables]),
            np.concatenate([t.cols for t in tables]),
            np.concatenate([t.radiance for t in tables]),
            np.concatenate([t.science for t in tables]),
            np.concatenate([t.labels for t in tables]),
        )

    @classmethod
    def empty(cls) -> "PixelTable":
        return cls(
            np.empty(0, dtype=np.int64),
            np.empty(0, dtype=np.int64),
            np.empty(0, dtype=np.int64),
            np.empty((0, N_BANDS)),
            np.empty((0, 3)),
            np.empty(0, dtype=np.int16),
        )

    @classmethod
    def from_records(cls, records: Iterable[PixelRecord]) -> "PixelTable":
        records = list(records)
        n = len(records)
        image_ids = np.fromiter((r.image_id for r in records), np.int64, n)
        rows = np.fromiter((r.row for r in records), np.int64, n)
        cols = np.fromiter((r.col for r in records), np.int64, n)
        radiance = np.array([r.radiance for r in records], dtype=np.float64).reshape(
            n, N_BANDS
        )
        science = np.full((n, 3), np.nan)
        for i, r in enumerate(records):
            if r.science is not None:
                science[i] = r.science
        labels = np.fromiter(
            ((-1 if r.label is None else int(r.label)) for r in records),
            np.int16,
            n,
        )
        return cls(image_ids, rows, cols, radiance, science, labels)

    @classmethod
    def coerce(cls, pixels) -> "PixelTable":
        """Accept either a PixelTable or any iterable of PixelRecord."""
        if isinstance(pixels, cls):
            return pixels
        return cls.from_records(pixels)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PixelTable):
            return NotImplemented
        return (
            np.array_equal(self.image_ids, other.image_ids)
            and np.array_equal(self.rows, other.rows)
            and np.array_equal(self.cols, other.cols)
            and np.array_equal(self.radiance, other.radiance)
            and np.array_equal(self.science, other.science, equal_nan=True)
            and np.array_equal(self.labels, other.labels)
        )

    def __repr__(self) -> str:
        return f"PixelTable(n={len(self)})"


@dataclass(frozen=True)
class SceneGrid:
    """A region-tagged raster of pixels. ``pixels`` is row-major."""

    region: Region
    pixel_size_km: float
    height: int
    width: int
    pixels: PixelTable = field(repr=False)

    def __post_init__(self) -> None:
        if self.height <= 0 or self.width <= 0:
            raise ValueError("grid dimensions must be positive")
        if self.pixel_size_km <= 0:
            raise ValueError("pixel size must be positive")
        if len(self.pixels) != self.height * self.width:
            raise ValueError(
                f"pixel count {len(self.pixels)} does not match "
                f"{self.height}x{self.width} grid"
            )
        if (self.pixels.rows >= self.height).any() or (
            self.pixels.cols >= self.width
        ).any():
            raise ValueError("pixel coordinates outside grid dimensions")

    @staticmethod
    def default_geometry(region: Region) -> tuple[int, int, float]:
        return REGION_DEFAULT_GEOMETRY[region]

    @property
    def image_id(self) -> int:
        """Image id shared by every pixel of the grid."""
        ids = np.unique(self.pixels.image_ids)
        if len(ids) != 1:
            raise ValueError("scene contains pixels from multiple images")
        return int(ids[0])
