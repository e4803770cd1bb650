"""Resize-aware conversion from pixel thickness to physical CIMT.

The calibration factor is defined at the original image resolution; after
a resize to a working grid of height H the vertical pixel size becomes

    mm_per_pixel_working = mm_per_pixel_orig * orig_height / H

and a thickness of t pixels on the working grid converts to micrometers
as t * mm_per_pixel_working * 1000. Only the vertical scale participates:
thickness is measured along columns, so horizontal distortion from a
square resize changes which columns exist, not their physical height.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable

from .errors import InvalidConfigError, InvalidInputError, ParseError

logger = logging.getLogger(__name__)

CALIBRATION_HEADER = ["image_id", "mm_per_pixel", "orig_width", "orig_height"]

# mm/px sanity rails: hard failure outside the outer band, warning outside
# the inner band. Multicenter scanners vary, but a wildly wrong CF silently
# corrupts every micrometer output downstream.
MM_PER_PIXEL_HARD = (0.001, 1.0)
MM_PER_PIXEL_PLAUSIBLE = (0.01, 0.2)


@dataclass(frozen=True)
class CalibrationRecord:
    """Original-resolution pixel size and dimensions for one image."""

    image_id: str
    mm_per_pixel_orig: float
    orig_width: int
    orig_height: int

    def __post_init__(self):
        mm = self.mm_per_pixel_orig
        if not (mm == mm and MM_PER_PIXEL_HARD[0] < mm < MM_PER_PIXEL_HARD[1]):
            raise InvalidInputError(
                f"{self.image_id}: mm_per_pixel {mm!r} outside plausible range "
                f"({MM_PER_PIXEL_HARD[0]}, {MM_PER_PIXEL_HARD[1]})"
            )
        if not (MM_PER_PIXEL_PLAUSIBLE[0] < mm < MM_PER_PIXEL_PLAUSIBLE[1]):
            logger.warning(
                "%s: mm_per_pixel %g outside the usual (%g, %g) band",
                self.image_id, mm, *MM_PER_PIXEL_PLAUSIBLE,
            )
        if self.orig_width <= 0 or self.orig_height <= 0:
            raise InvalidInputError(
                f"{self.image_id}: non-positive original dimensions "
                f"{self.orig_width}x{self.orig_height}"
            )


@dataclass(frozen=True)
class WorkingScale:
    """Vertical pixel size on the grid where thickness was counted."""

    target_height: int
    mm_per_pixel_working: float

    def __post_init__(self):
        if self.mm_per_pixel_working <= 0:
            raise InvalidInputError(f"mm_per_pixel_working {self.mm_per_pixel_working} must be > 0")


@dataclass(frozen=True)
class MeasurementResult:
    """Per-image CIMT plus the parameters that produced it.

    ``threshold_used`` is None for measurements that never binarized a
    probability map (reference contours measured sub-pixel).
    """

    image_id: str
    cimt_px_working: float
    cimt_um: float
    threshold_used: float | None
    scale: WorkingScale
    valid_columns: int


def working_pixel_size(c: CalibrationRecord, target_height: int) -> WorkingScale:
    """Vertical mm/px after resizing the original image to ``target_height`` rows."""
    if target_height <= 0:
        raise InvalidConfigError(f"target_height {target_height} must be > 0")
    if target_height == c.orig_height:  # keep the identity exact, not just close
        mm = c.mm_per_pixel_orig
    else:
        mm = c.mm_per_pixel_orig * c.orig_height / target_height
    return WorkingScale(target_height=target_height, mm_per_pixel_working=mm)


def px_to_um(t_px: float, s: WorkingScale) -> float:
    if t_px < 0:
        raise InvalidInputError(f"negative pixel thickness {t_px}")
    return t_px * s.mm_per_pixel_working * 1000.0


def parse_calibration_table(source: IO[str] | Iterable[str]) -> list[CalibrationRecord]:
    """Parse the calibration CSV (header image_id,mm_per_pixel,orig_width,orig_height)."""
    reader = csv.reader(source)
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("empty calibration table") from None
    header = [h.strip() for h in header]
    if header != CALIBRATION_HEADER:
        raise ParseError(
            f"bad calibration header {header}, expected {CALIBRATION_HEADER}", line=1
        )
    records: list[CalibrationRecord] = []
    seen: dict[str, int] = {}
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != 4:
            raise ParseError(f"expected 4 columns, got {len(row)}", line=lineno)
        image_id = row[0].strip()
        if not image_id:
            raise ParseError("empty image_id", line=lineno)
        if image_id in seen:
            raise ParseError(
                f"duplicate image_id {image_id!r} (first seen on line {seen[image_id]})",
                line=lineno,
            )
        seen[image_id] = lineno
        try:
            mm = float(row[1])
            width = int(row[2])
            height = int(row[3])
        except ValueError as exc:
            raise ParseError(f"non-numeric value in row {row}", line=lineno) from exc
        try:
            records.append(CalibrationRecord(image_id, mm, width, height))
        except InvalidInputError as exc:
            raise ParseError(str(exc), line=lineno) from exc
    return records


def load_calibration_table(path: str | Path) -> dict[str, CalibrationRecord]:
    with open(path, newline="", encoding="utf-8") as fh:
        records = parse_calibration_table(fh)
    return {r.image_id: r for r in records}


def write_calibration_table(path: str | Path, records: Iterable[CalibrationRecord]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CALIBRATION_HEADER)
        for r in records:
            # str() keeps the shortest round-trip float representation
            writer.writerow([r.image_id, str(r.mm_per_pixel_orig), r.orig_width, r.orig_height])
