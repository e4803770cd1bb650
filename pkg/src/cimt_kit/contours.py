"""Expert LI/MA contour ingestion, rasterization and reference measurement.

Contour files hold one `x y` pair per line in original-image pixel
coordinates (sub-pixel allowed). Polylines are canonicalized on parse:
sorted by x with duplicate-x rows averaged, leaving x strictly increasing.
Reference CIMT is the per-column vertical distance MA - LI, deliberately
the same geometry the prediction side measures, so predicted-vs-reference
differences isolate segmentation error rather than metric mismatch.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable

import numpy as np

from .bandcore import AggregationPolicy, BinaryMask
from .calibration import CalibrationRecord, MeasurementResult, WorkingScale
from .errors import GeometryError, InvalidInputError, ParseError

logger = logging.getLogger(__name__)

# Fraction of sampled columns allowed to violate LI-above-MA before the
# pair is rejected outright.
FAR_WALL_VIOLATION_LIMIT = 0.01


@dataclass(frozen=True)
class Polyline:
    """Canonicalized open polyline: x strictly increasing, sub-pixel rows."""

    xs: np.ndarray  # (n,) float64, strictly increasing
    ys: np.ndarray  # (n,) float64

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=np.float64)
        ys = np.asarray(self.ys, dtype=np.float64)
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)
        if xs.ndim != 1 or xs.shape != ys.shape:
            raise InvalidInputError("polyline xs/ys must be 1-D arrays of equal length")
        if len(xs) < 2:
            raise InvalidInputError(f"polyline needs at least 2 points, got {len(xs)}")
        if not (np.isfinite(xs).all() and np.isfinite(ys).all()):
            raise InvalidInputError("polyline contains non-finite coordinates")
        if (xs < 0).any() or (ys < 0).any():
            raise InvalidInputError("polyline contains negative coordinates")
        if not (np.diff(xs) > 0).all():
            raise InvalidInputError("polyline x coordinates must be strictly increasing")

    @classmethod
    def from_points(cls, points: Iterable[tuple[float, float]]) -> "Polyline":
        """Canonicalize raw points: sort by x, average rows sharing an x."""
        pts = sorted(points)
        xs: list[float] = []
        ys: list[float] = []
        i = 0
        while i < len(pts):
            j = i
            while j < len(pts) and pts[j][0] == pts[i][0]:
                j += 1
            xs.append(pts[i][0])
            ys.append(math.fsum(p[1] for p in pts[i:j]) / (j - i))
            i = j
        return cls(np.array(xs), np.array(ys))

    @property
    def x_min(self) -> float:
        return float(self.xs[0])

    @property
    def x_max(self) -> float:
        return float(self.xs[-1])


@dataclass(frozen=True)
class BandMaskSpec:
    """Target grid for rasterization."""

    width: int
    height: int
    resolution_tag: str = "original"  # "original" | "working"

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise InvalidInputError(f"non-positive mask dimensions {self.width}x{self.height}")
        if self.resolution_tag not in ("original", "working"):
            raise InvalidInputError(f"unknown resolution tag {self.resolution_tag!r}")


def parse_polyline(source: IO[str] | Iterable[str]) -> Polyline:
    """Read whitespace-separated `x y` pairs, one per line; blank lines skipped."""
    points: list[tuple[float, float]] = []
    lineno = 0
    for lineno, line in enumerate(source, start=1):
        tokens = line.split()
        if not tokens:
            continue
        if len(tokens) != 2:
            raise ParseError(f"expected 'x y', got {line.strip()!r}", line=lineno)
        try:
            x, y = float(tokens[0]), float(tokens[1])
        except ValueError as exc:
            raise ParseError(f"non-numeric token in {line.strip()!r}", line=lineno) from exc
        if not (math.isfinite(x) and math.isfinite(y)):
            raise ParseError(f"non-finite coordinate in {line.strip()!r}", line=lineno)
        points.append((x, y))
    if len(points) < 2:
        raise ParseError(f"polyline needs at least 2 points, got {len(points)}", line=lineno or None)
    try:
        return Polyline.from_points(points)
    except InvalidInputError as exc:
        raise ParseError(str(exc)) from exc


def sample_at_columns(p: Polyline, columns: np.ndarray | list) -> np.ndarray:
    """Linear interpolation at the given x positions; NaN outside the span."""
    cols = np.asarray(columns, dtype=np.float64)
    rows = np.interp(cols, p.xs, p.ys)
    rows[(cols < p.x_min) | (cols > p.x_max)] = np.nan
    return rows


@dataclass(frozen=True)
class ContourPair:
    """LI and MA polylines for one image (far-wall convention: LI above MA)."""

    image_id: str
    li: Polyline
    ma: Polyline

    def __post_init__(self):
        lo, hi = self.overlap_span()
        if lo > hi:
            return  # no overlap; downstream ops handle the empty span
        cols = np.arange(lo, hi + 1, dtype=np.float64)
        li_rows = sample_at_columns(self.li, cols)
        ma_rows = sample_at_columns(self.ma, cols)
        violations = int(np.count_nonzero(ma_rows < li_rows))
        if violations > FAR_WALL_VIOLATION_LIMIT * len(cols):
            raise GeometryError(
                f"{self.image_id}: MA above LI at {violations}/{len(cols)} columns "
                f"(far-wall convention violated)"
            )

    def overlap_span(self) -> tuple[int, int]:
        """Integer column range [lo, hi] covered by both polylines (lo > hi if empty)."""
        lo = math.ceil(max(self.li.x_min, self.ma.x_min))
        hi = math.floor(min(self.li.x_max, self.ma.x_max))
        return lo, hi


def parse_contour_pair(li_source, ma_source, image_id: str) -> ContourPair:
    try:
        li = parse_polyline(li_source)
    except ParseError as exc:
        raise ParseError(f"{image_id} LI: {exc}") from exc
    try:
        ma = parse_polyline(ma_source)
    except ParseError as exc:
        raise ParseError(f"{image_id} MA: {exc}") from exc
    return ContourPair(image_id=image_id, li=li, ma=ma)


def load_contour_pair(directory: str | Path, image_id: str) -> ContourPair:
    """Load `<image_id>.li.txt` / `<image_id>.ma.txt` from a directory."""
    directory = Path(directory)
    li_path = directory / f"{image_id}.li.txt"
    ma_path = directory / f"{image_id}.ma.txt"
    with open(li_path, encoding="utf-8") as li_fh, open(ma_path, encoding="utf-8") as ma_fh:
        return parse_contour_pair(li_fh, ma_fh, image_id)


def write_polyline(path: str | Path, p: Polyline) -> None:
    lines = [f"{x!r} {y!r}\n" for x, y in zip(p.xs.tolist(), p.ys.tolist())]
    Path(path).write_text("".join(lines), encoding="utf-8")


def rasterize_band(c: ContourPair, spec: BandMaskSpec, scale_x: float, scale_y: float) -> BinaryMask:
    """Scan-fill the LI..MA band onto the target grid.

    Polyline coordinates are scaled by (scale_x, scale_y); for every integer
    column in the scaled overlap span, rows r with

        li_scaled(x) <= r + 0.5 <= ma_scaled(x)

    are set (pixel-center rule, unbiased under vertical shifts). Rows and
    columns outside the grid are clipped.
    """
    if scale_x <= 0 or scale_y <= 0:
        raise InvalidInputError(f"scales must be positive, got ({scale_x}, {scale_y})")
    bits = np.zeros((spec.height, spec.width), dtype=bool)
    lo = math.ceil(max(c.li.x_min, c.ma.x_min) * scale_x)
    hi = math.floor(min(c.li.x_max, c.ma.x_max) * scale_x)
    lo = max(lo, 0)
    hi = min(hi, spec.width - 1)
    if lo > hi:
        logger.warning("%s: empty overlap span after scaling, mask is empty", c.image_id)
        return BinaryMask(image_id=c.image_id, bits=bits, threshold_used=0.5)
    cols = np.arange(lo, hi + 1, dtype=np.float64)
    li_rows = np.interp(cols / scale_x, c.li.xs, c.li.ys) * scale_y
    ma_rows = np.interp(cols / scale_x, c.ma.xs, c.ma.ys) * scale_y
    r_first = np.ceil(li_rows - 0.5).astype(np.int64)
    r_last = np.floor(ma_rows - 0.5).astype(np.int64)
    r_first = np.maximum(r_first, 0)
    r_last = np.minimum(r_last, spec.height - 1)
    for x, r0, r1 in zip(cols.astype(np.int64), r_first, r_last):
        if r0 <= r1:
            bits[r0 : r1 + 1, x] = True
    return BinaryMask(image_id=c.image_id, bits=bits, threshold_used=0.5)


def reference_cimt(
    c: ContourPair, cal: CalibrationRecord, policy: AggregationPolicy
) -> MeasurementResult | None:
    """Sub-pixel reference CIMT from the contours at original resolution.

    Bypasses rasterization entirely: per-column gaps MA - LI are sampled at
    integer columns of the overlap span and aggregated, then converted with
    the original calibration factor. Negative gaps (tolerated up to the
    far-wall limit) clip to zero. Returns None when the span is empty.
    """
    lo, hi = c.overlap_span()
    lo = max(lo, 0)
    hi = min(hi, cal.orig_width - 1)
    if lo > hi:
        return None
    cols = np.arange(lo, hi + 1, dtype=np.float64)
    gaps = sample_at_columns(c.ma, cols) - sample_at_columns(c.li, cols)
    gaps = np.maximum(gaps, 0.0)
    t_px = policy.aggregate(gaps)
    scale = WorkingScale(target_height=cal.orig_height, mm_per_pixel_working=cal.mm_per_pixel_orig)
    return MeasurementResult(
        image_id=c.image_id,
        cimt_px_working=t_px,
        cimt_um=t_px * cal.mm_per_pixel_orig * 1000.0,
        threshold_used=None,
        scale=scale,
        valid_columns=len(cols),
    )
