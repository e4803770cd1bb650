"""Binary-mask production and column-wise band geometry.

The measurement convention is fixed here and must stay consistent across
the whole toolkit:

* thresholding is strict (`p > t`), so a saturated 0.5 map at t=0.5 is
  background;
* column thickness is the inclusive pixel count `lower - upper + 1`, so a
  single positive pixel yields thickness 1;
* interior gaps in a column are bridged: boundaries are the uppermost and
  lowermost positive pixels, not connected runs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import InvalidConfigError, InvalidInputError


def _first_bad_pixel(values: np.ndarray) -> tuple[int, int]:
    bad = ~np.isfinite(values)
    y, x = np.argwhere(bad)[0]
    return int(x), int(y)


@dataclass(frozen=True)
class ProbabilityMap:
    """Per-pixel foreground probability grid for one image."""

    image_id: str
    values: np.ndarray  # (height, width) float64 in [0, 1]

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", v)
        if v.ndim != 2 or v.shape[0] < 1 or v.shape[1] < 1:
            raise InvalidInputError(
                f"{self.image_id}: probability map must be a non-empty 2-D grid, got shape {v.shape}"
            )
        if not np.isfinite(v).all():
            x, y = _first_bad_pixel(v)
            raise InvalidInputError(
                f"{self.image_id}: non-finite probability at pixel (x={x}, y={y})"
            )
        if v.min() < 0.0 or v.max() > 1.0:
            bad = (v < 0.0) | (v > 1.0)
            y, x = np.argwhere(bad)[0]
            raise InvalidInputError(
                f"{self.image_id}: probability {v[y, x]!r} outside [0,1] at pixel (x={int(x)}, y={int(y)})"
            )

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class BinaryMask:
    """Row-major boolean foreground grid.

    ``threshold_used`` is the probability cut that produced the mask. Masks
    rasterized from reference contours carry 0.5: the pixel-center rule is
    exactly a half-coverage decision.
    """

    image_id: str
    bits: np.ndarray  # (height, width) bool
    threshold_used: float

    def __post_init__(self):
        b = np.asarray(self.bits, dtype=bool)
        object.__setattr__(self, "bits", b)
        if b.ndim != 2 or b.shape[0] < 1 or b.shape[1] < 1:
            raise InvalidInputError(
                f"{self.image_id}: mask must be a non-empty 2-D grid, got shape {b.shape}"
            )
        if not (0.0 < self.threshold_used < 1.0):
            raise InvalidInputError(
                f"{self.image_id}: threshold_used {self.threshold_used} not in (0,1)"
            )

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @property
    def height(self) -> int:
        return self.bits.shape[0]


@dataclass(frozen=True)
class BoundaryProfiles:
    """Per-column uppermost/lowermost positive rows; ``valid`` marks columns
    holding at least one positive pixel. Rows are -1 where invalid."""

    image_id: str
    upper: np.ndarray  # (width,) int64
    lower: np.ndarray  # (width,) int64
    valid: np.ndarray  # (width,) bool


@dataclass(frozen=True)
class ThicknessProfile:
    """Per-column band thickness in working-resolution pixels (NaN = absent)."""

    image_id: str
    per_column_px: np.ndarray  # (width,) float64, NaN where no band

    @property
    def valid_column_count(self) -> int:
        return int(np.count_nonzero(~np.isnan(self.per_column_px)))

    def valid_values(self) -> np.ndarray:
        return self.per_column_px[~np.isnan(self.per_column_px)]


@dataclass(frozen=True)
class AggregationPolicy:
    """How per-column thicknesses collapse into one per-image value.

    ``mean`` (default), ``median``, or ``trimmed`` with a fraction in
    [0, 0.5) removed from each tail after sorting.
    """

    kind: str = "mean"
    fraction: float = 0.0

    def __post_init__(self):
        if self.kind not in ("mean", "median", "trimmed"):
            raise InvalidConfigError(f"unknown aggregation policy {self.kind!r}")
        if self.kind == "trimmed":
            if not (0.0 <= self.fraction < 0.5):
                raise InvalidConfigError(
                    f"trimmed-mean fraction {self.fraction} outside [0, 0.5)"
                )
        elif self.fraction != 0.0:
            raise InvalidConfigError(f"{self.kind} policy takes no fraction")

    @classmethod
    def parse(cls, text: str) -> "AggregationPolicy":
        """Parse CLI syntax: ``mean``, ``median`` or ``trimmed:<fraction>``."""
        if text in ("mean", "median"):
            return cls(text)
        if text.startswith("trimmed:"):
            try:
                fraction = float(text.split(":", 1)[1])
            except ValueError as exc:
                raise InvalidConfigError(f"bad trimmed-mean fraction in {text!r}") from exc
            return cls("trimmed", fraction)
        raise InvalidConfigError(f"unknown aggregation policy {text!r}")

    def __str__(self) -> str:
        if self.kind == "trimmed":
            return f"trimmed:{self.fraction:g}"
        return self.kind

    def aggregate(self, values: np.ndarray) -> float:
        v = np.sort(np.asarray(values, dtype=np.float64))
        if self.kind == "mean":
            return float(np.mean(v))
        if self.kind == "median":
            return float(np.median(v))
        k = int(len(v) * self.fraction)
        return float(np.mean(v[k : len(v) - k]))


def threshold_map(p: ProbabilityMap, t: float) -> BinaryMask:
    """Binarize with the strict rule bit = (value > t)."""
    if not (0.0 < t < 1.0):
        raise InvalidConfigError(f"threshold {t} not in (0,1)")
    if not np.isfinite(p.values).all():
        x, y = _first_bad_pixel(p.values)
        raise InvalidInputError(
            f"{p.image_id}: non-finite probability at pixel (x={x}, y={y})"
        )
    return BinaryMask(image_id=p.image_id, bits=p.values > t, threshold_used=t)


def largest_component_filter(m: BinaryMask) -> BinaryMask:
    """Keep only the largest 8-connected foreground component.

    Optional speckle guard; the default pipeline applies no cleanup so the
    uppermost/lowermost rule acts on the raw mask. Ties keep the component
    first encountered in scan order. An empty mask passes through.
    """
    labels, count = ndimage.label(m.bits, structure=np.ones((3, 3), dtype=int))
    if count <= 1:
        return m
    sizes = ndimage.sum_labels(np.ones_like(labels), labels, index=range(1, count + 1))
    keep = 1 + int(np.argmax(sizes))
    return BinaryMask(image_id=m.image_id, bits=labels == keep, threshold_used=m.threshold_used)


def extract_boundaries(m: BinaryMask) -> BoundaryProfiles:
    """Uppermost and lowermost positive row per column (gaps bridged)."""
    bits = m.bits
    height = bits.shape[0]
    valid = bits.any(axis=0)
    upper = np.where(valid, bits.argmax(axis=0), -1).astype(np.int64)
    lower = np.where(valid, height - 1 - bits[::-1, :].argmax(axis=0), -1).astype(np.int64)
    return BoundaryProfiles(image_id=m.image_id, upper=upper, lower=lower, valid=valid)


def thickness_profile(b: BoundaryProfiles) -> ThicknessProfile:
    """Inclusive pixel count lower - upper + 1 per valid column."""
    per_column = np.where(b.valid, (b.lower - b.upper + 1).astype(np.float64), np.nan)
    return ThicknessProfile(image_id=b.image_id, per_column_px=per_column)


def aggregate_cimt_px(tp: ThicknessProfile, policy: AggregationPolicy) -> float | None:
    """Collapse a thickness profile to one pixel value; None when no column is valid."""
    values = tp.valid_values()
    if len(values) == 0:
        return None
    return policy.aggregate(values)
