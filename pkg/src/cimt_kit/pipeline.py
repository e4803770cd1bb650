"""The prediction-side measurement pipeline: probability map to micrometers."""

from __future__ import annotations

from .bandcore import (
    AggregationPolicy,
    BinaryMask,
    ProbabilityMap,
    aggregate_cimt_px,
    extract_boundaries,
    largest_component_filter,
    threshold_map,
    thickness_profile,
)
from .calibration import CalibrationRecord, MeasurementResult, px_to_um, working_pixel_size


def measure_mask(
    mask: BinaryMask,
    cal: CalibrationRecord,
    policy: AggregationPolicy = AggregationPolicy(),
) -> MeasurementResult | None:
    """Measure CIMT from a binary mask; None when no column holds a band.

    The mask's own height is the working resolution for the mm/px
    correction, whatever grid it was produced on.
    """
    profile = thickness_profile(extract_boundaries(mask))
    t_px = aggregate_cimt_px(profile, policy)
    if t_px is None:
        return None
    scale = working_pixel_size(cal, mask.height)
    return MeasurementResult(
        image_id=mask.image_id,
        cimt_px_working=t_px,
        cimt_um=px_to_um(t_px, scale),
        threshold_used=mask.threshold_used,
        scale=scale,
        valid_columns=profile.valid_column_count,
    )


def measure_probability_map(
    prob: ProbabilityMap,
    cal: CalibrationRecord,
    threshold: float = 0.5,
    policy: AggregationPolicy = AggregationPolicy(),
    largest_component: bool = False,
) -> MeasurementResult | None:
    """Threshold, optionally despeckle, then measure."""
    mask = threshold_map(prob, threshold)
    if largest_component:
        mask = largest_component_filter(mask)
    return measure_mask(mask, cal, policy)
