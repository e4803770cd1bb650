"""Measurement-first toolkit for carotid intima-media thickness.

Converts segmentation probability maps into physically calibrated CIMT
values, calibrates the binarization threshold against measurement error,
and scores agreement against expert reference contours.
"""

from .bandcore import (
    AggregationPolicy,
    BinaryMask,
    BoundaryProfiles,
    ProbabilityMap,
    ThicknessProfile,
    aggregate_cimt_px,
    extract_boundaries,
    largest_component_filter,
    threshold_map,
    thickness_profile,
)
from .calibration import (
    CalibrationRecord,
    MeasurementResult,
    WorkingScale,
    parse_calibration_table,
    px_to_um,
    working_pixel_size,
)
from .calibrator import (
    CalibrationConfig,
    SweepResult,
    evaluate_calibrated,
    sweep_threshold,
    temperature_ablation,
    temperature_scale,
)
from .contours import (
    BandMaskSpec,
    ContourPair,
    Polyline,
    parse_contour_pair,
    rasterize_band,
    reference_cimt,
    sample_at_columns,
)
from .errors import (
    CimtError,
    GeometryError,
    InvalidConfigError,
    InvalidInputError,
    ParseError,
)
from .metrics import AgreementReport, OverlapReport, agreement, overlap, seed_summary
from .phantom import Curve, PhantomBundle, PhantomSpec, generate, generate_suite
from .pipeline import measure_mask, measure_probability_map
from .splits import (
    SplitManifest,
    extract_patient_id,
    make_split,
    split_images,
    verify_no_leakage,
)

__version__ = "0.1.0"
