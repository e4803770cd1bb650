import numpy as np
import pytest

from cimt_kit.bandcore import BinaryMask, ProbabilityMap
from cimt_kit.calibration import CalibrationRecord


@pytest.fixture
def uniform_map():
    def build(value: float, width: int = 4, height: int = 3, image_id: str = "img"):
        return ProbabilityMap(image_id, np.full((height, width), value, dtype=np.float64))

    return build


@pytest.fixture
def mask_from_rows():
    """Build a mask from {column: iterable of positive rows}."""

    def build(rows_by_col: dict, width: int = 8, height: int = 10, image_id: str = "img"):
        bits = np.zeros((height, width), dtype=bool)
        for col, rows in rows_by_col.items():
            for r in rows:
                bits[r, col] = True
        return BinaryMask(image_id=image_id, bits=bits, threshold_used=0.5)

    return build


@pytest.fixture
def simple_cal():
    return CalibrationRecord("img", mm_per_pixel_orig=0.05, orig_width=640, orig_height=480)
