"""Test-time calibration of the binarization threshold.

The objective (CIMT MAE by default) is piecewise-constant in the threshold
between probability levels, so a grid search is exact on the grid and a
continuous optimizer would add nothing. An image whose band vanishes at a
high threshold is not skipped: its prediction counts as 0 um, contributing
|ref| to the absolute error. That penalty shapes the right tail of every
sweep curve and is the documented behavior, not an accident.

Temperature scaling is included as an ablation. Reshaping probabilities
with sigmoid(logit(v)/T) is strictly monotone and fixes 0.5, so a 0.5
threshold produces bit-identical masks for every T and the improvement
is exactly zero; the sweep machinery demonstrates that rather than
assuming it.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .bandcore import AggregationPolicy, ProbabilityMap
from .calibration import CalibrationRecord
from .errors import InvalidConfigError, InvalidInputError
from .pipeline import measure_probability_map

DEFAULT_THRESHOLD_GRID = tuple(round(0.05 * k, 2) for k in range(1, 20))  # 0.05 .. 0.95

OBJECTIVES = ("mae_um", "rmse_um", "abs_bias_um")

# A validation image is (probability map, calibration record, reference um).
ValImage = tuple[ProbabilityMap, CalibrationRecord, float]


@dataclass(frozen=True)
class CalibrationConfig:
    threshold_grid: tuple[float, ...] = DEFAULT_THRESHOLD_GRID
    temperature_grid: tuple[float, ...] = (0.5, 1.0, 2.0, 5.0)
    objective: str = "mae_um"

    def __post_init__(self):
        if not self.threshold_grid:
            raise InvalidConfigError("threshold grid is empty")
        if any(not (0.0 < t < 1.0) for t in self.threshold_grid):
            raise InvalidConfigError("threshold grid values must lie in (0,1)")
        if any(b <= a for a, b in zip(self.threshold_grid, self.threshold_grid[1:])):
            raise InvalidConfigError("threshold grid must be strictly increasing")
        if not self.temperature_grid:
            raise InvalidConfigError("temperature grid is empty")
        if any(t <= 0 for t in self.temperature_grid):
            raise InvalidConfigError("temperatures must be positive")
        if any(b <= a for a, b in zip(self.temperature_grid, self.temperature_grid[1:])):
            raise InvalidConfigError("temperature grid must be strictly increasing")
        if self.objective not in OBJECTIVES:
            raise InvalidConfigError(f"objective must be one of {OBJECTIVES}")


@dataclass(frozen=True)
class SweepPoint:
    threshold: float
    mae_um: float
    rmse_um: float
    bias_um: float
    n: int  # images with a valid band at this threshold


@dataclass(frozen=True)
class SweepResult:
    per_point: list[SweepPoint]
    best_threshold: float
    best_mae_um: float  # value of the chosen objective at best_threshold
    objective: str


def _objective_value(point: SweepPoint, objective: str) -> float:
    if objective == "mae_um":
        return point.mae_um
    if objective == "rmse_um":
        return point.rmse_um
    return abs(point.bias_um)


def _errors_at_threshold(
    val_images: list[ValImage], threshold: float, policy: AggregationPolicy
) -> SweepPoint:
    diffs: list[float] = []
    n_valid = 0
    for prob, cal, ref_um in val_images:
        result = measure_probability_map(prob, cal, threshold=threshold, policy=policy)
        if result is None:
            pred_um = 0.0  # vanished band: penalized as |ref - 0|
        else:
            pred_um = result.cimt_um
            n_valid += 1
        diffs.append(pred_um - ref_um)
    n = len(diffs)
    return SweepPoint(
        threshold=threshold,
        mae_um=math.fsum(abs(d) for d in diffs) / n,
        rmse_um=math.sqrt(math.fsum(d * d for d in diffs) / n),
        bias_um=math.fsum(diffs) / n,
        n=n_valid,
    )


def sweep_threshold(
    val_images: list[ValImage],
    cfg: CalibrationConfig = CalibrationConfig(),
    policy: AggregationPolicy = AggregationPolicy(),
    jobs: int = 1,
) -> SweepResult:
    """Grid-search the threshold that minimizes the objective on validation data.

    Ties break toward the grid value closest to 0.5, then toward the
    smaller threshold: prefer the minimal deviation from the default
    decision rule when the data cannot distinguish candidates. Grid points
    are independent; with jobs > 1 they run on a thread pool (the work is
    numpy-bound) and are reduced in grid order either way.
    """
    if not val_images:
        raise InvalidInputError("validation set is empty")
    if jobs > 1 and len(cfg.threshold_grid) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            points = list(
                pool.map(lambda t: _errors_at_threshold(val_images, t, policy), cfg.threshold_grid)
            )
    else:
        points = [_errors_at_threshold(val_images, t, policy) for t in cfg.threshold_grid]
    best = min(
        points,
        key=lambda pt: (_objective_value(pt, cfg.objective), abs(pt.threshold - 0.5), pt.threshold),
    )
    return SweepResult(
        per_point=points,
        best_threshold=best.threshold,
        best_mae_um=_objective_value(best, cfg.objective),
        objective=cfg.objective,
    )


def _stable_sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def temperature_scale(p: ProbabilityMap, T: float) -> ProbabilityMap:
    """Reshape probabilities as sigmoid(logit(v) / T); 0 and 1 map to themselves."""
    if T <= 0:
        raise InvalidConfigError(f"temperature {T} must be positive")
    v = p.values
    interior = (v > 0.0) & (v < 1.0)
    out = v.copy()
    vi = v[interior]
    out[interior] = _stable_sigmoid(np.log(vi / (1.0 - vi)) / T)
    if not np.isfinite(out).all():
        bad = ~np.isfinite(out)
        y, x = np.argwhere(bad)[0]
        raise InvalidInputError(
            f"{p.image_id}: temperature scaling produced a non-finite value at (x={int(x)}, y={int(y)})"
        )
    return ProbabilityMap(image_id=p.image_id, values=out)


@dataclass(frozen=True)
class TemperaturePoint:
    temperature: float
    mae_um: float
    improvement_um: float  # baseline MAE minus this temperature's MAE


def temperature_ablation(
    val_images: list[ValImage],
    temperatures: tuple[float, ...] = (0.5, 1.0, 2.0, 5.0),
    threshold: float = 0.5,
    policy: AggregationPolicy = AggregationPolicy(),
) -> list[TemperaturePoint]:
    """MAE after temperature scaling, at a fixed threshold.

    At threshold 0.5 this is a provable no-op for any T; the ablation
    exists to demonstrate the 0.000 improvement empirically.
    """
    if not val_images:
        raise InvalidInputError("validation set is empty")
    baseline = _errors_at_threshold(val_images, threshold, policy).mae_um
    points = []
    for T in temperatures:
        scaled = [(temperature_scale(prob, T), cal, ref) for prob, cal, ref in val_images]
        mae = _errors_at_threshold(scaled, threshold, policy).mae_um
        points.append(TemperaturePoint(temperature=T, mae_um=mae, improvement_um=baseline - mae))
    return points


@dataclass(frozen=True)
class CalibratedComparison:
    baseline_threshold: float
    baseline_mae_um: float
    calibrated_threshold: float
    calibrated_mae_um: float
    improvement_um: float  # baseline - calibrated; negative when calibration hurt
    baseline_bias_um: float
    calibrated_bias_um: float


def evaluate_calibrated(
    test_images: list[ValImage],
    best_threshold: float,
    baseline_threshold: float = 0.5,
    policy: AggregationPolicy = AggregationPolicy(),
) -> CalibratedComparison:
    """Compare the calibrated threshold against the default on held-out images."""
    for t in (best_threshold, baseline_threshold):
        if not (0.0 < t < 1.0):
            raise InvalidConfigError(f"threshold {t} not in (0,1)")
    if not test_images:
        raise InvalidInputError("test set is empty")
    base = _errors_at_threshold(test_images, baseline_threshold, policy)
    calib = _errors_at_threshold(test_images, best_threshold, policy)
    return CalibratedComparison(
        baseline_threshold=baseline_threshold,
        baseline_mae_um=base.mae_um,
        calibrated_threshold=best_threshold,
        calibrated_mae_um=calib.mae_um,
        improvement_um=base.mae_um - calib.mae_um,
        baseline_bias_um=base.bias_um,
        calibrated_bias_um=calib.bias_um,
    )
