"""Segmentation overlap metrics and measurement agreement statistics.

All folds over per-image values use math.fsum, so results do not depend
on evaluation order. The difference convention is pred - ref throughout:
positive bias means the pipeline over-estimates thickness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .bandcore import BinaryMask
from .errors import InvalidInputError


@dataclass(frozen=True)
class OverlapReport:
    """Dice/IoU between one predicted and one reference mask.

    Two empty masks score dice = iou = 1 by convention; ``both_empty``
    flags that case so downstream reports can call it out.
    """

    image_id: str
    dice: float
    iou: float
    intersection_px: int
    union_px: int
    pred_px: int
    ref_px: int
    both_empty: bool = False


@dataclass(frozen=True)
class AgreementReport:
    """Agreement between predicted and reference CIMT values in micrometers.

    ``pearson_r`` and the limits of agreement need n >= 2 and non-degenerate
    variance; when unavailable they are None and ``pearson_note`` says why.
    Bland-Altman pairs are ((pred + ref) / 2, pred - ref) per image.
    """

    n: int
    mae_um: float
    rmse_um: float
    bias_um: float
    pearson_r: float | None
    pearson_note: str | None
    bland_altman: list[tuple[float, float]]
    sd_diff_um: float | None
    loa_low_um: float | None
    loa_high_um: float | None


def overlap(pred: BinaryMask, ref: BinaryMask) -> OverlapReport:
    if pred.bits.shape != ref.bits.shape:
        raise InvalidInputError(
            f"{pred.image_id}: mask dimensions differ, pred {pred.bits.shape} vs ref {ref.bits.shape}"
        )
    inter = int((pred.bits & ref.bits).sum())
    a = int(pred.bits.sum())
    b = int(ref.bits.sum())
    union = a + b - inter
    both_empty = a == 0 and b == 0
    if both_empty:
        dice, iou = 1.0, 1.0
    else:
        dice = 2.0 * inter / (a + b)
        iou = inter / union
    return OverlapReport(
        image_id=pred.image_id,
        dice=dice,
        iou=iou,
        intersection_px=inter,
        union_px=union,
        pred_px=a,
        ref_px=b,
        both_empty=both_empty,
    )


def agreement(pairs: list[tuple[float, float]]) -> AgreementReport:
    """Summarize (pred_um, ref_um) pairs; diff convention is pred - ref."""
    n = len(pairs)
    if n == 0:
        raise InvalidInputError("agreement needs at least one (pred, ref) pair")
    diffs = [p - r for p, r in pairs]
    mae = math.fsum(abs(d) for d in diffs) / n
    rmse = math.sqrt(math.fsum(d * d for d in diffs) / n)
    bias = math.fsum(diffs) / n
    bland = [((p + r) / 2.0, p - r) for p, r in pairs]

    pearson: float | None = None
    note: str | None = None
    sd_diff: float | None = None
    loa_low: float | None = None
    loa_high: float | None = None
    if n < 2:
        note = "need at least 2 pairs"
    else:
        sd_diff = math.sqrt(math.fsum((d - bias) ** 2 for d in diffs) / (n - 1))
        loa_low = bias - 1.96 * sd_diff
        loa_high = bias + 1.96 * sd_diff
        preds = [p for p, _ in pairs]
        refs = [r for _, r in pairs]
        pm = math.fsum(preds) / n
        rm = math.fsum(refs) / n
        sp = math.fsum((p - pm) ** 2 for p in preds)
        sr = math.fsum((r - rm) ** 2 for r in refs)
        if sp == 0.0 or sr == 0.0:
            note = "zero variance in predictions" if sp == 0.0 else "zero variance in references"
        else:
            cov = math.fsum((p - pm) * (r - rm) for p, r in pairs)
            pearson = cov / math.sqrt(sp * sr)
    return AgreementReport(
        n=n,
        mae_um=mae,
        rmse_um=rmse,
        bias_um=bias,
        pearson_r=pearson,
        pearson_note=note,
        bland_altman=bland,
        sd_diff_um=sd_diff,
        loa_low_um=loa_low,
        loa_high_um=loa_high,
    )


def seed_summary(per_seed: list[float]) -> tuple[float, float | None]:
    """Mean and sample (n-1) standard deviation across per-seed scalars."""
    n = len(per_seed)
    if n == 0:
        raise InvalidInputError("seed summary needs at least one value")
    mean = math.fsum(per_seed) / n
    if n < 2:
        return mean, None
    sd = math.sqrt(math.fsum((v - mean) ** 2 for v in per_seed) / (n - 1))
    return mean, sd
