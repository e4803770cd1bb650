"""Synthetic band phantoms with analytically known CIMT.

A phantom is a horizontal band between two parametric curves (LI and
MA = LI + thickness), turned into a probability map through a product of
sigmoids:

    p(x, y) = clamp(sig((y - li(x)) / s) * sig((li(x) + th(x) - y) / s)
              + offset + noise, 0, 1)

with s the edge softness in pixels. s = 0 degenerates to a hard band:
probability 1 on rows li(x) <= y < li(x) + th(x), 0 elsewhere (before
offset and noise). For integer-valued li and thickness the hard band is
exactly the pixel-center rasterization of its own contours, which is what
makes phantoms an end-to-end oracle: the full pipeline must reproduce
mean(thickness) * mm_per_pixel * 1000 micrometers with zero error.

The product-of-sigmoids profile is monotone in the threshold, so sweeping
the threshold on offset phantoms behaves like the real calibration
problem: a positive probability offset thickens the 0.5-mask and a higher
threshold recovers it.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable

import numpy as np

from .bandcore import ProbabilityMap
from .calibration import CalibrationRecord, write_calibration_table
from .contours import ContourPair, Polyline, write_polyline
from .errors import InvalidConfigError
from .pgmio import write_prob_pgm
from .rng import SplitMix64

CURVE_KINDS = ("constant", "linear", "sinusoidal")


@dataclass(frozen=True)
class Curve:
    """Parametric row/thickness profile over column index x."""

    kind: str
    base: float
    slope: float = 0.0          # linear: base + slope * x
    amplitude: float = 0.0      # sinusoidal: base + amplitude * sin(2 pi x / period + phase)
    period_px: float = 0.0
    phase_rad: float = 0.0

    def __post_init__(self):
        if self.kind not in CURVE_KINDS:
            raise InvalidConfigError(f"unknown curve kind {self.kind!r}")
        if self.kind == "sinusoidal" and self.period_px <= 0:
            raise InvalidConfigError("sinusoidal curve needs a positive period")

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if self.kind == "constant":
            return np.full_like(x, self.base)
        if self.kind == "linear":
            return self.base + self.slope * x
        return self.base + self.amplitude * np.sin(
            2.0 * math.pi * x / self.period_px + self.phase_rad
        )


@dataclass(frozen=True)
class PhantomSpec:
    width: int
    height: int
    li_curve: Curve
    thickness_curve: Curve
    edge_softness: float = 0.0
    probability_offset: float = 0.0
    mm_per_pixel: float = 0.05
    noise_sd: float = 0.0
    rng_seed: int = 0
    image_id: str = "phantom_0000"

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise InvalidConfigError(f"non-positive phantom dimensions {self.width}x{self.height}")
        if self.edge_softness < 0:
            raise InvalidConfigError(f"edge_softness {self.edge_softness} must be >= 0")
        if not (-0.3 <= self.probability_offset <= 0.3):
            raise InvalidConfigError(f"probability_offset {self.probability_offset} outside [-0.3, 0.3]")
        if self.noise_sd < 0:
            raise InvalidConfigError(f"noise_sd {self.noise_sd} must be >= 0")
        x = np.arange(self.width, dtype=np.float64)
        li = self.li_curve.evaluate(x)
        th = self.thickness_curve.evaluate(x)
        if th.min() < 2.0:
            raise InvalidConfigError(f"thickness curve minimum {th.min():.3f} px below 2 px")
        if li.min() < 1.0:
            raise InvalidConfigError(f"LI curve reaches {li.min():.3f}, must stay >= 1")
        if (li + th).max() > self.height - 2:
            raise InvalidConfigError(
                f"band reaches row {(li + th).max():.3f}, must stay <= height - 2 = {self.height - 2}"
            )


@dataclass(frozen=True)
class PhantomBundle:
    prob: ProbabilityMap
    contours: ContourPair
    calibration: CalibrationRecord
    analytic_cimt_um: float
    analytic_profile_px: np.ndarray


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def generate(spec: PhantomSpec) -> PhantomBundle:
    """Deterministically realize a phantom bundle from its spec."""
    x = np.arange(spec.width, dtype=np.float64)
    li = spec.li_curve.evaluate(x)
    th = spec.thickness_curve.evaluate(x)
    ma = li + th

    y = np.arange(spec.height, dtype=np.float64)[:, None]
    if spec.edge_softness == 0.0:
        values = ((y >= li[None, :]) & (y < ma[None, :])).astype(np.float64)
    else:
        s = spec.edge_softness
        values = _sigmoid((y - li[None, :]) / s) * _sigmoid((ma[None, :] - y) / s)
    if spec.probability_offset != 0.0:
        values = values + spec.probability_offset
    if spec.noise_sd > 0.0:
        noise = SplitMix64(spec.rng_seed).gauss_array(spec.height * spec.width)
        values = values + spec.noise_sd * noise.reshape(spec.height, spec.width)
    values = np.clip(values, 0.0, 1.0)

    contours = ContourPair(
        image_id=spec.image_id,
        li=Polyline(x, li),
        ma=Polyline(x, ma),
    )
    calibration = CalibrationRecord(
        image_id=spec.image_id,
        mm_per_pixel_orig=spec.mm_per_pixel,
        orig_width=spec.width,
        orig_height=spec.height,
    )
    analytic_um = (math.fsum(th.tolist()) / spec.width) * spec.mm_per_pixel * 1000.0
    return PhantomBundle(
        prob=ProbabilityMap(image_id=spec.image_id, values=values),
        contours=contours,
        calibration=calibration,
        analytic_cimt_um=analytic_um,
        analytic_profile_px=th,
    )


def _random_curve(rng: SplitMix64, lo: float, hi: float, width: int, max_wiggle: float) -> Curve:
    """Draw a curve whose values stay inside [lo, hi].

    Draw order (fixed for reproducibility): kind, base, then the
    kind-specific parameters.
    """
    kind = CURVE_KINDS[rng.randint_below(3)]
    margin = min(max_wiggle, (hi - lo) / 2.0)
    base = rng.uniform(lo + margin, hi - margin)
    if kind == "constant":
        return Curve("constant", base=base)
    if kind == "linear":
        slope = rng.uniform(-margin, margin) / max(width - 1, 1)
        return Curve("linear", base=base, slope=slope)
    amplitude = rng.uniform(0.0, margin)
    period = rng.uniform(width / 4.0, width)
    phase = rng.uniform(0.0, 2.0 * math.pi)
    return Curve("sinusoidal", base=base, amplitude=amplitude, period_px=period, phase_rad=phase)


def generate_suite(
    n: int, base_spec: PhantomSpec, variation_seed: int
) -> list[PhantomBundle]:
    """n bundles with randomized curves, deterministic per variation seed.

    Each bundle keeps the base spec's size, softness, offset and noise but
    redraws the LI position, the thickness profile, the calibration factor
    (0.8x to 1.2x the base) and the noise seed. A hard base (softness 0)
    draws constant integer curves instead, which keeps the bundle an exact
    oracle for the measurement pipeline; soft bases draw from the full
    curve family with the thickness floor held at max(8, 6 * softness + 2)
    so the 0.5-level crossing stays within a pixel of the true edges.

    Per-bundle draw order: LI curve, thickness curve, mm/px factor, noise
    seed.
    """
    if n < 1:
        raise InvalidConfigError(f"suite size {n} must be >= 1")
    rng = SplitMix64(variation_seed)
    width, height = base_spec.width, base_spec.height
    bundles: list[PhantomBundle] = []
    for i in range(n):
        image_id = f"phantom_{i:04d}"
        if base_spec.edge_softness == 0.0:
            li_lo, li_hi = int(0.2 * height), int(0.45 * height)
            th_lo, th_hi = 8, max(9, int(0.1 * height))
            li_curve = Curve("constant", base=float(li_lo + rng.randint_below(li_hi - li_lo + 1)))
            th_curve = Curve("constant", base=float(th_lo + rng.randint_below(th_hi - th_lo + 1)))
        else:
            th_floor = max(8.0, 6.0 * base_spec.edge_softness + 2.0)
            th_ceil = max(th_floor + 6.0, 0.12 * height)
            li_curve = _random_curve(rng, 0.2 * height, 0.45 * height, width, max_wiggle=0.05 * height)
            th_curve = _random_curve(rng, th_floor, th_ceil, width, max_wiggle=3.0)
        mm = base_spec.mm_per_pixel * rng.uniform(0.8, 1.2)
        seed = rng.next_u64()
        spec = replace(
            base_spec,
            li_curve=li_curve,
            thickness_curve=th_curve,
            mm_per_pixel=mm,
            rng_seed=seed,
            image_id=image_id,
        )
        bundles.append(generate(spec))
    return bundles


def write_suite(directory: str | Path, bundles: Iterable[PhantomBundle]) -> None:
    """Emit the exact file set the pipeline consumes, plus the analytic oracle.

    Per bundle: `<id>.prob.pgm`, `<id>.li.txt`, `<id>.ma.txt`; shared:
    `calibration.csv` and `analytic.csv` (image_id, analytic CIMT in um).
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    bundles = list(bundles)
    for b in bundles:
        write_prob_pgm(directory / f"{b.prob.image_id}.prob.pgm", b.prob)
        write_polyline(directory / f"{b.prob.image_id}.li.txt", b.contours.li)
        write_polyline(directory / f"{b.prob.image_id}.ma.txt", b.contours.ma)
    write_calibration_table(directory / "calibration.csv", [b.calibration for b in bundles])
    with open(directory / "analytic.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["image_id", "analytic_cimt_um"])
        for b in bundles:
            writer.writerow([b.prob.image_id, f"{b.analytic_cimt_um:.3f}"])
