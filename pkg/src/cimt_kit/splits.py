"""Patient-level train/validation/test splits with seeded reproducibility.

All images of a patient share one partition; the patient is identified by
the `clin_XXXX` token inside the image id. The shuffle is a Fisher-Yates
pass driven by the SplitMix64 stream seeded directly with the user seed,
over the lexicographically sorted patient list, so a manifest depends only
on (patient set, seed, ratios), never on input order or platform.
Partition sizes use largest-remainder rounding with ties broken in
(train, val, test) order.
"""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable

from .errors import InvalidConfigError, InvalidInputError, ParseError
from .rng import SplitMix64

PARTITIONS = ("train", "val", "test")
MANIFEST_HEADER = ["image_id", "patient_id", "partition", "seed"]

_PATIENT_RE = re.compile(r"clin_(\d+)")


@dataclass(frozen=True)
class SplitManifest:
    seed: int
    ratios: tuple[float, float, float]
    assignment: dict[str, str]  # patient_id -> partition
    image_assignment: dict[str, str]  # image_id -> partition

    def partition_patients(self, partition: str) -> list[str]:
        return sorted(p for p, part in self.assignment.items() if part == partition)

    def partition_images(self, partition: str) -> list[str]:
        return sorted(i for i, part in self.image_assignment.items() if part == partition)


def extract_patient_id(image_id: str) -> str:
    """Strip side/index suffixes: the patient is the `clin_` + digits token.

    Digits are zero-padded to the 4-character convention so `clin_42_L`
    and `clin_0042_R` co-assign.
    """
    match = _PATIENT_RE.search(image_id)
    if not match:
        raise InvalidInputError(f"image id {image_id!r} has no clin_<digits> token")
    digits = match.group(1)
    return f"clin_{int(digits):04d}" if len(digits) < 4 else f"clin_{digits}"


def _partition_sizes(n: int, ratios: tuple[float, float, float]) -> tuple[int, int, int]:
    # Exact rational quotas avoid platform-dependent remainder ordering.
    quotas = [Fraction(n) * Fraction(r) for r in ratios]
    sizes = [int(q) for q in quotas]
    leftover = n - sum(sizes)
    order = sorted(range(3), key=lambda i: (-(quotas[i] - sizes[i]), i))
    for i in order[:leftover]:
        sizes[i] += 1
    return tuple(sizes)


def make_split(
    patients: Iterable[str], seed: int, ratios: tuple[float, float, float] = (0.7, 0.1, 0.2)
) -> SplitManifest:
    """Deterministically assign patients to train/val/test."""
    if len(ratios) != 3:
        raise InvalidConfigError("ratios must be (train, val, test)")
    if any(r < 0 for r in ratios):
        raise InvalidConfigError("ratios must be non-negative")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise InvalidConfigError(f"ratios {ratios} must sum to 1")
    unique = sorted(set(patients))
    if len(unique) < 3:
        raise InvalidInputError(f"need at least 3 patients, got {len(unique)}")
    sizes = _partition_sizes(len(unique), ratios)
    if any(s == 0 for s in sizes):
        raise InvalidConfigError(f"ratios {ratios} leave an empty partition for n={len(unique)}")
    shuffled = list(unique)
    SplitMix64(seed).shuffle(shuffled)
    assignment: dict[str, str] = {}
    start = 0
    for name, size in zip(PARTITIONS, sizes):
        for patient in shuffled[start : start + size]:
            assignment[patient] = name
        start += size
    return SplitManifest(seed=seed, ratios=tuple(ratios), assignment=assignment, image_assignment={})


def assign_images(manifest: SplitManifest, image_ids: Iterable[str]) -> SplitManifest:
    """Attach images to an existing patient assignment (no new patients allowed)."""
    image_assignment: dict[str, str] = {}
    for image_id in sorted(set(image_ids)):
        patient = extract_patient_id(image_id)
        if patient not in manifest.assignment:
            raise InvalidInputError(f"image {image_id!r}: patient {patient!r} not in the split")
        image_assignment[image_id] = manifest.assignment[patient]
    return SplitManifest(
        seed=manifest.seed,
        ratios=manifest.ratios,
        assignment=manifest.assignment,
        image_assignment=image_assignment,
    )


def split_images(
    image_ids: Iterable[str], seed: int, ratios: tuple[float, float, float] = (0.7, 0.1, 0.2)
) -> SplitManifest:
    """Patient-level split derived from image ids in one step."""
    ids = sorted(set(image_ids))
    manifest = make_split({extract_patient_id(i) for i in ids}, seed, ratios)
    return assign_images(manifest, ids)


@dataclass(frozen=True)
class LeakageReport:
    violations: list[str]

    @property
    def ok(self) -> bool:
        return not self.violations


def verify_no_leakage(m: SplitManifest) -> LeakageReport:
    """Confirm disjoint coverage and that images follow their patient."""
    violations: list[str] = []
    for patient, partition in sorted(m.assignment.items()):
        if partition not in PARTITIONS:
            violations.append(f"patient {patient}: unknown partition {partition!r}")
    for image_id, partition in sorted(m.image_assignment.items()):
        try:
            patient = extract_patient_id(image_id)
        except InvalidInputError:
            violations.append(f"image {image_id}: unparseable patient id")
            continue
        expected = m.assignment.get(patient)
        if expected is None:
            violations.append(f"image {image_id}: patient {patient} missing from assignment")
        elif partition != expected:
            violations.append(
                f"image {image_id}: partition {partition!r} != patient partition {expected!r}"
            )
    return LeakageReport(violations=violations)


def write_manifest(path: str | Path, m: SplitManifest) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(MANIFEST_HEADER)
        for image_id in sorted(m.image_assignment):
            writer.writerow(
                [image_id, extract_patient_id(image_id), m.image_assignment[image_id], m.seed]
            )


def read_manifest(path: str | Path) -> SplitManifest:
    """Rebuild a manifest from its CSV (ratios are not stored; zeros returned)."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != MANIFEST_HEADER:
            raise ParseError(f"{path}: bad manifest header {header}", line=1)
        assignment: dict[str, str] = {}
        image_assignment: dict[str, str] = {}
        seed = 0
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 4:
                raise ParseError(f"{path}: expected 4 columns, got {len(row)}", line=lineno)
            image_id, patient_id, partition, seed_text = (c.strip() for c in row)
            if partition not in PARTITIONS:
                raise ParseError(f"{path}: unknown partition {partition!r}", line=lineno)
            try:
                seed = int(seed_text)
            except ValueError as exc:
                raise ParseError(f"{path}: bad seed {seed_text!r}", line=lineno) from exc
            prior = assignment.get(patient_id)
            if prior is not None and prior != partition:
                raise ParseError(
                    f"{path}: patient {patient_id} in both {prior!r} and {partition!r}", line=lineno
                )
            assignment[patient_id] = partition
            image_assignment[image_id] = partition
    return SplitManifest(seed=seed, ratios=(0.0, 0.0, 0.0), assignment=assignment, image_assignment=image_assignment)
