#!/usr/bin/env python3
"""Run a segmentation checkpoint over ultrasound images and export
foreground probability maps in the measurement toolkit's portable format.

The adapter is deliberately model-agnostic: the checkpoint is any
TorchScript module that maps a normalized (N, 3, 512, 512) batch to
per-pixel foreground logits, either (N, 1, H, W) (sigmoid applied) or
(N, 2, H, W) (softmax applied, channel 1 taken as foreground). Backbone
specifics live inside the scripted module, not here.

Preprocessing matches the measurement pipeline's geometry contract:
grayscale, resize to 512x512 (bilinear), repeat to three channels,
normalize with the ImageNet mean and standard deviation.

Outputs, per input image `<image_id>.<ext>`:
  <output>/<image_id>.prob.pgm   16-bit big-endian PGM, maxval 65535,
                                 stored value v = probability v / 65535
  <output>/manifest.csv          image_id,orig_width,orig_height

With `--cf <csv>` (columns image_id,mm_per_pixel) the manifest is joined
into a ready `calibration.csv` in the schema the measurement pipeline
consumes: image_id,mm_per_pixel,orig_width,orig_height.

Unreadable images are skipped with a log entry (exit code 1 if any were
skipped); an unloadable checkpoint is fatal (exit code 2).
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

import numpy as np
import torch
from PIL import Image

logger = logging.getLogger("export_adapter")

TARGET_SIZE = (512, 512)  # must match the measurement pipeline's --target-height
IMAGENET_MEAN = (0.485, 0.456, 0.406)
IMAGENET_STD = (0.229, 0.224, 0.225)
IMAGE_EXTENSIONS = (".png", ".jpg", ".jpeg", ".bmp", ".tif", ".tiff")
PROB_MAXVAL = 65535


def preprocess(path: Path) -> tuple[torch.Tensor, int, int]:
    """Image file -> normalized (3, 512, 512) tensor plus original size."""
    with Image.open(path) as img:
        orig_width, orig_height = img.size
        gray = img.convert("L").resize(TARGET_SIZE, Image.BILINEAR)
    plane = np.asarray(gray, dtype=np.float32) / 255.0
    channels = np.stack([
        (plane - mean) / std for mean, std in zip(IMAGENET_MEAN, IMAGENET_STD)
    ])
    return torch.from_numpy(channels), orig_width, orig_height


def foreground_probability(logits: torch.Tensor) -> torch.Tensor:
    """(N, C, H, W) or (N, H, W) logits -> (N, H, W) probabilities."""
    if logits.ndim == 3:
        return torch.sigmoid(logits)
    if logits.ndim == 4 and logits.shape[1] == 1:
        return torch.sigmoid(logits[:, 0])
    if logits.ndim == 4 and logits.shape[1] == 2:
        return torch.softmax(logits, dim=1)[:, 1]
    raise ValueError(f"unsupported model output shape {tuple(logits.shape)}")


def write_prob_pgm(path: Path, probabilities: np.ndarray) -> None:
    grid = np.clip(np.rint(probabilities * PROB_MAXVAL), 0, PROB_MAXVAL).astype(">u2")
    height, width = grid.shape
    header = f"P5\n{width} {height}\n{PROB_MAXVAL}\n".encode("ascii")
    path.write_bytes(header + grid.tobytes())


def load_cf_table(path: Path) -> dict[str, str]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = [h.strip() for h in next(reader)]
        if header[:2] != ["image_id", "mm_per_pixel"]:
            raise ValueError(f"{path}: expected header image_id,mm_per_pixel")
        return {row[0].strip(): row[1].strip() for row in reader if row and row[0].strip()}


def export_probabilities(
    checkpoint: str,
    input_dir: Path,
    output_dir: Path,
    batch_size: int = 4,
    cf_table: dict[str, str] | None = None,
) -> tuple[int, int]:
    """Returns (exported, skipped) counts."""
    model = torch.jit.load(checkpoint, map_location="cpu")
    model.eval()

    images = sorted(
        p for p in input_dir.iterdir()
        if p.suffix.lower() in IMAGE_EXTENSIONS and not p.name.startswith(".")
    )
    output_dir.mkdir(parents=True, exist_ok=True)

    manifest: list[tuple[str, int, int]] = []
    skipped = 0
    batch: list[tuple[str, torch.Tensor, int, int]] = []

    def flush():
        if not batch:
            return
        tensors = torch.stack([t for _, t, _, _ in batch])
        with torch.no_grad():
            probs = foreground_probability(model(tensors)).cpu().numpy()
        for (image_id, _, ow, oh), prob in zip(batch, probs):
            write_prob_pgm(output_dir / f"{image_id}.prob.pgm", prob.astype(np.float64))
            manifest.append((image_id, ow, oh))
        batch.clear()

    for path in images:
        image_id = path.stem
        try:
            tensor, ow, oh = preprocess(path)
        except OSError as exc:
            logger.warning("skipping unreadable image %s: %s", path.name, exc)
            skipped += 1
            continue
        batch.append((image_id, tensor, ow, oh))
        if len(batch) >= batch_size:
            flush()
    flush()

    with open(output_dir / "manifest.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["image_id", "orig_width", "orig_height"])
        writer.writerows(manifest)

    if cf_table is not None:
        with open(output_dir / "calibration.csv", "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["image_id", "mm_per_pixel", "orig_width", "orig_height"])
            for image_id, ow, oh in manifest:
                mm = cf_table.get(image_id)
                if mm is None:
                    logger.warning("%s: no calibration factor, left out of calibration.csv", image_id)
                    continue
                writer.writerow([image_id, mm, ow, oh])

    return len(manifest), skipped


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    parser = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    parser.add_argument("--checkpoint", required=True, help="TorchScript checkpoint path")
    parser.add_argument("--input", required=True, help="directory of ultrasound images")
    parser.add_argument("--output", required=True, help="directory for .prob.pgm files + manifest")
    parser.add_argument("--batch-size", type=int, default=4)
    parser.add_argument("--cf", default=None,
                        help="optional CSV image_id,mm_per_pixel to emit calibration.csv")
    args = parser.parse_args(argv)

    try:
        model_path = args.checkpoint
        cf_table = load_cf_table(Path(args.cf)) if args.cf else None
        exported, skipped = export_probabilities(
            model_path, Path(args.input), Path(args.output),
            batch_size=args.batch_size, cf_table=cf_table,
        )
    except (RuntimeError, ValueError, OSError) as exc:
        logger.error("%s", exc)
        return 2
    logger.info("exported %d probability map(s), skipped %d", exported, skipped)
    return 1 if skipped else 0


if __name__ == "__main__":
    sys.exit(main())
