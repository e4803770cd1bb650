"""Command-line surface: measure, evaluate, calibrate, split, phantom, report.

Batch commands isolate per-image failures: one corrupt input never aborts
the run. Failed images land in a `failures.csv` sidecar next to the main
output and flip the exit code to 1 (2 is reserved for configuration and
I/O errors that prevent the run entirely). All outputs are written in
sorted image order with fixed float formats, so identical inputs produce
byte-identical files.
"""

from __future__ import annotations

import argparse
import csv
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import calibrator as calmod
from .bandcore import AggregationPolicy, largest_component_filter, threshold_map
from .calibration import load_calibration_table
from .contours import BandMaskSpec, load_contour_pair, rasterize_band, reference_cimt
from .errors import CimtError, InvalidConfigError
from .metrics import agreement, overlap, seed_summary
from .pgmio import MASK_SUFFIX, PROB_SUFFIX, read_mask_pgm, read_prob_pgm
from .phantom import Curve, PhantomSpec, generate_suite, write_suite
from .pipeline import measure_mask, measure_probability_map
from .splits import read_manifest, split_images, verify_no_leakage, write_manifest

logger = logging.getLogger("cimt_kit")

EXIT_OK = 0
EXIT_PARTIAL = 1
EXIT_CONFIG = 2

RATIO_COLUMNS = {"test_dice", "test_iou", "cimt_pearson_r", "dice", "iou", "pearson_r"}


def _setup_logging() -> None:
    level = os.environ.get("CIMT_KIT_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def _fmt(value: float | None, spec: str = "%.3f") -> str:
    return "" if value is None else spec % value


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _write_failures(output_dir: Path, failures: list[tuple[str, str]]) -> None:
    if failures:
        _write_csv(output_dir / "failures.csv", ["image_id", "error"],
                   [list(f) for f in sorted(failures)])


def _write_run_info(output_dir: Path, command: str, args, threshold: float | None) -> None:
    """Pin the measurement conventions next to the numbers they produced."""
    lines = [
        f"command={command}",
        f"aggregation={args.aggregation}",
        "thickness_convention=inclusive_pixel_count (lower - upper + 1)",
        "threshold_rule=strict (p > t)",
        f"target_height={args.target_height}",
        f"largest_component={args.largest_component}",
    ]
    if threshold is not None:
        lines.insert(1, f"threshold={threshold:.3f}")
    if command == "evaluate":
        lines.append("diff_convention=pred_minus_ref")
    (output_dir / "run_info.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")


def _discover(input_dir: Path, suffix: str) -> dict[str, Path]:
    return {
        p.name.removesuffix(suffix): p
        for p in sorted(input_dir.glob(f"*{suffix}"))
    }


def _partition_filter(ids: list[str], manifest_path: str | None, partition: str) -> list[str]:
    if manifest_path is None:
        return ids
    manifest = read_manifest(manifest_path)
    if partition == "all":
        keep = set(manifest.image_assignment)
    else:
        keep = set(manifest.partition_images(partition))
    return [i for i in ids if i in keep]


def _resolve_threshold(args) -> float:
    if getattr(args, "threshold_from", None):
        for line in Path(args.threshold_from).read_text(encoding="utf-8").splitlines():
            key, _, value = line.partition("=")
            if key.strip() == "best_threshold":
                return float(value)
        raise InvalidConfigError(f"{args.threshold_from}: no best_threshold entry")
    return args.threshold


def _parse_ratios(text: str) -> tuple[float, float, float]:
    parts = text.split(",")
    if len(parts) != 3:
        raise InvalidConfigError(f"ratios must be three comma-separated numbers, got {text!r}")
    return tuple(float(p) for p in parts)  # type: ignore[return-value]


def _parse_grid(text: str) -> tuple[float, ...]:
    """Either `lo:hi:step` or a comma-separated list."""
    if ":" in text:
        lo, hi, step = (float(p) for p in text.split(":"))
        if step <= 0:
            raise InvalidConfigError("grid step must be positive")
        values = []
        k = 0
        while True:
            v = round(lo + k * step, 10)
            if v > hi + 1e-12:
                break
            values.append(v)
            k += 1
        return tuple(values)
    return tuple(float(p) for p in text.split(","))


# ---------------------------------------------------------------------------
# measure


def _measure_one(task) -> tuple[str, str | None, tuple | None]:
    image_id, path, cal, threshold, policy_text, largest, target_height = task
    try:
        prob = read_prob_pgm(path, image_id)
        if prob.height != target_height:
            logger.warning("%s: map height %d != --target-height %d",
                           image_id, prob.height, target_height)
        result = measure_probability_map(
            prob, cal, threshold=threshold,
            policy=AggregationPolicy.parse(policy_text), largest_component=largest,
        )
        if result is None:
            return image_id, f"no band at threshold {threshold:g}", None
        return image_id, None, (result.cimt_px_working, result.cimt_um, result.valid_columns)
    except (CimtError, OSError) as exc:
        return image_id, str(exc), None


def _run_pool(worker, tasks: list, jobs: int) -> list:
    if jobs <= 1 or len(tasks) <= 1:
        return [worker(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(worker, tasks))


def cmd_measure(args) -> int:
    input_dir = Path(args.input)
    output_dir = Path(args.output)
    output_dir.mkdir(parents=True, exist_ok=True)
    calibration = load_calibration_table(args.calibration)
    threshold = _resolve_threshold(args)
    probs = _discover(input_dir, PROB_SUFFIX)
    if not probs:
        logger.error("no %s files under %s", PROB_SUFFIX, input_dir)
        return EXIT_CONFIG
    ids = _partition_filter(sorted(probs), args.manifest, args.partition)

    tasks, failures = [], []
    for image_id in ids:
        cal = calibration.get(image_id)
        if cal is None:
            failures.append((image_id, "no calibration row"))
            continue
        tasks.append((image_id, str(probs[image_id]), cal, threshold,
                      args.aggregation, args.largest_component, args.target_height))

    rows = []
    for image_id, error, payload in _run_pool(_measure_one, tasks, args.jobs):
        if error is not None:
            failures.append((image_id, error))
        else:
            px, um, cols = payload
            rows.append([image_id, "%.3f" % threshold, "%.3f" % px, "%.3f" % um, cols])
    rows.sort(key=lambda r: r[0])
    _write_csv(output_dir / "measurements.csv",
               ["image_id", "threshold", "cimt_px", "cimt_um", "valid_columns"], rows)
    _write_failures(output_dir, failures)
    _write_run_info(output_dir, "measure", args, threshold)
    print(f"measured {len(rows)} image(s), {len(failures)} failure(s) -> {output_dir}")
    return EXIT_PARTIAL if failures else EXIT_OK


# ---------------------------------------------------------------------------
# evaluate


def _evaluate_one(task) -> tuple[str, str | None, tuple | None]:
    (image_id, pred_path, is_prob, contour_dir, ref_mask_path, cal,
     threshold, policy_text, largest) = task
    policy = AggregationPolicy.parse(policy_text)
    try:
        if is_prob:
            prob = read_prob_pgm(pred_path, image_id)
            mask = threshold_map(prob, threshold)
            if largest:
                mask = largest_component_filter(mask)
        else:
            mask = read_mask_pgm(pred_path, image_id, threshold_used=threshold)

        if ref_mask_path is not None:
            ref_mask = read_mask_pgm(ref_mask_path, image_id)
            ref_result = measure_mask(ref_mask, cal, policy)
        else:
            pair = load_contour_pair(contour_dir, image_id)
            spec = BandMaskSpec(width=mask.width, height=mask.height, resolution_tag="working")
            ref_mask = rasterize_band(
                pair, spec,
                scale_x=mask.width / cal.orig_width,
                scale_y=mask.height / cal.orig_height,
            )
            ref_result = reference_cimt(pair, cal, policy)

        ov = overlap(mask, ref_mask)
        pred_result = measure_mask(mask, cal, policy)
        pred_um = None if pred_result is None else pred_result.cimt_um
        ref_um = None if ref_result is None else ref_result.cimt_um
        return image_id, None, (ov.dice, ov.iou, pred_um, ref_um)
    except (CimtError, OSError) as exc:
        return image_id, str(exc), None


def cmd_evaluate(args) -> int:
    pred_dir = Path(args.pred)
    output_dir = Path(args.output)
    output_dir.mkdir(parents=True, exist_ok=True)
    calibration = load_calibration_table(args.calibration)
    threshold = _resolve_threshold(args)

    probs = _discover(pred_dir, PROB_SUFFIX)
    masks = _discover(pred_dir, MASK_SUFFIX)
    pred_ids = sorted(set(probs) | set(masks))
    pred_ids = _partition_filter(pred_ids, args.manifest, args.partition)
    if not pred_ids:
        logger.error("no predictions under %s", pred_dir)
        return EXIT_CONFIG

    ref_mask_dir = Path(args.ref_masks) if args.ref_masks else None
    contour_dir = Path(args.contours) if args.contours else None
    if contour_dir is None and ref_mask_dir is None:
        logger.error("need --contours or --ref-masks")
        return EXIT_CONFIG

    tasks, failures = [], []
    for image_id in pred_ids:
        cal = calibration.get(image_id)
        if cal is None:
            failures.append((image_id, "no calibration row"))
            continue
        is_prob = image_id in probs
        pred_path = str(probs[image_id] if is_prob else masks[image_id])
        ref_mask_path = None
        if ref_mask_dir is not None:
            candidate = ref_mask_dir / f"{image_id}{MASK_SUFFIX}"
            if not candidate.exists():
                failures.append((image_id, "no reference mask"))
                continue
            ref_mask_path = str(candidate)
        tasks.append((image_id, pred_path, is_prob, str(contour_dir) if contour_dir else None,
                      ref_mask_path, cal, threshold, args.aggregation, args.largest_component))

    results = []
    for image_id, error, payload in _run_pool(_evaluate_one, tasks, args.jobs):
        if error is not None:
            failures.append((image_id, error))
        else:
            results.append((image_id, *payload))
    if not results:
        logger.error("no image overlaps between predictions, references and calibration")
        _write_failures(output_dir, failures)
        return EXIT_CONFIG
    results.sort(key=lambda r: r[0])

    rows = []
    pairs = []
    excluded = 0
    for image_id, dice, iou, pred_um, ref_um in results:
        diff = None if (pred_um is None or ref_um is None) else pred_um - ref_um
        if diff is None:
            excluded += 1
        else:
            pairs.append((pred_um, ref_um))
        rows.append([image_id, "%.6f" % dice, "%.6f" % iou,
                     _fmt(pred_um), _fmt(ref_um), _fmt(diff)])
    _write_csv(output_dir / "per_image.csv",
               ["image_id", "dice", "iou", "pred_um", "ref_um", "diff_um"], rows)

    n = len(results)
    mean_dice = math.fsum(r[1] for r in results) / n
    mean_iou = math.fsum(r[2] for r in results) / n
    summary_header = ["n", "n_excluded", "test_dice", "test_iou", "cimt_mae_um",
                      "cimt_rmse_um", "cimt_bias_um", "cimt_pearson_r",
                      "loa_low_um", "loa_high_um"]
    if pairs:
        agr = agreement(pairs)
        summary_row = [len(pairs), excluded, "%.4f" % mean_dice, "%.4f" % mean_iou,
                       "%.3f" % agr.mae_um, "%.3f" % agr.rmse_um, "%.3f" % agr.bias_um,
                       _fmt(agr.pearson_r, "%.4f"), _fmt(agr.loa_low_um), _fmt(agr.loa_high_um)]
    else:
        summary_row = [0, excluded, "%.4f" % mean_dice, "%.4f" % mean_iou, "", "", "", "", "", ""]
    _write_csv(output_dir / "summary.csv", summary_header, [summary_row])
    _write_failures(output_dir, failures)
    _write_run_info(output_dir, "evaluate", args, threshold)
    print(f"evaluated {n} image(s), {len(failures)} failure(s) -> {output_dir}")
    return EXIT_PARTIAL if failures else EXIT_OK


# ---------------------------------------------------------------------------
# calibrate


def _load_val_images(args, failures: list[tuple[str, str]]) -> list[calmod.ValImage]:
    input_dir = Path(args.input)
    contour_dir = Path(args.contours)
    calibration = load_calibration_table(args.calibration)
    probs = _discover(input_dir, PROB_SUFFIX)
    ids = _partition_filter(sorted(probs), args.manifest, args.partition)
    policy = AggregationPolicy.parse(args.aggregation)
    val_images: list[calmod.ValImage] = []
    for image_id in ids:
        cal = calibration.get(image_id)
        if cal is None:
            failures.append((image_id, "no calibration row"))
            continue
        try:
            prob = read_prob_pgm(probs[image_id], image_id)
            pair = load_contour_pair(contour_dir, image_id)
            ref = reference_cimt(pair, cal, policy)
            if ref is None:
                failures.append((image_id, "empty reference overlap"))
                continue
            val_images.append((prob, cal, ref.cimt_um))
        except (CimtError, OSError) as exc:
            failures.append((image_id, str(exc)))
    return val_images


def cmd_calibrate(args) -> int:
    output_dir = Path(args.output)
    output_dir.mkdir(parents=True, exist_ok=True)
    failures: list[tuple[str, str]] = []
    val_images = _load_val_images(args, failures)
    if not val_images:
        logger.error("calibration set is empty")
        _write_failures(output_dir, failures)
        return EXIT_CONFIG

    cfg = calmod.CalibrationConfig(
        threshold_grid=_parse_grid(args.thresholds),
        temperature_grid=_parse_grid(args.temperatures) if args.temperatures else (1.0,),
        objective=args.objective,
    )
    policy = AggregationPolicy.parse(args.aggregation)
    sweep = calmod.sweep_threshold(val_images, cfg, policy, jobs=args.jobs)
    _write_csv(
        output_dir / "sweep.csv",
        ["threshold", "mae_um", "rmse_um", "bias_um", "n_valid"],
        [["%.3f" % p.threshold, "%.3f" % p.mae_um, "%.3f" % p.rmse_um,
          "%.3f" % p.bias_um, p.n] for p in sweep.per_point],
    )

    comparison = calmod.evaluate_calibrated(
        val_images, sweep.best_threshold, baseline_threshold=args.baseline_threshold,
        policy=policy,
    )
    ablation_header = ["baseline_mae_um", "threshold_best", "threshold_mae_um",
                       "threshold_improvement_um"]
    ablation_row = ["%.3f" % comparison.baseline_mae_um, "%.3f" % sweep.best_threshold,
                    "%.3f" % comparison.calibrated_mae_um, "%.3f" % comparison.improvement_um]
    if args.temperatures:
        temps = calmod.temperature_ablation(
            val_images, _parse_grid(args.temperatures),
            threshold=args.baseline_threshold, policy=policy,
        )
        _write_csv(
            output_dir / "temperature_curve.csv",
            ["temperature", "mae_um", "improvement_um"],
            [["%.3f" % t.temperature, "%.3f" % t.mae_um, "%.3f" % t.improvement_um]
             for t in temps],
        )
        best_temp = max(temps, key=lambda t: t.improvement_um)
        ablation_header += ["temperature_mae_um", "temperature_improvement_um"]
        ablation_row += ["%.3f" % best_temp.mae_um, "%.3f" % best_temp.improvement_um]
    _write_csv(output_dir / "ablation.csv", ablation_header, [ablation_row])

    manifest_path = output_dir / "calibration_manifest.txt"
    manifest_path.write_text(
        f"best_threshold={sweep.best_threshold:.3f}\n"
        f"objective={sweep.objective}\n"
        f"best_value_um={sweep.best_mae_um:.3f}\n"
        f"baseline_threshold={args.baseline_threshold:.3f}\n"
        f"baseline_mae_um={comparison.baseline_mae_um:.3f}\n"
        f"n_images={len(val_images)}\n",
        encoding="utf-8",
    )
    _write_failures(output_dir, failures)
    print(f"best threshold {sweep.best_threshold:.3f} "
          f"({sweep.objective} {sweep.best_mae_um:.3f} um) -> {output_dir}")
    return EXIT_PARTIAL if failures else EXIT_OK


# ---------------------------------------------------------------------------
# split


def cmd_split(args) -> int:
    output_dir = Path(args.output)
    output_dir.mkdir(parents=True, exist_ok=True)
    if args.ids:
        image_ids = [line.strip() for line in Path(args.ids).read_text(encoding="utf-8").splitlines()
                     if line.strip()]
    elif args.calibration:
        image_ids = sorted(load_calibration_table(args.calibration))
    elif args.input:
        image_ids = sorted(_discover(Path(args.input), PROB_SUFFIX))
    else:
        logger.error("need --ids, --calibration or --input to enumerate images")
        return EXIT_CONFIG
    if not image_ids:
        logger.error("no image ids found")
        return EXIT_CONFIG

    ratios = _parse_ratios(args.ratios)
    seeds = [int(s) for s in str(args.seed).split(",")]
    for seed in seeds:
        manifest = split_images(image_ids, seed, ratios)
        report = verify_no_leakage(manifest)
        if not report.ok:
            logger.error("leakage check failed for seed %d: %s", seed, report.violations[:5])
            return EXIT_PARTIAL
        path = output_dir / f"split_seed{seed}.csv"
        write_manifest(path, manifest)
        sizes = {p: len(manifest.partition_patients(p)) for p in ("train", "val", "test")}
        print(f"seed {seed}: {sizes} patients -> {path}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# phantom


def cmd_phantom(args) -> int:
    output_dir = Path(args.output)
    softness = args.edge_softness
    th_base = max(8.0, 6.0 * softness + 2.0)
    base_spec = PhantomSpec(
        width=args.width,
        height=args.height,
        li_curve=Curve("constant", base=round(0.3 * args.height)),
        thickness_curve=Curve("constant", base=th_base),
        edge_softness=softness,
        probability_offset=args.offset,
        mm_per_pixel=args.mm_per_pixel,
        noise_sd=args.noise_sd,
    )
    bundles = generate_suite(args.n, base_spec, variation_seed=args.seed)
    write_suite(output_dir, bundles)
    print(f"wrote {len(bundles)} phantom bundle(s) -> {output_dir}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# report


def _read_rows(path: Path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        return header, [row for row in reader if any(cell.strip() for cell in row)]


def cmd_report(args) -> int:
    output_dir = Path(args.output)
    output_dir.mkdir(parents=True, exist_ok=True)
    if args.per_image:
        header, rows = _read_rows(Path(args.per_image))
        try:
            id_col = header.index("image_id")
            pred_col = header.index("pred_um")
            ref_col = header.index("ref_um")
        except ValueError:
            logger.error("%s: expected image_id/pred_um/ref_um columns", args.per_image)
            return EXIT_CONFIG
        pairs, ba_rows = [], []
        for row in rows:
            if not row[pred_col] or not row[ref_col]:
                continue
            pred, ref = float(row[pred_col]), float(row[ref_col])
            pairs.append((pred, ref))
            ba_rows.append([row[id_col], "%.3f" % ((pred + ref) / 2.0), "%.3f" % (pred - ref)])
        if not pairs:
            logger.error("no complete (pred, ref) pairs in %s", args.per_image)
            return EXIT_CONFIG
        agr = agreement(pairs)
        _write_csv(output_dir / "bland_altman.csv", ["image_id", "mean_um", "diff_um"], ba_rows)
        _write_csv(
            output_dir / "loa_summary.csv",
            ["n", "bias_um", "sd_diff_um", "loa_low_um", "loa_high_um"],
            [[agr.n, "%.3f" % agr.bias_um, _fmt(agr.sd_diff_um),
              _fmt(agr.loa_low_um), _fmt(agr.loa_high_um)]],
        )
        print(f"Bland-Altman pairs and limits of agreement -> {output_dir}")
        return EXIT_OK

    if args.summaries:
        tables = [_read_rows(Path(p)) for p in args.summaries]
        header = tables[0][0]
        if any(t[0] != header for t in tables):
            logger.error("summary files have differing headers")
            return EXIT_CONFIG
        out_row = []
        for col_idx, name in enumerate(header):
            cells = [t[1][0][col_idx] for t in tables]
            if name in ("n", "n_excluded"):
                out_row.append(str(sum(int(c) for c in cells if c)))
                continue
            try:
                values = [float(c) for c in cells]
            except ValueError:
                out_row.append("")
                continue
            mean, sd = seed_summary(values)
            fmt = "%.4f" if name in RATIO_COLUMNS else "%.2f"
            out_row.append(f"{fmt % mean} ± {fmt % (sd or 0.0)}")
        _write_csv(output_dir / "seed_summary.csv", header, [out_row])
        print(f"seed summary over {len(tables)} run(s) -> {output_dir}")
        return EXIT_OK

    logger.error("report needs --per-image or --summaries")
    return EXIT_CONFIG


# ---------------------------------------------------------------------------


def _add_common(parser: argparse.ArgumentParser, *, threshold: bool = True) -> None:
    if threshold:
        parser.add_argument("--threshold", type=float, default=0.5,
                            help="binarization threshold in (0,1), default 0.5")
        parser.add_argument("--threshold-from", default=None, metavar="TXT",
                            help="read best_threshold=... from a calibration manifest")
    parser.add_argument("--aggregation", default="mean",
                        help="mean | median | trimmed:<fraction> (default mean)")
    parser.add_argument("--target-height", type=int, default=512,
                        help="expected working-grid height (default 512)")
    parser.add_argument("--jobs", type=int, default=1, help="parallel workers (default 1)")
    parser.add_argument("--largest-component", action="store_true",
                        help="keep only the largest 8-connected component before measuring")
    parser.add_argument("--manifest", default=None, metavar="CSV",
                        help="split manifest used to filter images")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cimt-kit",
        description="Calibration-aware CIMT measurement from segmentation probability maps",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("measure", help="probability maps -> per-image CIMT CSV")
    p.add_argument("--input", required=True, help="directory of <id>.prob.pgm files")
    p.add_argument("--calibration", required=True, help="calibration CSV")
    p.add_argument("--output", required=True)
    _add_common(p)
    p.add_argument("--partition", default="all", choices=["train", "val", "test", "all"])
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("evaluate", help="predictions vs references -> metrics CSVs")
    p.add_argument("--pred", required=True,
                   help="directory of <id>.prob.pgm and/or <id>.mask.pgm predictions")
    p.add_argument("--contours", default=None, help="directory of <id>.li.txt / <id>.ma.txt")
    p.add_argument("--ref-masks", default=None, help="directory of reference <id>.mask.pgm")
    p.add_argument("--calibration", required=True)
    p.add_argument("--output", required=True)
    _add_common(p)
    p.add_argument("--partition", default="test", choices=["train", "val", "test", "all"])
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("calibrate", help="sweep the threshold on validation data")
    p.add_argument("--input", required=True, help="directory of <id>.prob.pgm files")
    p.add_argument("--contours", required=True)
    p.add_argument("--calibration", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--thresholds", default="0.05:0.95:0.05",
                   help="grid as lo:hi:step or comma list (default 0.05:0.95:0.05)")
    p.add_argument("--temperatures", default="0.5,1,2,5",
                   help="temperature ablation grid, empty string disables")
    p.add_argument("--objective", default="mae_um", choices=list(calmod.OBJECTIVES))
    p.add_argument("--baseline-threshold", type=float, default=0.5)
    _add_common(p, threshold=False)
    p.add_argument("--partition", default="val", choices=["train", "val", "test", "all"])
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("split", help="patient-level train/val/test manifests")
    p.add_argument("--ids", default=None, help="text file with one image id per line")
    p.add_argument("--calibration", default=None, help="calibration CSV to take image ids from")
    p.add_argument("--input", default=None, help="directory of <id>.prob.pgm files")
    p.add_argument("--seed", default="42", help="seed or comma-separated seeds (default 42)")
    p.add_argument("--ratios", default="0.7,0.1,0.2")
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("phantom", help="synthetic oracle suite the pipeline can consume")
    p.add_argument("--n", type=int, default=28)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--width", type=int, default=512)
    p.add_argument("--height", type=int, default=512)
    p.add_argument("--mm-per-pixel", type=float, default=0.06)
    p.add_argument("--edge-softness", type=float, default=0.0,
                   help="sigmoid falloff in px; 0 = hard, oracle-exact bands")
    p.add_argument("--offset", type=float, default=0.0,
                   help="additive probability bias in [-0.3, 0.3]")
    p.add_argument("--noise-sd", type=float, default=0.0)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_phantom)

    p = sub.add_parser("report", help="Bland-Altman export or multi-seed summary")
    p.add_argument("--per-image", default=None, help="per_image.csv from evaluate")
    p.add_argument("--summaries", nargs="+", default=None,
                   help="summary.csv files from several seeds")
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_report)

    return parser


def main(argv: list[str] | None = None) -> None:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        code = args.func(args)
    except (CimtError, OSError) as exc:
        logger.error("%s", exc)
        code = EXIT_CONFIG
    sys.exit(code)


if __name__ == "__main__":
    main()
