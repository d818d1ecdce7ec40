"""``doclayout-tools`` command line entry point.

Exit codes: 0 success, 1 domain or I/O error, 2 usage error. Every run that
gets past argument parsing writes ``run_manifest.json`` to the output directory.
"""

from __future__ import annotations

import argparse
import hashlib
import logging
import math
import os
import platform
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .annotation_io import (
    load_detections,
    load_ground_truth,
    load_thresholds,
    save_dataset,
    save_thresholds,
    write_json,
)
from .core import ImageRecord, LayoutCategory
from .distill import (
    FeatureBatch,
    distill_loss,
    fit_projection_closed_form,
    fit_projection_gd,
    lipschitz_constant,
    save_loss_trace,
)
from .errors import LayoutToolsError
from .metrics import INTERPOLATIONS, evaluate
from .pseudo import assign_pseudo_labels, merge_training_set
from .render import render_page
from .taxonomy import CoarseCategory, histogram, remap_dataset
from .thresholds import DEFAULT_FALLBACK, sweep_all, table_from_traces

logger = logging.getLogger("doclayout_tools")

OUT_DIR_ENV = "DOCLAYOUT_OUT_DIR"
MANIFEST = "run_manifest.json"


def _iou_type(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0.0 < value <= 1.0:
        raise argparse.ArgumentTypeError(f"IoU threshold must lie in (0, 1], got {value}")
    return value


def _unit_type(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"value must lie in [0, 1], got {value}")
    return value


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


class _Run:
    """Collects inputs and outputs for the manifest and guards against overwriting inputs."""

    def __init__(self, out_dir: Path):
        self.out_dir = out_dir
        self.inputs: list[str] = []
        self.outputs: list[Path] = []

    def input(self, path: str) -> str:
        self.inputs.append(path)
        return path

    def output(self, path) -> Path:
        path = Path(path)
        resolved = path.resolve()
        if any(Path(p).resolve() == resolved for p in self.inputs):
            raise LayoutToolsError(f"refusing to overwrite input file {path}")
        self.outputs.append(path)
        return path

    def rel(self, path: Path) -> str:
        try:
            return path.resolve().relative_to(self.out_dir.resolve()).as_posix()
        except ValueError:
            return str(path)


def _sha256(path: str) -> str | None:
    try:
        return hashlib.sha256(Path(path).read_bytes()).hexdigest()
    except OSError:
        return None


def _write_text(run: _Run, path, text: str) -> None:
    path = run.output(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def cmd_evaluate(args, run: _Run) -> None:
    split = load_ground_truth(run.input(args.gt))
    dets = load_detections(run.input(args.dets))
    report = evaluate(dets, split, args.iou, args.interp, threads=args.threads)
    write_json(report.to_json(), run.output(run.out_dir / "report.json"), indent=2)
    text = report.to_text()
    _write_text(run, run.out_dir / "report.txt", text + "\n")
    print(text)


def cmd_optimize(args, run: _Run) -> None:
    val = load_ground_truth(run.input(args.gt), label="validation")
    dets = load_detections(run.input(args.dets))
    traces = sweep_all(dets, val, args.iou, threads=args.threads)
    table = table_from_traces(traces, args.fallback, f" at IoU {args.iou:g} over {len(val.images)} validation images")
    out = args.out or run.out_dir / "thresholds.json"
    save_thresholds(table, run.output(out))
    for c, trace in traces.items():
        trace.to_csv(run.output(run.out_dir / "sweeps" / f"{int(c):02d}_{c.name}.csv"))
    summary = {
        "provenance": table.provenance,
        "iou_threshold": args.iou,
        "fallback": args.fallback,
        "fallback_classes": [c.name for c in table.fallback_classes],
        "classes": [
            {
                "id": int(c),
                "name": c.name,
                "threshold": table[c],
                "f1": traces[c].chosen_f1 if c in traces else None,
                "optimized": c in traces,
            }
            for c in LayoutCategory
        ],
    }
    write_json(summary, run.output(run.out_dir / "threshold_report.json"), indent=2)
    for c in LayoutCategory:
        f1_s = f"{traces[c].chosen_f1:.4f}" if c in traces else "fallback"
        print(f"{int(c):>3}  {c.name:<16}{table[c]:>10.4f}  {f1_s}")


def _infer_images(dets) -> tuple[ImageRecord, ...]:
    extents: dict = {}
    for d in dets:
        x2, y2 = d.box.x + d.box.w, d.box.y + d.box.h
        w, h = extents.get(d.image_id, (1.0, 1.0))
        extents[d.image_id] = (max(w, x2), max(h, y2))
    return tuple(ImageRecord(i, math.ceil(w), math.ceil(h)) for i, (w, h) in extents.items())


def cmd_pseudo(args, run: _Run) -> None:
    dets = load_detections(run.input(args.dets))
    table = load_thresholds(run.input(args.thresholds))
    labeled = load_ground_truth(run.input(args.labeled))
    if args.unlabeled:
        images = load_ground_truth(run.input(args.unlabeled)).images
    else:
        logger.warning("no --unlabeled image list given; page sizes inferred from detection extents")
        images = _infer_images(dets)
    pseudo, report = assign_pseudo_labels(dets, table, nms_iou=args.nms_iou)
    merged = merge_training_set(labeled, images, pseudo)
    save_dataset(merged, run.output(args.out or run.out_dir / "merged.json"))
    write_json(report.to_json(), run.output(run.out_dir / "pseudo_report.json"), indent=2)
    text = report.to_text()
    _write_text(run, run.out_dir / "pseudo_report.txt", text + "\n")
    print(text)
    print(f"merged: {len(merged.images)} images, {len(merged.annotations)} annotations "
          f"({len(labeled.annotations)} labeled + {len(pseudo)} pseudo)")


def cmd_remap(args, run: _Run) -> None:
    split = load_ground_truth(run.input(args.gt))
    coarse = remap_dataset(split)
    coarse.save(run.output(args.out or run.out_dir / "coarse.json"))
    print(f"remapped {len(coarse.annotations)} annotations onto {len(CoarseCategory)} coarse classes")


def cmd_stats(args, run: _Run) -> None:
    split = load_ground_truth(run.input(args.gt))
    hist = histogram(split, args.split)
    text = hist.to_csv()
    _write_text(run, run.out_dir / "histogram.csv", text)
    print(text, end="")
    print(f"total,,{hist.total}")


def cmd_render(args, run: _Run) -> None:
    split = load_ground_truth(run.input(args.gt))
    dets = load_detections(run.input(args.dets)) if args.dets else None
    wanted = set(args.image_id) if args.image_id else None
    for img in split.images:
        if wanted is not None and str(img.id) not in wanted:
            continue
        if dets is None:
            items = split.annotations_for(img.id)
        else:
            items = [d for d in dets if d.image_id == img.id and d.score > args.min_score]
        href = args.href_template.format(file_name=img.file_name, id=img.id) if args.href_template else None
        svg = render_page(img, items, href=href)
        _write_text(run, run.out_dir / "svg" / f"{img.id}.svg", svg)
    print(f"wrote {sum(1 for p in run.outputs if p.suffix == '.svg')} SVG page(s) to {run.out_dir / 'svg'}")


def cmd_distill(args, run: _Run) -> None:
    teacher = FeatureBatch.from_csv(run.input(args.teacher))
    student = FeatureBatch.from_csv(run.input(args.student))
    use_bias = not args.no_bias
    closed = fit_projection_closed_form(teacher, student, use_bias=use_bias)
    closed_loss = distill_loss(teacher, student, closed)
    lr = args.lr if args.lr is not None else 1.0 / lipschitz_constant(student, use_bias)
    proj, trace = fit_projection_gd(teacher, student, lr, args.epochs, args.seed, use_bias=use_bias)
    gd_loss = distill_loss(teacher, student, proj)
    save_loss_trace(trace, run.output(run.out_dir / "loss_trace.csv"))
    report = {
        "batch_size": teacher.batch_size,
        "teacher_dim": teacher.dim,
        "student_dim": student.dim,
        "bias": use_bias,
        "lr": lr,
        "epochs": args.epochs,
        "seed": args.seed,
        "closed_form_loss": closed_loss,
        "gradient_descent_loss": gd_loss,
        "loss_gap": gd_loss - closed_loss,
    }
    write_json(report, run.output(run.out_dir / "distill_report.json"), indent=2)
    print(f"closed-form loss:      {closed_loss:.6e}")
    print(f"gradient-descent loss: {gd_loss:.6e}  (lr={lr:.4g}, epochs={args.epochs})")
    print(f"gap:                   {gd_loss - closed_loss:.6e}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out-dir", default=None,
                        help=f"directory for reports and the run manifest (default: ${OUT_DIR_ENV} or .)")
    common.add_argument("--iou", type=_iou_type, default=0.5, help="IoU threshold for a match (default 0.5)")
    common.add_argument("--threads", type=_positive_int, default=1, help="worker threads for per-class work")
    common.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    common.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")

    parser = argparse.ArgumentParser(
        prog="doclayout-tools",
        description="Layout-detection dataset tools: evaluation, per-class thresholds, pseudo-labels, "
        "taxonomy remapping, statistics, SVG overlays and a distillation-loss demo.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("evaluate", parents=[common], help="per-class AP and mAP of detections")
    p.add_argument("--gt", required=True, help="COCO ground-truth file")
    p.add_argument("--dets", required=True, help="COCO results file")
    p.add_argument("--interp", choices=INTERPOLATIONS, default="coco101", help="AP interpolation (default coco101)")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("optimize-thresholds", parents=[common], help="F1-optimal score threshold per class")
    p.add_argument("--gt", required=True, help="validation ground truth")
    p.add_argument("--dets", required=True, help="teacher detections on the validation images")
    p.add_argument("--out", default=None, help="threshold file to write (default OUT_DIR/thresholds.json)")
    p.add_argument("--fallback", type=_unit_type, default=DEFAULT_FALLBACK,
                   help="threshold for classes without validation ground truth (default 0.5)")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("pseudo-label", parents=[common], help="filter detections into pseudo-labels and merge")
    p.add_argument("--dets", required=True, help="teacher detections on unlabeled images")
    p.add_argument("--thresholds", required=True, help="threshold file from optimize-thresholds")
    p.add_argument("--labeled", required=True, help="labeled training ground truth")
    p.add_argument("--unlabeled", default=None,
                   help="COCO file listing the unlabeled images (sizes inferred from detections if omitted)")
    p.add_argument("--out", default=None, help="merged dataset to write (default OUT_DIR/merged.json)")
    p.add_argument("--nms-iou", type=_iou_type, default=None,
                   help="apply class-wise NMS at this IoU before filtering (off by default)")
    p.set_defaults(func=cmd_pseudo)

    p = sub.add_parser("remap", parents=[common], help="map the 23 classes onto the 9 coarse classes")
    p.add_argument("--gt", required=True)
    p.add_argument("--out", default=None, help="coarse dataset to write (default OUT_DIR/coarse.json)")
    p.set_defaults(func=cmd_remap)

    p = sub.add_parser("stats", parents=[common], help="per-class instance histogram as CSV")
    p.add_argument("--gt", required=True)
    p.add_argument("--split", choices=("training", "validation"), default=None,
                   help="label for the histogram (default from the file's split)")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("render", parents=[common], help="SVG overlay per page")
    p.add_argument("--gt", required=True, help="ground truth (page list, and boxes unless --dets is given)")
    p.add_argument("--dets", default=None, help="render these detections instead of the annotations")
    p.add_argument("--image-id", action="append", default=None, help="only these pages (repeatable)")
    p.add_argument("--min-score", type=_unit_type, default=0.0, help="hide detections scoring <= this")
    p.add_argument("--href-template", default=None,
                   help="reference an external page image, e.g. 'images/{file_name}'")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("distill-demo", parents=[common], help="fit the feature projection two ways and compare")
    p.add_argument("--teacher", required=True, help="CSV, one teacher feature vector per row")
    p.add_argument("--student", required=True, help="CSV, one student feature vector per row")
    p.add_argument("--lr", type=float, default=None, help="step size (default 1/L from the data)")
    p.add_argument("--epochs", type=_positive_int, default=2000)
    p.add_argument("--no-bias", action="store_true", help="fit a linear map without bias")
    p.set_defaults(func=cmd_distill)
    return parser


def _config(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("func",)}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    out_dir = Path(args.out_dir or os.environ.get(OUT_DIR_ENV) or ".")
    run = _Run(out_dir)
    status, code = "ok", 0
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        args.func(args, run)
    except (LayoutToolsError, ValueError, OSError) as exc:
        print(f"doclayout-tools {args.command}: error: {exc}", file=sys.stderr)
        status, code = f"error: {type(exc).__name__}", 1

    manifest = {
        "command": args.command,
        "status": status,
        "config": _config(args),
        "inputs": [{"path": p, "sha256": _sha256(p)} for p in run.inputs],
        "outputs": [run.rel(p) for p in run.outputs],
        "versions": {
            "doclayout_tools": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
        },
    }
    try:
        write_json(manifest, out_dir / MANIFEST, indent=2)
    except (LayoutToolsError, OSError) as exc:
        print(f"doclayout-tools: cannot write manifest: {exc}", file=sys.stderr)
        code = code or 1
    return code


def console_main() -> None:
    sys.exit(main())


if __name__ == "__main__":
    console_main()
