"""COCO-style readers and writers for ground truth, detections and threshold tables.

Readers are tolerant of unknown extra fields; writers only emit known fields.
Files ending in ``.gz`` are transparently (de)compressed.
"""

from __future__ import annotations

import gzip
import json
import logging
import math
from pathlib import Path
from typing import Any, Iterable

from .core import (
    NUM_CATEGORIES,
    BoundingBox,
    DatasetSplit,
    Detection,
    GroundTruthInstance,
    ImageRecord,
    LayoutCategory,
    ThresholdTable,
    category_from_id,
    category_from_name,
    clamp_box,
)
from .errors import (
    DanglingReference,
    IoError,
    ParseError,
    RangeError,
    SchemaError,
    ScoreRange,
    UnknownCategory,
)

logger = logging.getLogger(__name__)


def _read_text(path) -> str:
    path = Path(path)
    try:
        if path.suffix == ".gz":
            with gzip.open(path, "rt", encoding="utf-8") as fh:
                return fh.read()
        return path.read_text(encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc


def _read_json(path) -> Any:
    text = _read_text(path)
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: malformed JSON: {exc}") from exc


def write_json(obj: Any, path, *, indent: int | None = None) -> None:
    """Write ``obj`` as JSON with a stable layout (no key sorting, trailing newline)."""
    path = Path(path)
    separators = (",", ": ") if indent is not None else (",", ":")
    text = json.dumps(obj, indent=indent, separators=separators, ensure_ascii=False, allow_nan=False) + "\n"
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        if path.suffix == ".gz":
            # mtime=0 keeps compressed output byte-identical across runs
            with open(path, "wb") as raw, gzip.GzipFile(fileobj=raw, mode="wb", compresslevel=6, mtime=0, filename="") as fh:
                fh.write(text.encode("utf-8"))
        else:
            path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def _require(record: dict, keys: Iterable[str], what: str) -> None:
    if not isinstance(record, dict):
        raise SchemaError(f"{what} must be a JSON object, got {type(record).__name__}")
    missing = [k for k in keys if k not in record]
    if missing:
        raise SchemaError(f"{what} is missing required keys {missing}")


def _parse_bbox(raw, what: str) -> BoundingBox:
    if not isinstance(raw, list) or len(raw) != 4:
        raise SchemaError(f"{what}: bbox must be a list of 4 numbers, got {raw!r}")
    return BoundingBox(*raw)


def _parse_category_id(raw) -> LayoutCategory:
    if isinstance(raw, float) and raw.is_integer():
        raw = int(raw)
    return category_from_id(raw)


def category_table() -> list[dict]:
    return [{"id": int(c), "name": c.name} for c in LayoutCategory]


def _check_categories(raw) -> None:
    if not isinstance(raw, list):
        raise SchemaError("'categories' must be an array")
    pairs = []
    for entry in raw:
        _require(entry, ("id", "name"), "category entry")
        pairs.append((entry["id"], entry["name"]))
    expected = {(int(c), c.name) for c in LayoutCategory}
    if len(pairs) != NUM_CATEGORIES or set(pairs) != expected:
        unexpected = sorted((p for p in pairs if p not in expected), key=str)[:5]
        raise SchemaError(
            f"'categories' must list exactly the {NUM_CATEGORIES} layout categories; "
            f"got {len(pairs)} entries (unexpected: {unexpected})"
        )


def parse_images(raw) -> list[ImageRecord]:
    if not isinstance(raw, list):
        raise SchemaError("'images' must be an array")
    images = []
    for entry in raw:
        _require(entry, ("id", "width", "height"), "image entry")
        file_name = entry.get("file_name", "")
        if not isinstance(file_name, str):
            raise SchemaError(f"image {entry['id']!r}: file_name must be a string")
        images.append(ImageRecord(entry["id"], entry["width"], entry["height"], file_name))
    return images


def load_ground_truth(path, label: str | None = None) -> DatasetSplit:
    """Read a COCO annotation file into a validated :class:`DatasetSplit`.

    The split label comes from ``label`` if given, else from ``info.split``,
    else defaults to ``"labeled"``. Boxes overhanging the image are clamped
    with a warning; boxes wholly outside it are rejected.
    """
    doc = _read_json(path)
    if not isinstance(doc, dict):
        raise ParseError(f"{path}: top level must be a JSON object")
    _require(doc, ("images", "annotations", "categories"), f"{path}")
    _check_categories(doc["categories"])
    images = parse_images(doc["images"])
    by_id = {img.id: img for img in images}
    if len(by_id) != len(images):
        raise SchemaError(f"{path}: duplicate image ids")

    if not isinstance(doc["annotations"], list):
        raise SchemaError("'annotations' must be an array")
    annotations = []
    clamped = 0
    for entry in doc["annotations"]:
        _require(entry, ("image_id", "category_id", "bbox"), "annotation")
        img = by_id.get(entry["image_id"])
        if img is None:
            raise DanglingReference(
                f"annotation {entry.get('id', '?')!r} refers to missing image {entry['image_id']!r}"
            )
        box = _parse_bbox(entry["bbox"], f"annotation {entry.get('id', '?')!r}")
        box, changed = clamp_box(box, img.width, img.height)
        clamped += changed
        iscrowd = entry.get("iscrowd", 0)
        if iscrowd not in (0, 1):
            raise SchemaError(f"annotation {entry.get('id', '?')!r}: iscrowd must be 0 or 1, got {iscrowd!r}")
        annotations.append(
            GroundTruthInstance(
                image_id=entry["image_id"],
                category=_parse_category_id(entry["category_id"]),
                box=box,
                ignore=bool(iscrowd),
                source=entry.get("source", "human"),
            )
        )
    if clamped:
        logger.warning("%s: clamped %d box(es) to image bounds", path, clamped)

    if label is None:
        info = doc.get("info")
        label = info.get("split", "labeled") if isinstance(info, dict) else "labeled"
    return DatasetSplit(tuple(images), tuple(annotations), label)


def image_to_json(img: ImageRecord) -> dict:
    return {"id": img.id, "width": img.width, "height": img.height, "file_name": img.file_name}


def annotation_to_json(index: int, ann: GroundTruthInstance, category_id: int | None = None) -> dict:
    record = {
        "id": index,
        "image_id": ann.image_id,
        "category_id": int(ann.category) if category_id is None else category_id,
        "bbox": ann.box.to_list(),
        "area": ann.box.area,
        "iscrowd": int(ann.ignore),
    }
    if ann.is_pseudo:
        record["source"] = "pseudo"
    return record


def save_dataset(split: DatasetSplit, path) -> None:
    doc = {
        "info": {"split": split.label},
        "images": [image_to_json(img) for img in split.images],
        "annotations": [annotation_to_json(i, a) for i, a in enumerate(split.annotations, start=1)],
        "categories": category_table(),
    }
    write_json(doc, path)


def load_detections(path) -> list[Detection]:
    doc = _read_json(path)
    if not isinstance(doc, list):
        raise ParseError(f"{path}: detections file must be a JSON array")
    detections = []
    for i, entry in enumerate(doc):
        _require(entry, ("image_id", "category_id", "bbox", "score"), f"detection #{i}")
        score = entry["score"]
        if isinstance(score, bool) or not isinstance(score, (int, float)):
            raise ScoreRange(f"detection #{i}: score must be a number, got {score!r}")
        detections.append(
            Detection(
                image_id=entry["image_id"],
                category=_parse_category_id(entry["category_id"]),
                box=_parse_bbox(entry["bbox"], f"detection #{i}"),
                score=score,
            )
        )
    return detections


def save_detections(detections: Iterable[Detection], path) -> None:
    records = [
        {"image_id": d.image_id, "category_id": int(d.category), "bbox": d.box.to_list(), "score": d.score}
        for d in detections
    ]
    write_json(records, path)


def load_thresholds(path) -> ThresholdTable:
    doc = _read_json(path)
    if not isinstance(doc, dict):
        raise ParseError(f"{path}: threshold file must be a JSON object")
    entries = {}
    for name, value in doc.items():
        try:
            cat = category_from_name(name)
        except UnknownCategory:
            raise SchemaError(f"{path}: unexpected threshold key {name!r}") from None
        if cat in entries:
            raise SchemaError(f"{path}: duplicate threshold key {name!r}")
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
            raise RangeError(f"{path}: threshold for {name} must be a number, got {value!r}")
        entries[cat] = value
    if len(entries) != NUM_CATEGORIES:
        missing = [c.name for c in LayoutCategory if c not in entries]
        raise SchemaError(f"{path}: threshold table must have {NUM_CATEGORIES} keys; missing {missing}")
    return ThresholdTable.from_mapping(entries, provenance=f"loaded from {Path(path).name}")


def save_thresholds(table: ThresholdTable, path) -> None:
    write_json(table.as_dict(), path, indent=2)
