from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple, Union
from pathlib import Path
from collections import Counter
from marshmallow import Schema, fields, validate, ValidationError, INCLUDE
from .model import Annotation, BBox, LayoutDataset, PageRecord
from ..taxonomy.taxonomy import Taxonomy
from ..common import byte_offset, logger, to_json_number, write_json
from ..errors import CocoParseError, CocoStructureError, ConfigError
import json

DERIVED_ANNOTATION_KEYS = {"area", "segmentation"}
"""Recomputed (area) or not modelled (segmentation) and therefore never round-tripped."""

class CocoImageSchema(Schema):
    class Meta:
        unknown = INCLUDE

    id = fields.Int(required=True)
    width = fields.Int(required=True)
    height = fields.Int(required=True)
    file_name = fields.Str(load_default=None, allow_none=True)

class CocoAnnotationSchema(Schema):
    class Meta:
        unknown = INCLUDE

    id = fields.Int(required=True)
    image_id = fields.Int(required=True)
    category_id = fields.Int(required=True)
    bbox = fields.List(fields.Float(allow_nan=False), required=True, validate=validate.Length(equal=4))

class CocoCategorySchema(Schema):
    class Meta:
        unknown = INCLUDE

    id = fields.Int(required=True)
    name = fields.Str(required=True, validate=validate.Length(min=1))

class CocoFileSchema(Schema):
    class Meta:
        unknown = INCLUDE

    images = fields.List(fields.Nested(CocoImageSchema), required=True)
    annotations = fields.List(fields.Nested(CocoAnnotationSchema), required=True)
    categories = fields.List(fields.Nested(CocoCategorySchema), required=True)

@dataclass
class LoadReport:
    path: str
    dropped_degenerate: List[int] = field(default_factory=list)
    dropped_outside: List[int] = field(default_factory=list)
    clamped: List[int] = field(default_factory=list)
    dropped_keys: List[str] = field(default_factory=list)

    @property
    def dropped_count(self) -> int:
        return len(self.dropped_degenerate) + len(self.dropped_outside)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "path": self.path,
            "dropped_degenerate": len(self.dropped_degenerate),
            "dropped_outside": len(self.dropped_outside),
            "clamped": len(self.clamped),
            "dropped_keys": sorted(self.dropped_keys),
        }

def _read_coco(path: Union[str, Path]) -> Dict[str, Any]:
    raw = Path(path).read_bytes()
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as err:
        raise CocoParseError(str(path), err.start, "invalid utf-8") from err
    try:
        data = json.loads(text)
    except json.JSONDecodeError as err:
        raise CocoParseError(str(path), byte_offset(text, err.pos), err.msg) from err
    if not isinstance(data, dict):
        raise CocoStructureError(f"{path}: top-level JSON value must be an object")
    return data

def _extras(record: Dict[str, Any], known: set) -> Dict[str, Any]:
    return {key: value for key, value in record.items() if key not in known}

def load_coco_with_report(path: Union[str, Path], dataset_name: str) -> Tuple[LayoutDataset, LoadReport]:
    data = _read_coco(path)
    try:
        coco = CocoFileSchema().load(data)
    except ValidationError as err:
        raise CocoStructureError(f"{path}: invalid COCO structure {err.messages}") from err

    report = LoadReport(path=str(path))
    categories: Dict[int, str] = {}
    for category in sorted(coco["categories"], key=lambda c: c["id"]):
        if category["id"] in categories:
            raise CocoStructureError(f"{path}: duplicate category id {category['id']}")
        categories[category["id"]] = category["name"]
    try:
        taxonomy = Taxonomy(dataset_name, tuple(categories.values()))
    except ConfigError as err:
        raise CocoStructureError(f"{path}: {err}") from err

    images: Dict[int, Dict[str, Any]] = {}
    for image in coco["images"]:
        if image["id"] in images:
            raise CocoStructureError(f"{path}: duplicate image id {image['id']}")
        if image["width"] <= 0 or image["height"] <= 0:
            raise CocoStructureError(f"{path}: image {image['id']} has non-positive size")
        images[image["id"]] = image

    unknown_image = [a["id"] for a in coco["annotations"] if a["image_id"] not in images]
    if unknown_image:
        raise CocoStructureError(f"{path}: annotations reference unknown images", unknown_image)
    unknown_category = [a["id"] for a in coco["annotations"] if a["category_id"] not in categories]
    if unknown_category:
        raise CocoStructureError(f"{path}: annotations reference unknown categories", unknown_category)
    seen = Counter((a["image_id"], a["id"]) for a in coco["annotations"])
    duplicated = sorted({ann_id for (_, ann_id), n in seen.items() if n > 1})
    if duplicated:
        raise CocoStructureError(f"{path}: annotation ids repeat within an image", duplicated)

    per_image: Dict[int, List[Annotation]] = {image_id: [] for image_id in images}
    dropped_keys = set()
    for record in coco["annotations"]:
        image = images[record["image_id"]]
        x, y, w, h = record["bbox"]
        if w <= 0 or h <= 0:
            report.dropped_degenerate.append(record["id"])
            continue
        bbox = BBox.from_xywh(x, y, w, h)
        if not bbox.within(image["width"], image["height"]):
            bbox = bbox.clamp(image["width"], image["height"])
            if bbox.area <= 0:
                report.dropped_outside.append(record["id"])
                continue
            report.clamped.append(record["id"])
        extras = _extras(record, {"id", "image_id", "category_id", "bbox"})
        dropped_keys.update(k for k in extras if k in DERIVED_ANNOTATION_KEYS)
        extras = {k: v for k, v in extras.items() if k not in DERIVED_ANNOTATION_KEYS}
        per_image[record["image_id"]].append(
            Annotation(record["id"], bbox, categories[record["category_id"]], extras)
        )

    pages = [
        PageRecord(
            image_id=image["id"], width=image["width"], height=image["height"],
            image_path=image.get("file_name"), annotations=per_image[image["id"]],
            extras=_extras(image, {"id", "width", "height", "file_name"}),
        ) for image in images.values()
    ]
    report.dropped_keys = sorted(dropped_keys)

    if report.dropped_count:
        logger.warning(
            "%s: dropped %d degenerate and %d fully out-of-page annotation(s)",
            path, len(report.dropped_degenerate), len(report.dropped_outside)
        )
    if report.clamped:
        logger.warning("%s: clamped %d out-of-page annotation(s) to the page", path, len(report.clamped))
    if "segmentation" in dropped_keys:
        logger.warning("%s: 'segmentation' is not modelled and will not be written back", path)

    dataset = LayoutDataset(
        name=dataset_name, taxonomy=taxonomy, pages=pages,
        extras=_extras(data, {"images", "annotations", "categories"})
    )
    return dataset, report

def load_coco(path: Union[str, Path], dataset_name: Optional[str] = None) -> LayoutDataset:
    """
    Loads a COCO-style annotation file.

    Arguments
    ---------
    path: COCO JSON with `images`, `annotations` and `categories` arrays
    dataset_name: name given to the dataset and its taxonomy (default: file stem)
    """
    dataset, _ = load_coco_with_report(path, dataset_name or Path(path).stem)
    return dataset

def _annotation_ids_unique(dataset: LayoutDataset) -> bool:
    seen = set()
    for _, ann in dataset.iter_annotations():
        if ann.id in seen:
            return False
        seen.add(ann.id)
    return True

def coco_dict(dataset: LayoutDataset, renumber: Optional[bool] = None) -> Dict[str, Any]:
    if renumber is None:
        renumber = not _annotation_ids_unique(dataset)
    category_ids = {name: i for i, name in enumerate(dataset.taxonomy.names, start=1)}

    images, annotations = [], []
    next_id = 1
    for page in dataset.pages:
        image = dict(page.extras)
        image.update({"id": page.image_id, "width": page.width, "height": page.height})
        if page.image_path is not None:
            image["file_name"] = page.image_path
        images.append(image)
        for ann in page.annotations:
            record = dict(ann.extras)
            record.update({
                "id": next_id if renumber else ann.id,
                "image_id": page.image_id,
                "category_id": category_ids[ann.category],
                "bbox": [to_json_number(v) for v in ann.bbox.to_xywh()],
                "area": to_json_number(ann.bbox.area),
            })
            record.setdefault("iscrowd", 0)
            annotations.append(record)
            next_id += 1

    out = dict(dataset.extras)
    out.update({
        "images": images,
        "annotations": annotations,
        "categories": [{"id": i, "name": n} for n, i in category_ids.items()],
    })
    return out

def save_coco(dataset: LayoutDataset, path: Union[str, Path], renumber: Optional[bool] = None) -> Path:
    """
    Writes COCO JSON. Category ids follow taxonomy order (1..K); annotation ids
    are kept when unique across the dataset and renumbered 1..N otherwise.
    """
    written = write_json(coco_dict(dataset, renumber=renumber), path)
    logger.debug("Wrote %d page(s) to %s", len(dataset), written)
    return written
