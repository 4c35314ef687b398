from .model import BBox, Annotation, PageRecord, LayoutDataset
from .coco import load_coco, load_coco_with_report, save_coco, coco_dict, LoadReport
from .validation import validate, ValidationIssue, ValidationReport

__all__ = [
    "BBox", "Annotation", "PageRecord", "LayoutDataset",
    "load_coco", "load_coco_with_report", "save_coco", "coco_dict", "LoadReport",
    "validate", "ValidationIssue", "ValidationReport",
]
