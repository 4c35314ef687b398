from dataclasses import dataclass, field, replace
from typing import Any, Dict, Iterable, Iterator, List, Optional, Tuple
from ..taxonomy.taxonomy import Taxonomy
import math

@dataclass(frozen=True)
class BBox:
    """
    Page-pixel box corners, origin top-left. Construction does not enforce the
    corner invariants so that out-of-page or inverted boxes can be reported by
    `validate` and `validate_plan` instead of failing at parse time.
    """
    x0: float
    y0: float
    x1: float
    y1: float

    def __post_init__(self):
        for name in ("x0", "y0", "x1", "y1"):
            object.__setattr__(self, name, float(getattr(self, name)))

    @classmethod
    def from_xywh(cls, x: float, y: float, w: float, h: float) -> "BBox":
        return cls(x, y, x + w, y + h)

    @classmethod
    def from_list(cls, values) -> "BBox":
        x0, y0, x1, y1 = values
        return cls(x0, y0, x1, y1)

    def to_xywh(self) -> Tuple[float, float, float, float]:
        return (self.x0, self.y0, self.x1 - self.x0, self.y1 - self.y0)

    def to_list(self) -> List[float]:
        return [self.x0, self.y0, self.x1, self.y1]

    @property
    def width(self) -> float:
        return self.x1 - self.x0

    @property
    def height(self) -> float:
        return self.y1 - self.y0

    @property
    def area(self) -> float:
        if self.x1 <= self.x0 or self.y1 <= self.y0:
            return 0.0
        return (self.x1 - self.x0) * (self.y1 - self.y0)

    def is_finite(self) -> bool:
        return all(math.isfinite(v) for v in (self.x0, self.y0, self.x1, self.y1))

    def is_ordered(self) -> bool:
        return self.x0 <= self.x1 and self.y0 <= self.y1

    def is_valid(self) -> bool:
        return self.is_finite() and self.is_ordered() and min(self.x0, self.y0) >= 0

    def within(self, width: float, height: float) -> bool:
        return self.x0 >= 0 and self.y0 >= 0 and self.x1 <= width and self.y1 <= height

    def clamp(self, width: float, height: float) -> "BBox":
        return BBox(
            min(max(self.x0, 0.0), width), min(max(self.y0, 0.0), height),
            min(max(self.x1, 0.0), width), min(max(self.y1, 0.0), height),
        )

    def intersection_area(self, other: "BBox") -> float:
        w = min(self.x1, other.x1) - max(self.x0, other.x0)
        h = min(self.y1, other.y1) - max(self.y0, other.y0)
        if w <= 0 or h <= 0:
            return 0.0
        return w * h

    def contains(self, other: "BBox") -> bool:
        return self.x0 <= other.x0 and self.y0 <= other.y0 and \
            self.x1 >= other.x1 and self.y1 >= other.y1

    @staticmethod
    def union(boxes: Iterable["BBox"]) -> "BBox":
        boxes = list(boxes)
        if not boxes:
            raise ValueError("Bounding union of zero boxes")
        return BBox(
            min(b.x0 for b in boxes), min(b.y0 for b in boxes),
            max(b.x1 for b in boxes), max(b.y1 for b in boxes),
        )

@dataclass(frozen=True)
class Annotation:
    id: int
    bbox: BBox
    category: str
    extras: Dict[str, Any] = field(default_factory=dict, compare=False, hash=False, repr=False)

    def with_category(self, category: str) -> "Annotation":
        return replace(self, category=category)

@dataclass(frozen=True)
class PageRecord:
    image_id: int
    width: int
    height: int
    image_path: Optional[str] = None
    annotations: Tuple[Annotation, ...] = ()
    extras: Dict[str, Any] = field(default_factory=dict, compare=False, hash=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "annotations", tuple(self.annotations))

    @property
    def annotation_count(self) -> int:
        return len(self.annotations)

    @property
    def annotation_ids(self) -> List[int]:
        return [ann.id for ann in self.annotations]

    def by_id(self) -> Dict[int, Annotation]:
        return {ann.id: ann for ann in self.annotations}

    def with_annotations(self, annotations: Iterable[Annotation]) -> "PageRecord":
        return replace(self, annotations=tuple(annotations))

@dataclass(frozen=True)
class LayoutDataset:
    name: str
    taxonomy: Taxonomy
    pages: Tuple[PageRecord, ...] = ()
    extras: Dict[str, Any] = field(default_factory=dict, compare=False, hash=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "pages", tuple(self.pages))

    def __iter__(self) -> Iterator[PageRecord]:
        return iter(self.pages)

    def __len__(self) -> int:
        return len(self.pages)

    @property
    def annotation_count(self) -> int:
        return sum(page.annotation_count for page in self.pages)

    def iter_annotations(self) -> Iterator[Tuple[PageRecord, Annotation]]:
        for page in self.pages:
            for ann in page.annotations:
                yield page, ann

    def with_pages(self, pages: Iterable[PageRecord], taxonomy: Optional[Taxonomy] = None) -> "LayoutDataset":
        return replace(self, pages=tuple(pages), taxonomy=self.taxonomy if taxonomy is None else taxonomy)
