from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Literal, Optional
from collections import Counter
from .model import LayoutDataset

IssueKind = Literal[
    "out-of-page", "zero-area", "non-finite", "unknown-category",
    "empty-category", "duplicate-id", "duplicate-image-id", "invalid-page-size",
]

@dataclass(frozen=True)
class ValidationIssue:
    kind: IssueKind
    image_id: Optional[int]
    annotation_id: Optional[int] = None
    detail: str = ""

    def __str__(self) -> str:
        where = f"image {self.image_id}"
        if self.annotation_id is not None:
            where += f", annotation {self.annotation_id}"
        return f"{self.kind} ({where}){': ' + self.detail if self.detail else ''}"

@dataclass(frozen=True)
class ValidationReport:
    issues: List[ValidationIssue] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.ok

    def __len__(self) -> int:
        return len(self.issues)

    def __iter__(self) -> Iterator[ValidationIssue]:
        return iter(self.issues)

    @property
    def ok(self) -> bool:
        return not self.issues

    def by_kind(self) -> Dict[str, int]:
        return dict(Counter(issue.kind for issue in self.issues))

    def to_dict(self) -> Dict[str, object]:
        return {
            "ok": self.ok,
            "counts": self.by_kind(),
            "issues": [
                {"kind": i.kind, "image_id": i.image_id, "annotation_id": i.annotation_id, "detail": i.detail}
                for i in self.issues
            ],
        }

def validate(dataset: LayoutDataset) -> ValidationReport:
    """Lists every invariant violation; never raises."""
    issues: List[ValidationIssue] = []
    image_counts = Counter(page.image_id for page in dataset.pages)
    for image_id, count in image_counts.items():
        if count > 1:
            issues.append(ValidationIssue("duplicate-image-id", image_id, detail=f"{count} pages"))

    for page in dataset.pages:
        if not page.width > 0 or not page.height > 0:
            issues.append(ValidationIssue(
                "invalid-page-size", page.image_id, detail=f"{page.width}x{page.height}"
            ))
        id_counts = Counter(ann.id for ann in page.annotations)
        for ann_id, count in id_counts.items():
            if count > 1:
                issues.append(ValidationIssue("duplicate-id", page.image_id, ann_id, f"{count} annotations"))

        for ann in page.annotations:
            box = ann.bbox
            if not ann.category:
                issues.append(ValidationIssue("empty-category", page.image_id, ann.id))
            elif ann.category not in dataset.taxonomy:
                issues.append(ValidationIssue("unknown-category", page.image_id, ann.id, ann.category))
            if not box.is_finite():
                issues.append(ValidationIssue("non-finite", page.image_id, ann.id, str(box.to_list())))
                continue
            if box.area <= 0:
                issues.append(ValidationIssue("zero-area", page.image_id, ann.id, str(box.to_list())))
            if not box.within(page.width, page.height):
                issues.append(ValidationIssue("out-of-page", page.image_id, ann.id, str(box.to_list())))
    return ValidationReport(issues)
