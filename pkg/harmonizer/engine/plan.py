from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Literal, Optional, Sequence, Tuple
from collections import Counter
from .rules import RuleSet
from ..dataset.model import Annotation, BBox, PageRecord
from ..errors import PlanContractError

ViolationKind = Literal[
    "disjointness", "coverage", "unknown-id", "empty-group", "unknown-category",
    "override-outside-page", "override-detached", "override-degenerate",
]

@dataclass(frozen=True)
class PlanViolation:
    kind: ViolationKind
    detail: str = ""
    ids: Tuple[int, ...] = ()

    def __str__(self) -> str:
        ids = f"({', '.join(str(i) for i in self.ids)})" if self.ids else ""
        return f"{self.kind}{ids}{': ' + self.detail if self.detail else ''}"

@dataclass(frozen=True)
class GroupDirective:
    """One group S_r of source ids and what it becomes."""
    ids: Tuple[int, ...]
    target_category: str
    bbox_override: Optional[BBox] = None

    def __post_init__(self):
        object.__setattr__(self, "ids", tuple(self.ids))

@dataclass(frozen=True)
class Partition:
    groups: Tuple[FrozenSet[int], ...]

    def __len__(self) -> int:
        return len(self.groups)

@dataclass(frozen=True)
class HarmonizationPlan:
    """
    A declarative many-to-one plan: one directive per group. There is no way to
    express a split, so a plan can only merge, relabel or adjust.
    """
    directives: Tuple[GroupDirective, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "directives", tuple(self.directives))

    @property
    def partition(self) -> Partition:
        return Partition(tuple(frozenset(d.ids) for d in self.directives))

    @property
    def group_count(self) -> int:
        return len(self.directives)

    def canonical(self) -> "HarmonizationPlan":
        """Directives ordered by ascending minimum source id, ids sorted."""
        directives = [
            GroupDirective(tuple(sorted(set(d.ids))), d.target_category, d.bbox_override)
            for d in self.directives if d.ids
        ]
        directives.sort(key=lambda d: d.ids[0])
        return HarmonizationPlan(tuple(directives))

    def to_dict(self) -> Dict[str, object]:
        groups = []
        for d in self.directives:
            group: Dict[str, object] = {"ids": list(d.ids), "target_category": d.target_category}
            if d.bbox_override is not None:
                group["bbox"] = d.bbox_override.to_list()
            groups.append(group)
        return {"groups": groups}

@dataclass(frozen=True)
class HarmonizedPage:
    image_id: int
    annotations: Tuple[Annotation, ...]
    provenance: Dict[int, FrozenSet[int]] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "annotations", tuple(self.annotations))

    def provenance_dict(self) -> Dict[str, List[int]]:
        return {str(k): sorted(v) for k, v in sorted(self.provenance.items())}

def validate_plan(page: PageRecord, plan: HarmonizationPlan, rules: RuleSet) -> List[PlanViolation]:
    """
    Checks a plan against the conservation constraints. Returns every violation,
    or an empty list when the plan is acceptable.
    """
    violations: List[PlanViolation] = []
    page_ids = set(page.annotation_ids)
    boxes = page.by_id()

    seen: Counter = Counter()
    for index, directive in enumerate(plan.directives):
        if not directive.ids:
            violations.append(PlanViolation("empty-group", f"group {index}"))
        seen.update(set(directive.ids))
        repeated = sorted(i for i, n in Counter(directive.ids).items() if n > 1)
        if repeated:
            violations.append(PlanViolation("disjointness", f"repeated inside group {index}", tuple(repeated)))

    shared = sorted(i for i, n in seen.items() if n > 1)
    if shared:
        violations.append(PlanViolation("disjointness", "id assigned to several groups", tuple(shared)))
    invented = sorted(i for i in seen if i not in page_ids)
    if invented:
        violations.append(PlanViolation("unknown-id", "id not on page", tuple(invented)))
    missing = sorted(page_ids - set(seen))
    if missing:
        violations.append(PlanViolation("coverage", "id not covered by any group", tuple(missing)))

    for index, directive in enumerate(plan.directives):
        if directive.target_category not in rules.target_taxonomy:
            violations.append(PlanViolation(
                "unknown-category", f"group {index}: '{directive.target_category}'", tuple(directive.ids)
            ))
        override = directive.bbox_override
        if override is None:
            continue
        if not override.is_finite() or not override.is_ordered() or override.area <= 0:
            violations.append(PlanViolation(
                "override-degenerate", f"group {index}: {override.to_list()}", tuple(directive.ids)
            ))
            continue
        if not override.within(page.width, page.height):
            violations.append(PlanViolation(
                "override-outside-page", f"group {index}: {override.to_list()}", tuple(directive.ids)
            ))
        sources = [boxes[i].bbox for i in directive.ids if i in boxes]
        if sources and not any(override.intersection_area(src) > 0 for src in sources):
            violations.append(PlanViolation(
                "override-detached", f"group {index}: {override.to_list()}", tuple(directive.ids)
            ))
    return violations

def apply_plan(page: PageRecord, plan: HarmonizationPlan, rules: RuleSet) -> HarmonizedPage:
    """
    Turns each group into one harmonized annotation. The harmonized id is the
    smallest source id of its group, so outputs are stable under reordering.
    """
    violations = validate_plan(page, plan, rules)
    if violations:
        raise PlanContractError(violations)

    sources = page.by_id()
    annotations: List[Annotation] = []
    provenance: Dict[int, FrozenSet[int]] = {}
    for directive in plan.canonical().directives:
        members = [sources[i] for i in directive.ids]
        first = members[0]
        if len(members) == 1 and directive.bbox_override is None and directive.target_category == first.category:
            annotations.append(first)
            provenance[first.id] = frozenset(directive.ids)
            continue

        bbox = directive.bbox_override or BBox.union(m.bbox for m in members)
        if rules.convention(directive.target_category).clip_to_page:
            bbox = bbox.clamp(page.width, page.height)
        extras = dict(first.extras) if len(members) == 1 else {}
        annotations.append(Annotation(first.id, bbox, directive.target_category, extras))
        provenance[first.id] = frozenset(directive.ids)
    return HarmonizedPage(page.image_id, annotations, provenance)

def identity_plan(page: PageRecord, categories: Optional[Dict[int, str]] = None) -> HarmonizationPlan:
    """All singletons. `categories` optionally relabels ids (remap-only)."""
    categories = categories or {}
    return HarmonizationPlan(tuple(
        GroupDirective((ann.id,), categories.get(ann.id, ann.category))
        for ann in sorted(page.annotations, key=lambda a: a.id)
    ))
