from typing import Dict, List, Sequence
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components
from .plan import GroupDirective, HarmonizationPlan
from .rules import RuleSet
from ..dataset.model import Annotation, PageRecord
from ..taxonomy.taxonomy import TaxonomyMapping
from ..errors import RemapError
import numpy as np

def gap_matrix(boxes: Sequence, gap: float) -> np.ndarray:
    """
    Adjacency of boxes that meet once one of them is dilated by `gap` on every
    side, i.e. both the horizontal and the vertical separation are <= gap.
    """
    coords = np.array([b.to_list() for b in boxes], dtype=np.float64).reshape(-1, 4)
    x0, y0, x1, y1 = coords.T
    dx = np.maximum(0.0, np.maximum(x0[:, None] - x1[None, :], x0[None, :] - x1[:, None]))
    dy = np.maximum(0.0, np.maximum(y0[:, None] - y1[None, :], y0[None, :] - y1[:, None]))
    return (dx <= gap) & (dy <= gap)

def merge_groups(annotations: Sequence[Annotation], gap: float) -> List[List[int]]:
    """Connected components of the gap graph, as lists of annotation ids."""
    if len(annotations) == 1:
        return [[annotations[0].id]]
    adjacency = gap_matrix([a.bbox for a in annotations], gap)
    _, labels = connected_components(csr_matrix(adjacency), directed=False)
    components: Dict[int, List[int]] = {}
    for ann, label in zip(annotations, labels):
        components.setdefault(int(label), []).append(ann.id)
    return [sorted(ids) for ids in components.values()]

def remap_page_categories(page: PageRecord, mapping: TaxonomyMapping) -> Dict[int, str]:
    categories: Dict[int, str] = {}
    for ann in page.annotations:
        target = mapping.map_label(ann.category)
        if target is None:
            # a dropped category has no place in a conserving plan
            raise RemapError(ann.category, mapping.name)
        categories[ann.id] = target
    return categories

def rule_agent_propose(page: PageRecord, mapping: TaxonomyMapping, rules: RuleSet) -> HarmonizationPlan:
    """
    Deterministic reference agent.

    Remaps every category, merges same-category annotations of mergeable
    categories whose boxes lie within `merge_gap_fraction * page.height` of each
    other (transitively), and leaves everything else as singletons. Directives
    never carry a bbox override.
    """
    categories = remap_page_categories(page, mapping)
    ordered = sorted(page.annotations, key=lambda a: a.id)

    by_category: Dict[str, List[Annotation]] = {}
    for ann in ordered:
        by_category.setdefault(categories[ann.id], []).append(ann)

    directives: List[GroupDirective] = []
    for category, members in by_category.items():
        convention = rules.conventions.get(category)
        if convention is not None and convention.mergeable:
            gap = convention.merge_gap_fraction * page.height
            groups = merge_groups(members, gap)
        else:
            groups = [[ann.id] for ann in members]
        directives.extend(GroupDirective(tuple(ids), category) for ids in groups)

    directives.sort(key=lambda d: d.ids[0])
    return HarmonizationPlan(tuple(directives))
