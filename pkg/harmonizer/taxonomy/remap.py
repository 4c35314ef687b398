from dataclasses import dataclass, field
from typing import Counter as CounterType, Dict, List, Tuple
from collections import Counter
from .taxonomy import TaxonomyMapping
from ..dataset.model import LayoutDataset
from ..common import logger

@dataclass
class RemapReport:
    pairs: CounterType = field(default_factory=Counter)
    dropped: CounterType = field(default_factory=Counter)

    @property
    def total_mapped(self) -> int:
        return sum(self.pairs.values())

    @property
    def total_dropped(self) -> int:
        return sum(self.dropped.values())

    def to_dict(self) -> Dict[str, object]:
        return {
            "pairs": [
                {"source": s, "target": t, "count": n}
                for (s, t), n in sorted(self.pairs.items())
            ],
            "dropped": dict(sorted(self.dropped.items())),
            "total_mapped": self.total_mapped,
            "total_dropped": self.total_dropped,
        }

def remap_dataset(dataset: LayoutDataset, mapping: TaxonomyMapping) -> Tuple[LayoutDataset, RemapReport]:
    """
    Replaces every annotation category through `mapping`. Geometry and ids are
    left untouched; the result carries the mapping's target taxonomy.
    """
    if mapping.source != dataset.taxonomy.name:
        logger.warning(
            "Mapping source '%s' differs from dataset taxonomy '%s'; remapping by category membership",
            mapping.source, dataset.taxonomy.name
        )
    report = RemapReport()
    cache: Dict[str, object] = {}
    pages = []
    for page in dataset.pages:
        annotations: List = []
        for ann in page.annotations:
            if ann.category not in cache:
                cache[ann.category] = mapping.map_label(ann.category)
            target = cache[ann.category]
            if target is None:
                report.dropped[ann.category] += 1
                continue
            report.pairs[(ann.category, target)] += 1
            annotations.append(ann if target == ann.category else ann.with_category(target))
        pages.append(page.with_annotations(annotations))
    if report.dropped:
        logger.warning("Remap dropped %d annotation(s): %s", report.total_dropped, dict(report.dropped))
    return dataset.with_pages(pages, taxonomy=mapping.target), report
