from dataclasses import dataclass, field, replace
from typing import Dict, Iterable, List, Mapping, Optional, Sequence
from terminaltables import AsciiTable
import pandas as pd
from ..dataset.model import LayoutDataset
from ..taxonomy.taxonomy import TaxonomyMapping
from ..errors import CategoryNotFoundError, DegenerateStatsError, RemapError
from ..common import logger

COLUMNS = ["image_id", "category", "width", "height", "area", "page_width", "page_height"]

def _round(value: Optional[float], digits: int) -> Optional[float]:
    return None if value is None else round(float(value), digits)

@dataclass(frozen=True)
class DatasetOverview:
    name: str
    images: int
    annotations: int
    avg_annotations: Optional[float] = None
    avg_width: Optional[float] = None
    avg_height: Optional[float] = None

    def to_dict(self) -> Dict[str, object]:
        return {
            "name": self.name,
            "images": self.images,
            "annotations": self.annotations,
            "avg_annotations": _round(self.avg_annotations, 1),
            "avg_width": _round(self.avg_width, 1),
            "avg_height": _round(self.avg_height, 1),
        }

@dataclass(frozen=True)
class ClassStats:
    category: str
    count: int = 0
    percent: float = 0.0
    mean_width: Optional[float] = None
    mean_height: Optional[float] = None
    mean_area: Optional[float] = None

    @property
    def has_geometry(self) -> bool:
        return None not in (self.mean_width, self.mean_height, self.mean_area)

    def to_dict(self) -> Dict[str, object]:
        return {
            "category": self.category,
            "count": self.count,
            "percent": round(self.percent, 1),
            "mean_width": _round(self.mean_width, 4),
            "mean_height": _round(self.mean_height, 4),
            "mean_area": _round(self.mean_area, 4),
        }

@dataclass(frozen=True)
class CrossRatio:
    category: str
    width_a: float
    width_b: float
    height_a: float
    height_b: float
    area_a: float
    area_b: float
    width_ratio: float
    height_ratio: float
    area_ratio: float

    @staticmethod
    def format(value: float) -> str:
        return f"{value:.2f}×"

    def to_dict(self) -> Dict[str, object]:
        return {
            "category": self.category,
            "width_a": self.width_a, "width_b": self.width_b,
            "height_a": self.height_a, "height_b": self.height_b,
            "area_a": self.area_a, "area_b": self.area_b,
            "width_ratio": round(self.width_ratio, 4),
            "height_ratio": round(self.height_ratio, 4),
            "area_ratio": round(self.area_ratio, 4),
            "width_ratio_text": self.format(self.width_ratio),
            "height_ratio_text": self.format(self.height_ratio),
            "area_ratio_text": self.format(self.area_ratio),
        }

@dataclass
class Comparison:
    reference: str
    other: str
    ratios: List[CrossRatio] = field(default_factory=list)
    unmatched_reference: List[str] = field(default_factory=list)
    unmatched_other: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict[str, object]:
        return {
            "reference": self.reference,
            "other": self.other,
            "ratios": [ratio.to_dict() for ratio in self.ratios],
            "unmatched": {self.reference: self.unmatched_reference, self.other: self.unmatched_other},
        }

@dataclass
class DiscrepancyReport:
    overviews: List[DatasetOverview]
    distributions: Dict[str, List[ClassStats]]
    comparisons: List[Comparison]
    normalized: bool = False
    mapping: Optional[str] = None

    def to_dict(self) -> Dict[str, object]:
        return {
            "normalize_by_page": self.normalized,
            "mapping": self.mapping,
            "overview": [overview.to_dict() for overview in self.overviews],
            "class_distribution": {
                name: [stats.to_dict() for stats in rows] for name, rows in self.distributions.items()
            },
            "comparisons": [comparison.to_dict() for comparison in self.comparisons],
        }

    def render_text(self) -> str:
        fmt = lambda v, spec: "-" if v is None else format(v, spec)
        blocks = []
        rows = [["Dataset", "Images", "Annotations", "Avg Ann/Img", "Avg Size (W×H)"]]
        for o in self.overviews:
            size = "-" if o.avg_width is None else f"{o.avg_width:.0f}×{o.avg_height:.0f}"
            rows.append([o.name, f"{o.images:,}", f"{o.annotations:,}", fmt(o.avg_annotations, ".1f"), size])
        blocks.append(AsciiTable(rows, title="Overview").table)

        for name, stats in self.distributions.items():
            rows = [["Category", "Count", "%", "Mean W", "Mean H", "Mean Area"]]
            for s in stats:
                rows.append([s.category, f"{s.count:,}", f"{s.percent:.1f}%", fmt(s.mean_width, ".1f"),
                             fmt(s.mean_height, ".1f"), fmt(s.mean_area, ",.0f")])
            blocks.append(AsciiTable(rows, title=f"Class distribution: {name}").table)

        for comparison in self.comparisons:
            ref, other = comparison.reference, comparison.other
            rows = [["Class", f"{ref} W", f"{ref} H", f"{ref} Area", f"{other} Area",
                     "W Ratio", "H Ratio", "Area Ratio"]]
            for r in comparison.ratios:
                rows.append([r.category, f"{r.width_a:.1f}", f"{r.height_a:.1f}", f"{r.area_a:,.0f}",
                             f"{r.area_b:,.0f}", r.format(r.width_ratio), r.format(r.height_ratio),
                             r.format(r.area_ratio)])
            table = AsciiTable(rows, title=f"Spatial ratios: {ref} / {other}").table
            table += f"\nOnly in {ref}: {', '.join(comparison.unmatched_reference) or '-'}"
            table += f"\nOnly in {other}: {', '.join(comparison.unmatched_other) or '-'}"
            blocks.append(table)
        return "\n\n".join(blocks) + "\n"

def annotation_frame(dataset: LayoutDataset, mapping: Optional[TaxonomyMapping] = None) -> pd.DataFrame:
    """
    One row per annotation. With a mapping, labels are translated; labels the
    mapping rejects keep their source name and labels it drops are left out.
    """
    rows = []
    for page in dataset.pages:
        for ann in page.annotations:
            category = ann.category
            if mapping is not None:
                try:
                    category = mapping.map_label(category)
                except RemapError:
                    pass
                if category is None:
                    continue
            rows.append((page.image_id, category, ann.bbox.width, ann.bbox.height, ann.bbox.area,
                         float(page.width), float(page.height)))
    return pd.DataFrame(rows, columns=COLUMNS)

def overview_from_counts(name: str, images: int, annotations: int,
                         avg_width: Optional[float] = None, avg_height: Optional[float] = None) -> DatasetOverview:
    if images <= 0:
        return DatasetOverview(name, 0, annotations)
    return DatasetOverview(name, images, annotations, annotations / images, avg_width, avg_height)

def dataset_overview(dataset: LayoutDataset) -> DatasetOverview:
    if not dataset.pages:
        return DatasetOverview(dataset.name, 0, 0)
    sizes = pd.DataFrame([(p.width, p.height) for p in dataset.pages], columns=["width", "height"])
    return overview_from_counts(
        dataset.name, len(dataset.pages), dataset.annotation_count,
        float(sizes["width"].mean()), float(sizes["height"].mean())
    )

def distribution_from_counts(counts: Mapping[str, int]) -> List[ClassStats]:
    """Class shares from bare counts, ordered by descending count then name."""
    total = sum(counts.values())
    stats = [
        ClassStats(category, int(count), 100.0 * count / total if total else 0.0)
        for category, count in counts.items()
    ]
    return sorted(stats, key=lambda s: (-s.count, s.category))

def _geometry(frame: pd.DataFrame, normalize_by_page: bool) -> pd.DataFrame:
    frame = frame.copy()
    if normalize_by_page:
        frame["width"] = frame["width"] / frame["page_width"]
        frame["height"] = frame["height"] / frame["page_height"]
        frame["area"] = frame["area"] / (frame["page_width"] * frame["page_height"])
    return frame.groupby("category")[["width", "height", "area"]].mean()

def _distribution(frame: pd.DataFrame, categories: Iterable[str], normalize_by_page: bool) -> List[ClassStats]:
    counts = frame.groupby("category").size()
    means = _geometry(frame, normalize_by_page)
    total = int(counts.sum())
    names = list(dict.fromkeys(list(categories) + list(counts.index)))
    stats = []
    for category in names:
        count = int(counts.get(category, 0))
        row = means.loc[category] if category in means.index else None
        stats.append(ClassStats(
            category, count, 100.0 * count / total if total else 0.0,
            None if row is None else float(row["width"]),
            None if row is None else float(row["height"]),
            None if row is None else float(row["area"]),
        ))
    return sorted(stats, key=lambda s: (-s.count, s.category))

def class_distribution(dataset: LayoutDataset, normalize_by_page: bool = False) -> List[ClassStats]:
    """
    Per-category counts, shares of the dataset total and mean box geometry.
    Every taxonomy category is listed, absent ones with a zero count.
    """
    return _distribution(annotation_frame(dataset), dataset.taxonomy.names, normalize_by_page)

def spatial_stats(dataset: LayoutDataset, category: str, *, normalize_by_page: bool = False) -> ClassStats:
    """
    Per-box means of width, height and area for one category. Area is averaged
    per box, not taken as mean width times mean height.
    """
    frame = annotation_frame(dataset)
    subset = frame[frame["category"] == category]
    if subset.empty:
        raise CategoryNotFoundError(category)
    means = _geometry(subset, normalize_by_page).loc[category]
    return ClassStats(
        category, len(subset), 100.0 * len(subset) / len(frame),
        float(means["width"]), float(means["height"]), float(means["area"])
    )

def cross_ratios(stats_a: ClassStats, stats_b: ClassStats) -> CrossRatio:
    """Ratios a / b of the mean width, height and area of one category."""
    for stats in (stats_a, stats_b):
        if not stats.has_geometry:
            raise DegenerateStatsError(f"'{stats.category}' has no spatial statistics")
    for label, value in (("width", stats_b.mean_width), ("height", stats_b.mean_height),
                         ("area", stats_b.mean_area)):
        if value == 0:
            raise DegenerateStatsError(f"Mean {label} of '{stats_b.category}' is zero, ratio undefined")
    return CrossRatio(
        category=stats_a.category,
        width_a=stats_a.mean_width, width_b=stats_b.mean_width,
        height_a=stats_a.mean_height, height_b=stats_b.mean_height,
        area_a=stats_a.mean_area, area_b=stats_b.mean_area,
        width_ratio=stats_a.mean_width / stats_b.mean_width,
        height_ratio=stats_a.mean_height / stats_b.mean_height,
        area_ratio=stats_a.mean_area / stats_b.mean_area,
    )

def _unique_names(datasets: Sequence[LayoutDataset]) -> List[str]:
    names, seen = [], {}
    for dataset in datasets:
        seen[dataset.name] = seen.get(dataset.name, 0) + 1
        names.append(dataset.name if seen[dataset.name] == 1 else f"{dataset.name}#{seen[dataset.name]}")
    return names

def build_report(datasets: Sequence[LayoutDataset], mapping: Optional[TaxonomyMapping] = None,
                 normalize_by_page: bool = False) -> DiscrepancyReport:
    """
    Compares the first dataset against each of the others.

    Arguments
    ---------
    datasets: the reference dataset first
    mapping: translates the labels of every non-reference dataset before comparing
    normalize_by_page: divide box dimensions by the page size before averaging
    """
    if not datasets:
        raise ValueError("build_report needs at least one dataset")
    names = _unique_names(datasets)
    frames = [annotation_frame(d, mapping if i else None) for i, d in enumerate(datasets)]

    overviews = [dataset_overview(d) for d in datasets]
    overviews = [replace(o, name=n) for n, o in zip(names, overviews)]
    distributions = {}
    for i, (name, frame) in enumerate(zip(names, frames)):
        categories = datasets[i].taxonomy.names if not i or mapping is None else ()
        distributions[name] = _distribution(frame, categories, normalize_by_page)

    comparisons = []
    present = lambda name: {s.category: s for s in distributions[name] if s.count > 0}
    reference = present(names[0])
    for name in names[1:]:
        other = present(name)
        shared = sorted(set(reference) & set(other), key=lambda c: (-reference[c].count, c))
        ratios = []
        for category in shared:
            try:
                ratios.append(cross_ratios(reference[category], other[category]))
            except DegenerateStatsError as err:
                logger.warning("Skipping ratio for '%s' against %s: %s", category, name, err)
        comparisons.append(Comparison(
            names[0], name, ratios,
            sorted(c for c in reference if c not in other),
            sorted(c for c in other if c not in reference),
        ))
    return DiscrepancyReport(overviews, distributions, comparisons, normalize_by_page,
                             mapping.name if mapping is not None else None)
