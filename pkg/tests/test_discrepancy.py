import pytest
from harmonizer import synthetic
from harmonizer.analysis import (
    ClassStats, build_report, class_distribution, cross_ratios, dataset_overview,
    distribution_from_counts, overview_from_counts, spatial_stats,
)
from harmonizer.dataset import BBox
from harmonizer.dataset.model import Annotation, LayoutDataset, PageRecord
from harmonizer.taxonomy import Taxonomy, resolve_mapping
from harmonizer.errors import CategoryNotFoundError, DegenerateStatsError

def dataset_of(boxes, category="table", width=1766, height=2203):
    anns = [Annotation(i, box, category) for i, box in enumerate(boxes, 1)]
    return LayoutDataset("d", Taxonomy("d", (category, "other")), [PageRecord(1, width, height, annotations=anns)])

def area_stats(category, area):
    return ClassStats(category, 1, 0.0, 1.0, 1.0, area)

@pytest.mark.parametrize("images, annotations, expected", [
    (47744, 810644, 17.0),
    (13642, 230945, 16.9),
    (25000, 328756, 13.2),
    (1, 0, 0.0),
])
def test_overview_averages(images, annotations, expected):
    assert overview_from_counts("split", images, annotations).to_dict()["avg_annotations"] == expected

def test_empty_overview_has_no_averages():
    overview = dataset_overview(LayoutDataset("empty", Taxonomy("t", ("a",))))
    assert overview.to_dict() == {
        "name": "empty", "images": 0, "annotations": 0,
        "avg_annotations": None, "avg_width": None, "avg_height": None,
    }

@pytest.mark.parametrize("count, total, expected", [
    (413074, 810644, 51.0),
    (140107, 328756, 42.6),
    (4625, 810644, 0.6),
])
def test_class_shares(count, total, expected):
    stats = distribution_from_counts({"x": count, "rest": total - count})
    share = next(s for s in stats if s.category == "x")
    assert share.to_dict()["percent"] == expected

def test_split_counts_total():
    stats = distribution_from_counts({"train": 2290447, "val": 260874, "test": 253870})
    assert sum(s.count for s in stats) == 2805191
    assert [s.category for s in stats] == ["train", "val", "test"]
    assert sum(s.percent for s in stats) == pytest.approx(100.0)

def test_single_category_is_everything():
    stats = class_distribution(dataset_of([BBox(0, 0, 5, 5)]))
    assert (stats[0].category, stats[0].percent) == ("table", 100.0)
    assert (stats[1].category, stats[1].count, stats[1].mean_width) == ("other", 0, None)

def test_spatial_means_are_per_box():
    stats = spatial_stats(dataset_of([BBox.from_xywh(0, 0, 10, 10), BBox.from_xywh(0, 0, 30, 10)]), "table")
    assert (stats.mean_width, stats.mean_height, stats.mean_area) == (20.0, 10.0, 200.0)

def test_constant_size_tables_reproduce_mean_area():
    boxes = [BBox.from_xywh(10 * i, 5 * i, 1294.6, 628.9) for i in range(20)]
    stats = spatial_stats(dataset_of(boxes), "table")
    assert stats.mean_area == pytest.approx(814174, abs=1)

def test_spatial_stats_missing_category():
    with pytest.raises(CategoryNotFoundError):
        spatial_stats(dataset_of([BBox(0, 0, 5, 5)]), "paragraph")

@pytest.mark.parametrize("area_a, area_b, text", [
    (814174, 155576, "5.23×"),
    (12777, 2024, "6.31×"),
    (102006, 36186, "2.82×"),
    (30663, 21057, "1.46×"),
])
def test_area_ratios(area_a, area_b, text):
    ratio = cross_ratios(area_stats("c", area_a), area_stats("c", area_b))
    assert ratio.to_dict()["area_ratio_text"] == text

def test_width_ratio_and_identity():
    a = ClassStats("page_footer", 1, 0.0, 413.5, 30.9, 12777)
    b = ClassStats("page_footer", 1, 0.0, 139.7, 14.5, 2024)
    ratio = cross_ratios(a, b)
    assert ratio.format(ratio.width_ratio) == "2.96×"
    same = cross_ratios(a, a)
    assert (same.width_ratio, same.height_ratio, same.area_ratio) == (1.0, 1.0, 1.0)

def test_zero_denominator_is_degenerate():
    with pytest.raises(DegenerateStatsError):
        cross_ratios(area_stats("c", 10), area_stats("c", 0))
    with pytest.raises(DegenerateStatsError):
        cross_ratios(area_stats("c", 10), ClassStats("c"))

def test_statistics_ignore_page_order():
    dataset = synthetic.corpus_a()
    shuffled = dataset.with_pages(reversed(dataset.pages))
    assert class_distribution(dataset) == class_distribution(shuffled)

def test_report_compares_mapped_corpora():
    report = build_report([synthetic.corpus_b(), synthetic.corpus_a()], mapping=resolve_mapping("doclaynet"))
    data = report.to_dict()
    assert [o["name"] for o in data["overview"]] == ["corpus_b", "corpus_a"]
    assert [o["avg_annotations"] for o in data["overview"]] == [5.0, 9.0]
    comparison = report.comparisons[0]
    ratios = {r.category: r for r in comparison.ratios}
    assert set(ratios) == {"paragraph", "subheading", "table", "page_footer"}
    assert ratios["paragraph"].height_ratio == pytest.approx(68 / 20)
    assert ratios["table"].area_ratio == 1.0
    assert comparison.unmatched_reference == [] and comparison.unmatched_other == []
    paragraph = next(s for s in report.distributions["corpus_a"] if s.category == "paragraph")
    assert paragraph.count == 18
    text = report.render_text()
    assert "Spatial ratios: corpus_b / corpus_a" in text
    assert "3.40×" in text

def test_report_normalizes_by_page():
    report = build_report([synthetic.corpus_b()], normalize_by_page=True)
    table = next(s for s in report.distributions["corpus_b"] if s.category == "table")
    assert table.mean_width == pytest.approx(680 / 800)
    assert report.to_dict()["normalize_by_page"] is True

def test_duplicate_names_are_disambiguated():
    b = synthetic.corpus_b(1)
    report = build_report([b, b])
    assert [o.name for o in report.overviews] == ["corpus_b", "corpus_b#2"]
    assert all(r.area_ratio == 1.0 for r in report.comparisons[0].ratios)
