import json
import numpy as np
import pytest
from harmonizer import synthetic
from harmonizer.repgeom import (
    EmbeddingRecord, EmbeddingSet, GeometryReport, analyze_geometry, load_embeddings,
    neighborhood_purity, pair_separation, project_2d, render_scatter, silhouette_per_class,
)
from harmonizer.taxonomy import resolve_mapping
from harmonizer.errors import ConfigError, DegenerateInputError, EmbeddingInputError

def embeddings(points, labels, ids=None):
    ids = ids or range(1, len(points) + 1)
    return EmbeddingSet(tuple(
        EmbeddingRecord(i, None, label, tuple(float(v) for v in point))
        for i, point, label in zip(ids, points, labels)
    ))

def write_rows(path, rows):
    path.write_text("".join(json.dumps(row) + "\n" for row in rows), encoding="utf-8")
    return path

TWO_CLUSTERS = embeddings([(x, 0) for x in (0, 1, 2, 10, 11, 12)], list("AAABBB"))

def silhouette_oracle(points, labels):
    points, labels = np.asarray(points, dtype=float), np.asarray(labels)
    scores = []
    for i, point in enumerate(points):
        dist = np.linalg.norm(points - point, axis=1)
        same = (labels == labels[i]) & (np.arange(len(points)) != i)
        if not same.any():
            scores.append(0.0)
            continue
        a = dist[same].mean()
        b = min(dist[labels == other].mean() for other in set(labels) if other != labels[i])
        scores.append(0.0 if max(a, b) == 0 else (b - a) / max(a, b))
    scores = np.array(scores)
    return {label: scores[labels == label].mean() for label in sorted(set(labels))}

def test_four_point_silhouette():
    es = embeddings([(0, 0), (0, 1), (10, 0), (10, 1)], list("AABB"))
    scores = silhouette_per_class(es)
    assert scores["A"] == pytest.approx(0.9002, abs=1e-4)
    assert scores["B"] == pytest.approx(0.9002, abs=1e-4)

def test_silhouette_matches_direct_formula():
    rng = np.random.default_rng(4)
    checked = 0
    while checked < 200:
        n = int(rng.integers(2, 61))
        points = rng.normal(size=(n, int(rng.integers(2, 9))))
        labels = [str(v) for v in rng.integers(0, 4, size=n)]
        if len(set(labels)) < 2:
            continue
        got = silhouette_per_class(embeddings(points, labels))
        for label, value in silhouette_oracle(points, labels).items():
            assert got[label] == pytest.approx(value, abs=1e-9)
        checked += 1

def test_coincident_classes_do_not_separate():
    es = embeddings([(1, 1)] * 4, list("AABB"))
    assert all(score <= 0 for score in silhouette_per_class(es).values())

def test_single_class_is_degenerate():
    with pytest.raises(DegenerateInputError):
        silhouette_per_class(embeddings([(0, 0), (1, 1)], ["A", "A"]))

def test_sample_cap_is_reproducible():
    rows = synthetic.embedding_rows(per_class=20)
    es = EmbeddingSet(tuple(EmbeddingRecord(r["id"], r["page_id"], r["label"], tuple(r["vector"])) for r in rows))
    first = silhouette_per_class(es, sample_cap=5, seed=1)
    assert first == silhouette_per_class(es, sample_cap=5, seed=1)
    with pytest.raises(ConfigError):
        silhouette_per_class(es, sample_cap=0)

def test_purity_on_two_clusters():
    assert neighborhood_purity(TWO_CLUSTERS, k=2)[0] == 1.0
    mean, per_class, k_eff = neighborhood_purity(TWO_CLUSTERS, k=3)
    assert mean == pytest.approx(2 / 3)
    assert per_class == {"A": pytest.approx(2 / 3), "B": pytest.approx(2 / 3)}
    assert k_eff == 3

def test_purity_single_class_is_one():
    es = embeddings([(x, x) for x in range(5)], ["A"] * 5)
    assert neighborhood_purity(es, k=10)[0] == 1.0

def test_purity_ties_go_to_smaller_id():
    # ids 2 and 3 are both at distance 1 from id 1
    es = embeddings([(0, 0), (-1, 0), (1, 0)], ["A", "A", "B"], ids=[1, 3, 2])
    _, per_class, _ = neighborhood_purity(es, k=1)
    assert per_class == {"A": 0.5, "B": 0.0}

def purity_oracle(points, labels, ids, k):
    k_eff = min(k, len(points) - 1)
    scores = []
    for i, point in enumerate(points):
        others = sorted(
            (sum((a - b) ** 2 for a, b in zip(point, other)), ids[j], labels[j])
            for j, other in enumerate(points) if j != i
        )
        scores.append(sum(label == labels[i] for _, _, label in others[:k_eff]) / k_eff)
    per_class = {
        label: sum(s for s, l in zip(scores, labels) if l == label) / labels.count(label)
        for label in set(labels)
    }
    return sum(scores) / len(scores), per_class, k_eff

def test_purity_matches_all_pairs_ranking():
    rng = np.random.default_rng(6)
    for _ in range(200):
        n = int(rng.integers(2, 61))
        # small integer grid so that distance ties are frequent and exact
        points = [tuple(int(v) for v in row) for row in rng.integers(0, 4, size=(n, int(rng.integers(2, 9))))]
        labels = [str(v) for v in rng.integers(0, 3, size=n)]
        ids = [int(i) for i in rng.permutation(np.arange(100, 100 + 3 * n, 3))[:n]]
        k = int(rng.integers(1, 70))
        mean, per_class, k_eff = neighborhood_purity(embeddings(points, labels, ids=ids), k=k)
        want_mean, want_per_class, want_k = purity_oracle(points, labels, ids, k)
        assert k_eff == want_k
        assert mean == pytest.approx(want_mean)
        assert per_class == pytest.approx(want_per_class)

def test_purity_caps_k(tmp_path):
    es = load_embeddings(write_rows(tmp_path / "e.jsonl", synthetic.embedding_rows()))
    assert len(es) == 50
    mean, _, k_eff = neighborhood_purity(es, k=100)
    assert k_eff == 49
    assert mean == pytest.approx(9 / 49)

def test_purity_input_errors():
    with pytest.raises(ConfigError):
        neighborhood_purity(TWO_CLUSTERS, k=0)
    with pytest.raises(DegenerateInputError):
        neighborhood_purity(embeddings([(0, 0)], ["A"]), k=1)

def test_collinear_projection():
    coords = project_2d(embeddings([(-1, 0), (0, 0), (1, 0)], list("ABC")))
    assert coords[:, 0].tolist() == pytest.approx([-1.0, 0.0, 1.0])
    assert coords[:, 1].tolist() == [0.0, 0.0, 0.0]

def test_projection_of_constant_points_fails():
    with pytest.raises(DegenerateInputError):
        project_2d(embeddings([(2, 2)] * 3, list("AAB")))

def test_precomputed_xy_is_kept():
    es = EmbeddingSet((
        EmbeddingRecord(1, None, "A", (0.0, 0.0), (5.0, 6.0)),
        EmbeddingRecord(2, None, "B", (1.0, 1.0), (7.0, 8.0)),
    ))
    assert project_2d(es).tolist() == [[5.0, 6.0], [7.0, 8.0]]
    assert analyze_geometry(es, k=1).params["projection"] == "precomputed"

def test_scores_survive_rigid_motion():
    rng = np.random.default_rng(9)
    points = rng.normal(size=(30, 3))
    labels = [str(v) for v in rng.integers(0, 3, size=30)]
    q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    moved = points @ q + np.array([5.0, -2.0, 7.0])
    before, after = embeddings(points, labels), embeddings(moved, labels)
    for label, value in silhouette_per_class(before).items():
        assert silhouette_per_class(after)[label] == pytest.approx(value, abs=1e-9)
    assert neighborhood_purity(after, k=5)[0] == pytest.approx(neighborhood_purity(before, k=5)[0])

def test_pair_separation_skips_absent_pairs():
    es = embeddings([(0, 0), (0, 1), (10, 0), (10, 1)], ["paragraph", "paragraph", "list_item", "list_item"])
    separation = pair_separation(es)
    assert list(separation) == ["paragraph/list_item"]
    assert separation["paragraph/list_item"] == pytest.approx(0.9002, abs=1e-4)

def test_loader_remaps_heron_labels(tmp_path):
    rows = [
        {"id": "a", "page_id": 1, "label": "Footnote", "vector": [0, 1]},
        {"id": "b", "page_id": 1, "label": "Text", "vector": [1, 0]},
    ]
    es = load_embeddings(write_rows(tmp_path / "h.jsonl", rows), remap=resolve_mapping("heron"))
    assert [r.label for r in es.records] == ["other", "paragraph"]

@pytest.mark.parametrize("rows, row", [
    ([{"id": 1, "label": "A", "vector": [0, 1]}, {"id": 2, "label": "A", "vector": [0, 1, 2]}], 2),
    ([{"id": 1, "label": "A", "vector": [0, "nan"]}], 1),
    ([{"id": 1, "label": "A", "vector": [0, 1]}, {"id": 1, "label": "B", "vector": [1, 1]}], 2),
    ([{"id": 1, "label": "A", "vector": [0]}], 1),
])
def test_loader_reports_bad_rows(tmp_path, rows, row):
    with pytest.raises(EmbeddingInputError) as err:
        load_embeddings(write_rows(tmp_path / "bad.jsonl", rows))
    assert err.value.row == row

def test_report_round_trip_and_scatter(tmp_path):
    es = load_embeddings(write_rows(tmp_path / "e.jsonl", synthetic.embedding_rows()))
    report = analyze_geometry(es, k=5)
    assert report.params["k_effective"] == 5
    assert report.purity_mean == 1.0
    assert all(score > 0.5 for score in report.silhouette.values())
    assert set(report.pair_separation) == {"paragraph/list_item", "title/subheading"}
    data = json.loads(json.dumps(report.to_dict()))
    assert GeometryReport.from_dict(data) == report
    first = render_scatter(report, tmp_path / "one.svg").read_bytes()
    second = render_scatter(GeometryReport.from_dict(data), tmp_path / "two.svg").read_bytes()
    assert first == second
    assert first.lstrip().startswith(b"<?xml")

def test_not_a_geometry_report():
    with pytest.raises(DegenerateInputError):
        GeometryReport.from_dict({"silhouette": {}})
