import json
import pytest
from harmonizer.taxonomy import (
    Taxonomy, TaxonomyMapping, UnmappedPolicy, builtin_heron_remap, builtin_taxonomy,
    builtin_target_taxonomy, correspondence, identity_mapping, load_mapping, remap_dataset,
    resolve_mapping, save_mapping,
)
from harmonizer.errors import ConfigError, RemapError
from harmonizer import synthetic

def test_target_taxonomy_has_seventeen_categories():
    target = builtin_target_taxonomy()
    assert len(target) == 17
    assert target.names[0] == "paragraph"
    assert "other" in target

def test_taxonomy_rejects_duplicates():
    with pytest.raises(ConfigError):
        Taxonomy("t", ("a", "b", "a"))

def test_heron_mapping_covers_every_source_category():
    mapping = builtin_heron_remap()
    for category in builtin_taxonomy("heron"):
        assert mapping.map_label(category) in builtin_target_taxonomy()
    assert mapping.map_label("Footnote") == "other"
    assert mapping.map_label("Checkbox-Selected") == "checkbox_checked"

def test_unmapped_policies():
    target = Taxonomy("t", ("a", "other"))
    assert TaxonomyMapping("s", target, {"x": "a"}).map_label("x") == "a"
    with pytest.raises(RemapError):
        TaxonomyMapping("s", target, {"x": "a"}).map_label("y")
    assert TaxonomyMapping("s", target, {}, UnmappedPolicy("drop")).map_label("y") is None
    assert TaxonomyMapping("s", target, {}, UnmappedPolicy.parse("map_to:other")).map_label("y") == "other"
    with pytest.raises(ConfigError):
        UnmappedPolicy.parse("ignore")

def test_mapping_targets_must_exist():
    with pytest.raises(ConfigError):
        TaxonomyMapping("s", Taxonomy("t", ("a",)), {"x": "b"})

def test_mapping_file_round_trip(tmp_path):
    mapping = TaxonomyMapping("s", builtin_target_taxonomy(), {"x": "title"}, UnmappedPolicy("map_to", "other"))
    loaded = load_mapping(save_mapping(mapping, tmp_path / "m.json"))
    assert loaded == mapping
    assert json.loads((tmp_path / "m.json").read_text())["target"] == "target"

def test_resolve_mapping_names():
    assert resolve_mapping("heron") is builtin_heron_remap()
    assert resolve_mapping("identity").map_label("table") == "table"
    with pytest.raises(ConfigError):
        resolve_mapping("no-such-mapping")

def test_correspondence_excludes_many_to_one_and_other():
    result = correspondence(builtin_heron_remap(), builtin_taxonomy("heron"))
    matched = dict(result.matched)
    assert matched["Text"] == "paragraph"
    assert "Footnote" not in matched
    assert "Document Index" in result.unmatched_source
    assert "other" in result.unmatched_target

def test_remap_dataset_counts_pairs():
    remapped, report = remap_dataset(synthetic.corpus_a(), resolve_mapping("doclaynet"))
    assert remapped.taxonomy == builtin_target_taxonomy()
    assert report.pairs[("Text", "paragraph")] == 18
    assert report.total_mapped == 27
    assert report.total_dropped == 0
    assert all(a.category in remapped.taxonomy for _, a in remapped.iter_annotations())

def test_identity_mapping_is_identity():
    assert identity_mapping(builtin_target_taxonomy()).is_identity_on_image()
