import numpy as np
import pytest
from harmonizer.dataset import BBox
from harmonizer.dataset.model import Annotation, PageRecord
from harmonizer.engine import (
    GroupDirective, HarmonizationPlan, apply_plan, builtin_rules, identity_plan, validate_plan,
)
from harmonizer.errors import PlanContractError

RULES = builtin_rules()

def make_page(n: int = 4) -> PageRecord:
    anns = [Annotation(10 + i, BBox.from_xywh(10, 10 + 30 * i, 100, 20), "paragraph") for i in range(n)]
    return PageRecord(1, 200, 400, "p.png", anns)

def kinds(violations):
    return sorted(v.kind for v in violations)

def test_identity_plan_is_valid():
    page = make_page()
    plan = identity_plan(page)
    assert validate_plan(page, plan, RULES) == []
    assert apply_plan(page, plan, RULES).annotations == page.annotations

def test_merge_takes_union_and_smallest_id():
    page = make_page()
    plan = HarmonizationPlan((GroupDirective((12, 11, 10), "paragraph"), GroupDirective((13,), "title")))
    result = apply_plan(page, plan, RULES)
    assert [a.id for a in result.annotations] == [10, 13]
    assert result.annotations[0].bbox == BBox(10, 10, 110, 90)
    assert result.annotations[1].category == "title"
    assert result.provenance_dict() == {"10": [10, 11, 12], "13": [13]}

@pytest.mark.parametrize("directives, expected", [
    (((10, 11), (11, 12, 13)), ["disjointness"]),
    (((10, 11), (12,)), ["coverage"]),
    (((10, 11, 12, 13, 99),), ["unknown-id"]),
    (((10, 11, 12, 13), ()), ["empty-group"]),
])
def test_conservation_violations(directives, expected):
    page = make_page()
    plan = HarmonizationPlan(tuple(GroupDirective(ids, "paragraph") for ids in directives))
    assert kinds(validate_plan(page, plan, RULES)) == expected
    with pytest.raises(PlanContractError):
        apply_plan(page, plan, RULES)

def test_repeated_id_inside_group():
    page = make_page(2)
    plan = HarmonizationPlan((GroupDirective((10, 10, 11), "paragraph"),))
    assert kinds(validate_plan(page, plan, RULES)) == ["disjointness"]

def test_unknown_target_category():
    page = make_page(1)
    plan = HarmonizationPlan((GroupDirective((10,), "Text"),))
    assert kinds(validate_plan(page, plan, RULES)) == ["unknown-category"]

@pytest.mark.parametrize("override, expected", [
    (BBox(0, 0, 500, 50), "override-outside-page"),
    (BBox(150, 300, 190, 390), "override-detached"),
    (BBox(50, 50, 50, 60), "override-degenerate"),
    (BBox(5, 5, float("nan"), 40), "override-degenerate"),
])
def test_bbox_override_checks(override, expected):
    page = make_page(1)
    plan = HarmonizationPlan((GroupDirective((10,), "paragraph", override),))
    assert kinds(validate_plan(page, plan, RULES)) == [expected]

def test_valid_override_replaces_union():
    page = make_page(2)
    override = BBox(8, 8, 112, 62)
    plan = HarmonizationPlan((GroupDirective((10, 11), "paragraph", override),))
    assert apply_plan(page, plan, RULES).annotations[0].bbox == override

def test_random_partitions_conserve_every_source():
    rng = np.random.default_rng(3)
    for _ in range(50):
        n = int(rng.integers(1, 12))
        page = make_page(n)
        labels = rng.integers(0, n, size=n)
        groups = {}
        for ann, label in zip(page.annotations, labels):
            groups.setdefault(int(label), []).append(ann.id)
        plan = HarmonizationPlan(tuple(GroupDirective(tuple(ids), "paragraph") for ids in groups.values()))
        result = apply_plan(page, plan, RULES)
        covered = sorted(i for ids in result.provenance.values() for i in ids)
        assert covered == page.annotation_ids
        assert len(result.annotations) == len(groups)
        for ann in result.annotations:
            assert ann.id == min(result.provenance[ann.id])

def test_canonical_orders_by_smallest_id():
    plan = HarmonizationPlan((GroupDirective((13, 12), "title"), GroupDirective((11, 10), "paragraph")))
    assert [d.ids for d in plan.canonical().directives] == [(10, 11), (12, 13)]

CORRUPTIONS = {
    "drop": "coverage",
    "duplicate": "disjointness",
    "invent": "unknown-id",
    "detach": "override-detached",
}

def random_page(rng) -> PageRecord:
    n = int(rng.integers(1, 16))
    ids = sorted(int(i) for i in rng.choice(np.arange(1, 500), size=n, replace=False))
    anns = []
    for ann_id in ids:
        # boxes stay in the left half so the right half is free for detached overrides
        x, y = rng.uniform(0, 400), rng.uniform(0, 900)
        w, h = rng.uniform(5, 100), rng.uniform(5, 100)
        anns.append(Annotation(ann_id, BBox.from_xywh(x, y, w, h), "paragraph"))
    return PageRecord(int(rng.integers(1, 10_000)), 1000, 1000, None, anns)

def random_groups(rng, page: PageRecord):
    ids = list(page.annotation_ids)
    rng.shuffle(ids)
    labels = rng.integers(0, len(ids), size=len(ids))
    groups = {}
    for ann_id, label in zip(ids, labels):
        groups.setdefault(int(label), []).append(ann_id)
    return list(groups.values())

def random_plan(rng, page: PageRecord, groups) -> HarmonizationPlan:
    targets = RULES.target_taxonomy.names
    sources = page.by_id()
    directives = []
    for ids in groups:
        override = None
        if rng.random() < 0.2:
            override = BBox.union(sources[i].bbox for i in ids if i in sources)
        directives.append(GroupDirective(tuple(ids), targets[int(rng.integers(len(targets)))], override))
    return HarmonizationPlan(tuple(directives))

def corrupt(rng, kind: str, groups):
    groups = [list(ids) for ids in groups]
    if kind == "drop":
        victim = groups[int(rng.integers(len(groups)))]
        victim.pop(int(rng.integers(len(victim))))
        groups = [ids for ids in groups if ids]
    elif kind == "duplicate":
        source = groups[int(rng.integers(len(groups)))]
        copied = source[int(rng.integers(len(source)))]
        others = [ids for ids in groups if ids is not source]
        if others:
            others[int(rng.integers(len(others)))].append(copied)
        else:
            groups.append([copied])
    elif kind == "invent":
        groups[int(rng.integers(len(groups)))].append(10_000 + int(rng.integers(1000)))
    return groups

def test_conservation_fuzz_accepts_partitions_and_rejects_corruptions():
    rng = np.random.default_rng(2024)
    detached = BBox(600, 600, 700, 700)
    for _ in range(1000):
        page = random_page(rng)
        groups = random_groups(rng, page)

        plan = random_plan(rng, page, groups)
        assert validate_plan(page, plan, RULES) == []
        result = apply_plan(page, plan, RULES)
        covered = [i for ids in result.provenance.values() for i in ids]
        assert sorted(covered) == page.annotation_ids
        assert len(result.annotations) == len(groups)
        for ann in result.annotations:
            assert ann.id == min(result.provenance[ann.id])

        kind = list(CORRUPTIONS)[int(rng.integers(len(CORRUPTIONS)))]
        bad = random_plan(rng, page, corrupt(rng, kind, groups))
        if kind == "detach":
            first = bad.directives[0]
            bad = HarmonizationPlan(
                (GroupDirective(first.ids, first.target_category, detached),) + bad.directives[1:]
            )
        violations = validate_plan(page, bad, RULES)
        assert CORRUPTIONS[kind] in kinds(violations)
        with pytest.raises(PlanContractError):
            apply_plan(page, bad, RULES)
