from dataclasses import dataclass, field, fields as dataclass_fields
from typing import Dict, List, Optional, Sequence, Tuple
from concurrent.futures import ThreadPoolExecutor
from scipy.optimize import linear_sum_assignment
from tqdm import tqdm
import numpy as np
import pandas as pd
from .boxes import bbox_overlap_stats, detection_prf, iou_matrix
from .cells import cell_metrics
from .docs import DocElement, PageId, StructuredDoc, EMPTY_GRID
from .teds import page_teds, teds
from .text import adjusted_ned, ned
from .tokens import token_metrics
from ..errors import ConfigError, EvaluationInputError
from ..common import logger

@dataclass(frozen=True)
class MetricsReport:
    adjusted_NED: float
    NED: float
    detection_f: float
    detection_precision: float
    detection_recall: float
    page_teds_corrected: float
    table_teds: float
    table_teds_corrected: float
    cell_level_content_acc: float
    cell_level_index_acc: float
    shifted_cell_content_acc: float
    element_alignment: float
    percent_tokens_found: float
    percent_tokens_added: float
    bbox_max_iou: float
    bbox_mean_iou: float
    bbox_num_overlapping_pairs: float

    def to_dict(self) -> Dict[str, float]:
        return {f.name: getattr(self, f.name) for f in dataclass_fields(self)}

PAGE_FIELDS = [
    "adjusted_NED", "NED", "detection_f", "detection_precision", "detection_recall",
    "page_teds_corrected", "element_alignment", "percent_tokens_found", "percent_tokens_added",
    "bbox_max_iou", "bbox_mean_iou", "bbox_num_overlapping_pairs",
]
TABLE_FIELDS = [
    "table_teds", "table_teds_corrected", "cell_level_content_acc",
    "cell_level_index_acc", "shifted_cell_content_acc",
]

@dataclass
class PageMetrics:
    page_id: PageId
    values: Dict[str, float]
    tables: List[Dict[str, float]] = field(default_factory=list)
    pred_tables: int = 0

    def to_row(self) -> Dict[str, object]:
        row: Dict[str, object] = {"page_id": self.page_id}
        row.update(self.values)
        for name in TABLE_FIELDS:
            row[name] = float(np.mean([t[name] for t in self.tables])) if self.tables else None
        row["ref_tables"] = len(self.tables)
        row["pred_tables"] = self.pred_tables
        return row

def pair_tables(pred: Sequence[DocElement], ref: Sequence[DocElement]) -> List[Tuple[Optional[int], int]]:
    """Pairs every reference table with at most one overlapping predicted table."""
    if not ref:
        return []
    paired: Dict[int, int] = {}
    if pred:
        ious = iou_matrix([p.bbox for p in pred], [r.bbox for r in ref])
        for i, j in zip(*linear_sum_assignment(ious, maximize=True)):
            if ious[i, j] > 0:
                paired[int(j)] = int(i)
    return [(paired.get(j), j) for j in range(len(ref))]

def score_tables(pred: StructuredDoc, ref: StructuredDoc, shift_window: int) -> List[Dict[str, float]]:
    pred_tables, ref_tables = pred.tables, ref.tables
    scores = []
    for i, j in pair_tables(pred_tables, ref_tables):
        pred_grid = pred_tables[i].table if i is not None else EMPTY_GRID
        ref_grid = ref_tables[j].table
        content, index, shifted = cell_metrics(pred_grid, ref_grid, shift_window)
        scores.append({
            "table_teds": teds(pred_grid, ref_grid),
            "table_teds_corrected": teds(pred_grid, ref_grid, corrected=True),
            "cell_level_content_acc": content,
            "cell_level_index_acc": index,
            "shifted_cell_content_acc": shifted,
        })
    return scores

def score_page(pred: StructuredDoc, ref: StructuredDoc, iou_threshold: float = 0.5,
               shift_window: int = 2) -> PageMetrics:
    precision, recall, f = detection_prf(pred.elements, ref.elements, iou_threshold)
    found, added, alignment = token_metrics(pred, ref, iou_threshold)
    max_iou, mean_iou, overlapping = bbox_overlap_stats([e.bbox for e in pred.elements])
    values = {
        "adjusted_NED": adjusted_ned(pred.text, ref.text),
        "NED": ned(pred.text, ref.text),
        "detection_f": f,
        "detection_precision": precision,
        "detection_recall": recall,
        "page_teds_corrected": page_teds(pred, ref, corrected=True),
        "element_alignment": alignment,
        "percent_tokens_found": found,
        "percent_tokens_added": added,
        "bbox_max_iou": max_iou,
        "bbox_mean_iou": mean_iou,
        "bbox_num_overlapping_pairs": float(overlapping),
    }
    return PageMetrics(ref.page_id, values, score_tables(pred, ref, shift_window), len(pred.tables))

def _index(docs: Sequence[StructuredDoc], side: str) -> Dict[PageId, StructuredDoc]:
    index: Dict[PageId, StructuredDoc] = {}
    for doc in docs:
        if doc.page_id in index:
            raise EvaluationInputError(f"Duplicate page id {doc.page_id!r} in {side} documents")
        index[doc.page_id] = doc
    return index

def evaluate_pages(pred: Sequence[StructuredDoc], ref: Sequence[StructuredDoc], *,
                   iou_threshold: float = 0.5, shift_window: int = 2, workers: int = 1,
                   progress: bool = False) -> List[PageMetrics]:
    """
    Scores every page. Documents are paired by page id; a page present on one
    side only is scored against an empty document. Rows follow the reference
    order, then pages found only in the prediction.
    """
    if not 0 < iou_threshold <= 1:
        raise ConfigError(f"iou_threshold must be in (0, 1], got {iou_threshold}")
    if shift_window < 0:
        raise ConfigError("shift_window must be >= 0")
    if workers < 1:
        raise ConfigError("workers must be >= 1")
    pred_index, ref_index = _index(pred, "predicted"), _index(ref, "reference")
    page_ids = list(ref_index) + [pid for pid in pred_index if pid not in ref_index]
    missing = [pid for pid in ref_index if pid not in pred_index]
    if missing:
        logger.warning("%d reference page(s) have no prediction and score as empty", len(missing))

    pairs = [
        (pred_index.get(pid, StructuredDoc(pid)), ref_index.get(pid, StructuredDoc(pid)))
        for pid in page_ids
    ]
    run = lambda pair: score_page(pair[0], pair[1], iou_threshold, shift_window)
    with tqdm(total=len(pairs), disable=not progress, desc="Evaluating") as bar:
        if workers == 1:
            results = []
            for pair in pairs:
                results.append(run(pair))
                bar.update(1)
            return results
        with ThreadPoolExecutor(max_workers=workers) as executor:
            results = []
            for result in executor.map(run, pairs):
                results.append(result)
                bar.update(1)
            return results

def aggregate(pages: Sequence[PageMetrics]) -> MetricsReport:
    """Macro-average over pages; table metrics average over all reference tables."""
    if not pages:
        raise EvaluationInputError("No pages to evaluate")
    frame = pd.DataFrame([p.values for p in pages], columns=PAGE_FIELDS)
    values = {name: float(frame[name].mean()) for name in PAGE_FIELDS}

    tables = pd.DataFrame([t for p in pages for t in p.tables], columns=TABLE_FIELDS)
    if len(tables):
        values.update({name: float(tables[name].mean()) for name in TABLE_FIELDS})
    else:
        score = 0.0 if any(p.pred_tables for p in pages) else 1.0
        values.update({name: score for name in TABLE_FIELDS})
    return MetricsReport(**values)

def evaluate_docs(pred: Sequence[StructuredDoc], ref: Sequence[StructuredDoc], *,
                  iou_threshold: float = 0.5, shift_window: int = 2, workers: int = 1) -> MetricsReport:
    return aggregate(evaluate_pages(pred, ref, iou_threshold=iou_threshold,
                                    shift_window=shift_window, workers=workers))

def per_page_frame(pages: Sequence[PageMetrics]) -> pd.DataFrame:
    columns = ["page_id"] + PAGE_FIELDS + TABLE_FIELDS + ["ref_tables", "pred_tables"]
    return pd.DataFrame([p.to_row() for p in pages], columns=columns)
