from typing import List, Sequence, Tuple
from scipy.optimize import linear_sum_assignment
import numpy as np
from ..dataset.model import BBox

Match = Tuple[int, int, float]

def iou(a: BBox, b: BBox) -> float:
    inter = a.intersection_area(b)
    union = a.area + b.area - inter
    return inter / union if union > 0 else 0.0

def _corners(boxes: Sequence[BBox]) -> np.ndarray:
    return np.array([b.to_list() for b in boxes], dtype=float).reshape(-1, 4)

def iou_matrix(boxes_a: Sequence[BBox], boxes_b: Sequence[BBox]) -> np.ndarray:
    """Pairwise IoU, shape (len(boxes_a), len(boxes_b))."""
    a, b = _corners(boxes_a)[:, None, :], _corners(boxes_b)[None, :, :]
    w = np.clip(np.minimum(a[..., 2], b[..., 2]) - np.maximum(a[..., 0], b[..., 0]), 0, None)
    h = np.clip(np.minimum(a[..., 3], b[..., 3]) - np.maximum(a[..., 1], b[..., 1]), 0, None)
    inter = w * h
    area = lambda c: np.clip(c[..., 2] - c[..., 0], 0, None) * np.clip(c[..., 3] - c[..., 1], 0, None)
    union = area(a) + area(b) - inter
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(union > 0, inter / union, 0.0)

def match_detections(pred: Sequence, ref: Sequence, iou_threshold: float = 0.5) -> List[Match]:
    """
    One-to-one matching of same-category pairs with IoU >= iou_threshold.
    Items need `bbox` and `category`. The matching has the largest possible
    number of pairs and, among those, the largest total IoU.

    Returns (pred index, ref index, iou) triples ordered by pred index.
    """
    if not 0 < iou_threshold <= 1:
        raise ValueError(f"iou_threshold must be in (0, 1], got {iou_threshold}")
    if not pred or not ref:
        return []
    ious = iou_matrix([p.bbox for p in pred], [r.bbox for r in ref])
    same = np.array([[p.category == r.category for r in ref] for p in pred])
    feasible = same & (ious >= iou_threshold)
    # any extra pair outweighs the whole IoU total
    bonus = min(len(pred), len(ref)) + 1
    weights = np.where(feasible, bonus + ious, 0.0)
    rows, cols = linear_sum_assignment(weights, maximize=True)
    return [(int(i), int(j), float(ious[i, j])) for i, j in zip(rows, cols) if feasible[i, j]]

def prf(tp: int, n_pred: int, n_ref: int) -> Tuple[float, float, float]:
    if n_pred == 0 and n_ref == 0:
        return 1.0, 1.0, 1.0
    if n_pred == 0 or n_ref == 0:
        return 0.0, 0.0, 0.0
    precision, recall = tp / n_pred, tp / n_ref
    f = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return precision, recall, f

def detection_prf(pred: Sequence, ref: Sequence, iou_threshold: float = 0.5) -> Tuple[float, float, float]:
    """Precision, recall and F1 of `pred` against `ref` under match_detections."""
    matches = match_detections(pred, ref, iou_threshold)
    return prf(len(matches), len(pred), len(ref))

def bbox_overlap_stats(boxes: Sequence[BBox]) -> Tuple[float, float, int]:
    """
    (max IoU, mean IoU, count) over the unordered pairs of `boxes` that overlap
    with positive IoU. All zero when nothing overlaps.
    """
    if len(boxes) < 2:
        return 0.0, 0.0, 0
    ious = iou_matrix(boxes, boxes)
    upper = ious[np.triu_indices(len(boxes), k=1)]
    overlapping = upper[upper > 0]
    if not overlapping.size:
        return 0.0, 0.0, 0
    return float(overlapping.max()), float(overlapping.mean()), int(overlapping.size)
