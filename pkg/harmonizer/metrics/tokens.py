from typing import Tuple
from collections import Counter
from .boxes import match_detections
from .docs import StructuredDoc
from .text import ned, tokens

def token_metrics(pred: StructuredDoc, ref: StructuredDoc, iou_threshold: float = 0.5) -> Tuple[float, float, float]:
    """
    Returns (percent_tokens_found, percent_tokens_added, element_alignment) as
    fractions. Tokens are the normalized words of all element text; alignment
    is the mean text similarity of detection-matched element pairs.
    """
    pred_tokens, ref_tokens = Counter(tokens(pred.text)), Counter(tokens(ref.text))
    n_pred, n_ref = sum(pred_tokens.values()), sum(ref_tokens.values())
    common = sum((pred_tokens & ref_tokens).values())

    found = common / n_ref if n_ref else 1.0
    added = (n_pred - common) / n_pred if n_pred else 0.0

    if not pred.elements and not ref.elements:
        return found, added, 1.0
    matches = match_detections(pred.elements, ref.elements, iou_threshold)
    if not matches:
        return found, added, 0.0
    alignment = sum(ned(pred.elements[i].text, ref.elements[j].text) for i, j, _ in matches) / len(matches)
    return found, added, alignment
