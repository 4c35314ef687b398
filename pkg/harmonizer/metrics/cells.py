from typing import Dict, Optional, Tuple
from collections import Counter
from .docs import TableGrid
from .text import normalize_text

def _anchored_text(table: TableGrid, dr: int = 0, dc: int = 0) -> Dict[Tuple[int, int], str]:
    return {(c.row + dr, c.col + dc): normalize_text(c.text) for c in table.cells}

def cell_metrics(pred_table: Optional[TableGrid], ref_table: Optional[TableGrid],
                 shift_window: int = 2) -> Tuple[float, float, float]:
    """
    Returns (content_acc, index_acc, shifted_content_acc) over the reference cells.

    content_acc counts reference cells whose normalized text appears in the
    prediction, each predicted cell used once. index_acc requires the text to
    sit at the same (row, col) anchor; shifted_content_acc is the best index_acc
    after moving every predicted anchor by one offset in [-w, w] x [-w, w].
    """
    pred_cells = pred_table.cells if pred_table is not None else ()
    ref_cells = ref_table.cells if ref_table is not None else ()
    if not ref_cells:
        score = 0.0 if pred_cells else 1.0
        return score, score, score

    ref_texts = Counter(normalize_text(c.text) for c in ref_cells)
    pred_texts = Counter(normalize_text(c.text) for c in pred_cells)
    content = sum((ref_texts & pred_texts).values()) / len(ref_cells)

    reference = _anchored_text(ref_table)
    def index_hits(dr: int, dc: int) -> int:
        shifted = _anchored_text(pred_table, dr, dc) if pred_table is not None else {}
        return sum(1 for anchor, text in reference.items() if shifted.get(anchor) == text)

    index = index_hits(0, 0) / len(ref_cells)
    window = range(-shift_window, shift_window + 1)
    shifted = max(index_hits(dr, dc) for dr in window for dc in window) / len(ref_cells)
    return content, index, shifted
