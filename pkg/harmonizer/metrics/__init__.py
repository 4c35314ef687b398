from .docs import StructuredDoc, DocElement, TableGrid, TableCell, EMPTY_GRID, load_docs, save_docs
from .boxes import iou, iou_matrix, match_detections, detection_prf, bbox_overlap_stats
from .text import normalize_text, ned, adjusted_ned
from .teds import teds, page_teds, table_tree, page_tree
from .cells import cell_metrics
from .tokens import token_metrics
from .evaluate import MetricsReport, PageMetrics, evaluate_docs, evaluate_pages, aggregate, per_page_frame
