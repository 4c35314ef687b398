"""
Small deterministic corpora used by the test-suite and the README walkthrough.

Corpus A follows the DocLayNet labelling of fragmented text lines; corpus B
annotates the same pages in the target standard with one box per block. The
rule agent turns A into B.
"""
from typing import Dict, List, Tuple, Union
from pathlib import Path
import numpy as np
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
from .dataset import Annotation, BBox, LayoutDataset, PageRecord, save_coco
from .taxonomy import builtin_taxonomy, builtin_target_taxonomy
from .metrics.docs import DocElement, StructuredDoc, TableCell, TableGrid, save_docs
from .common import write_jsonl

PAGE_WIDTH, PAGE_HEIGHT = 800, 1000
LINE_HEIGHT, LINE_GAP, LINES_PER_BLOCK, BLOCK_GAP = 20, 4, 3, 40
PAGES = 3

PathLike = Union[str, Path]

def _text_blocks(top: float) -> List[List[BBox]]:
    blocks, y = [], top
    for _ in range(2):
        lines = []
        for _ in range(LINES_PER_BLOCK):
            lines.append(BBox.from_xywh(60, y, 680, LINE_HEIGHT))
            y += LINE_HEIGHT + LINE_GAP
        blocks.append(lines)
        y += BLOCK_GAP - LINE_GAP
    return blocks

HEADER = BBox.from_xywh(60, 60, 400, 24)
TABLE = BBox.from_xywh(60, 320, 680, 300)
FOOTER = BBox.from_xywh(60, 950, 200, 20)

def image_name(page: int) -> str:
    return f"page_{page}.png"

def corpus_a(pages: int = PAGES) -> LayoutDataset:
    """DocLayNet labels, one box per text line."""
    records, next_id = [], 1
    for page in range(1, pages + 1):
        anns = [Annotation(next_id, HEADER, "Section-header")]
        next_id += 1
        for block in _text_blocks(100):
            for line in block:
                anns.append(Annotation(next_id, line, "Text"))
                next_id += 1
        anns += [Annotation(next_id, TABLE, "Table"), Annotation(next_id + 1, FOOTER, "Page-footer")]
        next_id += 2
        records.append(PageRecord(page, PAGE_WIDTH, PAGE_HEIGHT, image_name(page), anns))
    return LayoutDataset("corpus_a", builtin_taxonomy("doclaynet"), records)

def corpus_b(pages: int = PAGES) -> LayoutDataset:
    """Target labels, one box per block."""
    records, next_id = [], 1
    for page in range(1, pages + 1):
        anns = [Annotation(next_id, HEADER, "subheading")]
        next_id += 1
        for block in _text_blocks(100):
            anns.append(Annotation(next_id, BBox.union(block), "paragraph"))
            next_id += 1
        anns += [Annotation(next_id, TABLE, "table"), Annotation(next_id + 1, FOOTER, "page_footer")]
        next_id += 2
        records.append(PageRecord(page, PAGE_WIDTH, PAGE_HEIGHT, image_name(page), anns))
    return LayoutDataset("corpus_b", builtin_target_taxonomy(), records)

def write_page_images(directory: PathLike, pages: int = PAGES) -> List[Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for page in range(1, pages + 1):
        canvas = np.ones((PAGE_HEIGHT // 10, PAGE_WIDTH // 10))
        canvas[10:27, 6:74] = 0.2
        path = directory / image_name(page)
        plt.imsave(path, canvas, cmap="gray", vmin=0.0, vmax=1.0)
        written.append(path)
    return written

def sample_table(shift: int = 0, missing: Tuple[Tuple[int, int], ...] = ()) -> TableGrid:
    """A 3x3 grid with a spanning header; `shift` moves every cell right."""
    cells = [TableCell(0, 0 + shift, 1, 3, "Revenue by year")]
    for row, (label, first, second) in enumerate((("2022", "10", "12"), ("2023", "14", "17")), 1):
        for col, text in enumerate((label, first, second)):
            if (row, col) not in missing:
                cells.append(TableCell(row, col + shift, 1, 1, text))
    return TableGrid(3, 3 + shift, tuple(cells))

def reference_docs() -> List[StructuredDoc]:
    return [
        StructuredDoc(1, (
            DocElement("subheading", HEADER, "Results"),
            DocElement("paragraph", BBox.from_xywh(60, 100, 680, 68), "Revenue grew in both years."),
            DocElement("table", TABLE, "", sample_table()),
            DocElement("page_footer", FOOTER, "Page 1"),
        )),
        StructuredDoc(2, (
            DocElement("paragraph", BBox.from_xywh(60, 100, 680, 68), "The outlook is stable."),
        )),
    ]

def predicted_docs() -> List[StructuredDoc]:
    """Reference docs with a misread word, a missing footer and one dropped cell."""
    return [
        StructuredDoc(1, (
            DocElement("subheading", HEADER, "Results"),
            DocElement("paragraph", BBox.from_xywh(60, 102, 680, 66), "Revenue grew in both yeers."),
            DocElement("table", TABLE, "", sample_table(missing=((2, 2),))),
        )),
        StructuredDoc(2, (
            DocElement("paragraph", BBox.from_xywh(60, 100, 680, 68), "The outlook is stable."),
        )),
    ]

EMBEDDING_CLASSES = ("paragraph", "list_item", "title", "subheading", "table")

def embedding_rows(per_class: int = 10, dim: int = 8, seed: int = 7) -> List[Dict[str, object]]:
    """Well separated Gaussian clusters, one per class."""
    rng = np.random.default_rng(seed)
    centers = rng.normal(0.0, 10.0, size=(len(EMBEDDING_CLASSES), dim))
    rows, next_id = [], 1
    for label, center in zip(EMBEDDING_CLASSES, centers):
        for _ in range(per_class):
            vector = center + rng.normal(0.0, 0.5, size=dim)
            rows.append({
                "id": next_id, "page_id": next_id % 5,
                "label": label, "vector": [round(float(v), 6) for v in vector],
            })
            next_id += 1
    return rows

def write_fixture(directory: PathLike) -> Dict[str, Path]:
    """Writes both corpora, page images, structured docs and embeddings under `directory`."""
    directory = Path(directory)
    write_page_images(directory)
    return {
        "corpus_a": save_coco(corpus_a(), directory / "corpus_a.json"),
        "corpus_b": save_coco(corpus_b(), directory / "corpus_b.json"),
        "pred": save_docs(predicted_docs(), directory / "pred.jsonl"),
        "ref": save_docs(reference_docs(), directory / "ref.jsonl"),
        "embeddings": write_jsonl(embedding_rows(), directory / "embeddings.jsonl"),
    }
