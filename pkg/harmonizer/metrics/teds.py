from typing import Callable, Optional, Tuple
from apted import APTED, Config
from apted.helpers import Tree
from .docs import StructuredDoc, TableGrid
from .text import adjusted_ned, ned

class LayoutTree(Tree):
    """
    Ordered tree node. `kind` is one of table, row, cell, page or element;
    cells carry their span and text, elements their category and text.
    """
    def __init__(self, kind: str, *children, label: Optional[str] = None,
                 span: Optional[Tuple[int, int]] = None, text: str = ""):
        self.name = kind
        self.kind = kind
        self.label = label
        self.span = span
        self.text = text
        self.children = list(children)

    def size(self) -> int:
        return 1 + sum(child.size() for child in self.children)

    def bracket(self) -> str:
        return "{%s%s}" % (self.kind, "".join(child.bracket() for child in self.children))

class LayoutConfig(Config):
    def __init__(self, similarity: Callable[[str, str], float]):
        self.similarity = similarity

    def rename(self, node1: LayoutTree, node2: LayoutTree) -> float:
        if node1.kind != node2.kind:
            return 1.0
        if node1.kind == "cell":
            if node1.span != node2.span:
                return 1.0
            return 1.0 - self.similarity(node1.text, node2.text)
        if node1.kind == "element":
            if node1.label != node2.label:
                return 1.0
            return 1.0 - self.similarity(node1.text, node2.text)
        return 0.0

    def children(self, node: LayoutTree):
        return node.children

def table_rows(table: TableGrid):
    return [
        LayoutTree("row", *[LayoutTree("cell", span=c.span, text=c.text) for c in table.row_cells(row)])
        for row in range(table.n_rows)
    ]

def table_tree(table: Optional[TableGrid]) -> LayoutTree:
    """root -> one row node per grid row -> the cells anchored in that row."""
    return LayoutTree("table", *(table_rows(table) if table is not None else []))

def page_tree(doc: Optional[StructuredDoc]) -> LayoutTree:
    """root -> element nodes in reading order; tables keep their row subtrees."""
    elements = []
    for element in (doc.elements if doc is not None else ()):
        rows = table_rows(element.table) if element.table is not None else []
        elements.append(LayoutTree("element", *rows, label=element.category, text=element.text))
    return LayoutTree("page", *elements)

def tree_similarity(pred: LayoutTree, ref: LayoutTree, corrected: bool = False) -> float:
    config = LayoutConfig(adjusted_ned if corrected else ned)
    distance = APTED(pred, ref, config).compute_edit_distance()
    return max(0.0, 1.0 - distance / max(pred.size(), ref.size()))

def teds(pred_table: Optional[TableGrid], ref_table: Optional[TableGrid], corrected: bool = False) -> float:
    """
    Tree-edit-distance similarity of two table grids with unit insert and
    delete costs. Renaming a cell costs 1 when spans differ, otherwise one
    minus the text similarity; `corrected` normalizes cell text first.
    """
    return tree_similarity(table_tree(pred_table), table_tree(ref_table), corrected)

def page_teds(pred_doc: Optional[StructuredDoc], ref_doc: Optional[StructuredDoc], corrected: bool = True) -> float:
    return tree_similarity(page_tree(pred_doc), page_tree(ref_doc), corrected)
