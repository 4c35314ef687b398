from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Tuple, Union
from pathlib import Path
from marshmallow import Schema, fields, validate, validates_schema, ValidationError, post_load, EXCLUDE
from ..dataset.model import BBox
from ..errors import EvaluationInputError
from ..common import write_jsonl, to_json_number
import json

PageId = Union[int, str]

@dataclass(frozen=True)
class TableCell:
    row: int
    col: int
    row_span: int = 1
    col_span: int = 1
    text: str = ""

    @property
    def span(self) -> Tuple[int, int]:
        return (self.row_span, self.col_span)

    def to_dict(self) -> Dict[str, object]:
        return {"row": self.row, "col": self.col, "row_span": self.row_span,
                "col_span": self.col_span, "text": self.text}

@dataclass(frozen=True)
class TableGrid:
    n_rows: int
    n_cols: int
    cells: Tuple[TableCell, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "cells", tuple(sorted(self.cells, key=lambda c: (c.row, c.col))))

    @property
    def is_empty(self) -> bool:
        return not self.cells

    def by_anchor(self) -> Dict[Tuple[int, int], TableCell]:
        return {(c.row, c.col): c for c in self.cells}

    def row_cells(self, row: int) -> List[TableCell]:
        return [c for c in self.cells if c.row == row]

    def to_dict(self) -> Dict[str, object]:
        return {"n_rows": self.n_rows, "n_cols": self.n_cols, "cells": [c.to_dict() for c in self.cells]}

EMPTY_GRID = TableGrid(0, 0)

@dataclass(frozen=True)
class DocElement:
    category: str
    bbox: BBox
    text: str = ""
    table: Optional[TableGrid] = None

    def to_dict(self) -> Dict[str, object]:
        data = {
            "category": self.category,
            "bbox": [to_json_number(v) for v in self.bbox.to_list()],
            "text": self.text,
        }
        if self.table is not None:
            data["table"] = self.table.to_dict()
        return data

@dataclass(frozen=True)
class StructuredDoc:
    """One page of extracted content, elements in reading order."""
    page_id: PageId
    elements: Tuple[DocElement, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))

    @property
    def text(self) -> str:
        return " ".join(e.text for e in self.elements if e.text)

    @property
    def tables(self) -> List[DocElement]:
        return [e for e in self.elements if e.table is not None]

    def to_dict(self) -> Dict[str, object]:
        return {"page_id": self.page_id, "elements": [e.to_dict() for e in self.elements]}

class TableCellSchema(Schema):
    row = fields.Int(required=True, validate=validate.Range(min=0))
    col = fields.Int(required=True, validate=validate.Range(min=0))
    row_span = fields.Int(load_default=1, validate=validate.Range(min=1))
    col_span = fields.Int(load_default=1, validate=validate.Range(min=1))
    text = fields.Str(load_default="")

    @post_load
    def make_cell(self, data, **kwargs):
        return TableCell(**data)

class TableGridSchema(Schema):
    n_rows = fields.Int(required=True, validate=validate.Range(min=0))
    n_cols = fields.Int(required=True, validate=validate.Range(min=0))
    cells = fields.List(fields.Nested(TableCellSchema), load_default=list)

    @validates_schema(skip_on_field_errors=True)
    def check_cells(self, data, **kwargs):
        seen = set()
        for cell in data["cells"]:
            anchor = (cell.row, cell.col)
            if anchor in seen:
                raise ValidationError(f"Duplicate cell anchor {anchor}", "cells")
            seen.add(anchor)
            if cell.row + cell.row_span > data["n_rows"] or cell.col + cell.col_span > data["n_cols"]:
                raise ValidationError(
                    f"Cell {anchor} with span {cell.span} leaves the {data['n_rows']}x{data['n_cols']} grid",
                    "cells"
                )

    @post_load
    def make_grid(self, data, **kwargs):
        return TableGrid(data["n_rows"], data["n_cols"], tuple(data["cells"]))

class DocElementSchema(Schema):
    class Meta:
        unknown = EXCLUDE

    category = fields.Str(required=True)
    bbox = fields.List(fields.Float(allow_nan=False), required=True, validate=validate.Length(equal=4))
    text = fields.Str(load_default="", allow_none=True)
    table = fields.Nested(TableGridSchema, load_default=None, allow_none=True)

    @post_load
    def make_element(self, data, **kwargs):
        return DocElement(data["category"], BBox.from_list(data["bbox"]), data["text"] or "", data["table"])

class StructuredDocSchema(Schema):
    class Meta:
        unknown = EXCLUDE

    page_id = fields.Raw(
        required=True,
        validate=lambda v: isinstance(v, (int, str)) and not isinstance(v, bool)
    )
    elements = fields.List(fields.Nested(DocElementSchema), load_default=list)

    @post_load
    def make_doc(self, data, **kwargs):
        return StructuredDoc(data["page_id"], tuple(data["elements"]))

def load_docs(path: Union[str, Path]) -> List[StructuredDoc]:
    """Reads a JSONL file holding one structured page per line."""
    schema = StructuredDocSchema()
    docs = []
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as err:
        raise EvaluationInputError(f"Cannot read {path}: {err.strerror or err}") from err
    for lineno, line in enumerate(lines, 1):
        if not line.strip():
            continue
        try:
            docs.append(schema.load(json.loads(line)))
        except json.JSONDecodeError as err:
            raise EvaluationInputError(f"{path}:{lineno}: invalid JSON ({err.msg})") from err
        except ValidationError as err:
            raise EvaluationInputError(f"{path}:{lineno}: {err.messages}") from err
    return docs

def save_docs(docs: Iterable[StructuredDoc], path: Union[str, Path]) -> Path:
    return write_jsonl((doc.to_dict() for doc in docs), path)
