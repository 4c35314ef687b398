from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union
from pathlib import Path
from marshmallow import Schema, fields, validate, ValidationError, post_load, EXCLUDE
import numpy as np
import json
from ..taxonomy.taxonomy import TaxonomyMapping
from ..errors import EmbeddingInputError
from ..common import logger

RecordId = Union[int, str]

def _is_id(value) -> bool:
    return isinstance(value, (int, str)) and not isinstance(value, bool)

@dataclass(frozen=True)
class EmbeddingRecord:
    id: RecordId
    page_id: Optional[RecordId]
    label: str
    vector: Tuple[float, ...]
    xy: Optional[Tuple[float, float]] = None

    def to_dict(self) -> Dict[str, object]:
        data = {"id": self.id, "page_id": self.page_id, "label": self.label, "vector": list(self.vector)}
        if self.xy is not None:
            data["x"], data["y"] = self.xy
        return data

def id_sort_key(value: RecordId):
    return (0, value, "") if isinstance(value, int) else (1, 0, str(value))

@dataclass(frozen=True)
class EmbeddingSet:
    """
    Embeddings of one model sharing a dimension D >= 2. Row order is the input
    order and is kept by every derived array.
    """
    records: Tuple[EmbeddingRecord, ...] = field(default_factory=tuple)

    def __post_init__(self):
        records = tuple(self.records)
        object.__setattr__(self, "records", records)
        if not records:
            return
        dim = len(records[0].vector)
        if dim < 2:
            raise EmbeddingInputError(f"Embedding dimension must be >= 2, got {dim}", 1, records[0].id)
        seen = set()
        for row, record in enumerate(records, 1):
            if len(record.vector) != dim:
                raise EmbeddingInputError(
                    f"Dimension {len(record.vector)} differs from {dim}", row, record.id)
            if not np.all(np.isfinite(record.vector)):
                raise EmbeddingInputError("Vector has non-finite values", row, record.id)
            if record.id in seen:
                raise EmbeddingInputError("Duplicate record id", row, record.id)
            seen.add(record.id)

    def __len__(self) -> int:
        return len(self.records)

    @property
    def dim(self) -> int:
        return len(self.records[0].vector) if self.records else 0

    @property
    def matrix(self) -> np.ndarray:
        return np.array([r.vector for r in self.records], dtype=float).reshape(len(self.records), -1)

    @property
    def labels(self) -> np.ndarray:
        return np.array([r.label for r in self.records], dtype=object)

    @property
    def ids(self) -> List[RecordId]:
        return [r.id for r in self.records]

    @property
    def classes(self) -> List[str]:
        return sorted({r.label for r in self.records})

    @property
    def has_xy(self) -> bool:
        return bool(self.records) and all(r.xy is not None for r in self.records)

    def id_ranks(self) -> np.ndarray:
        """Position of every record in ascending id order."""
        order = sorted(range(len(self.records)), key=lambda i: id_sort_key(self.records[i].id))
        ranks = np.empty(len(order), dtype=np.int64)
        ranks[order] = np.arange(len(order))
        return ranks

    def subset(self, indices: Sequence[int]) -> "EmbeddingSet":
        return EmbeddingSet(tuple(self.records[i] for i in indices))

class EmbeddingRowSchema(Schema):
    class Meta:
        unknown = EXCLUDE

    id = fields.Raw(required=True, validate=_is_id)
    page_id = fields.Raw(load_default=None, allow_none=True, validate=_is_id)
    label = fields.Str(required=True, validate=validate.Length(min=1))
    vector = fields.List(fields.Float(allow_nan=False), required=True)
    x = fields.Float(load_default=None, allow_none=True, allow_nan=False)
    y = fields.Float(load_default=None, allow_none=True, allow_nan=False)

    @post_load
    def make_record(self, data, **kwargs):
        xy = (data["x"], data["y"]) if data["x"] is not None and data["y"] is not None else None
        return EmbeddingRecord(data["id"], data["page_id"], data["label"], tuple(data["vector"]), xy)

def load_embeddings(path: Union[str, Path], remap: Optional[TaxonomyMapping] = None) -> EmbeddingSet:
    """
    Reads `{id, page_id, label, vector, x?, y?}` rows from JSONL. With `remap`,
    labels are translated into its target taxonomy and rows the mapping drops
    are skipped.
    """
    schema = EmbeddingRowSchema()
    records: List[EmbeddingRecord] = []
    dim, dropped = None, 0
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as err:
        raise EmbeddingInputError(f"Cannot read {path}: {err.strerror or err}") from err

    for row, line in enumerate(lines, 1):
        if not line.strip():
            continue
        try:
            data = json.loads(line)
        except json.JSONDecodeError as err:
            raise EmbeddingInputError(f"Invalid JSON ({err.msg})", row) from err
        try:
            record = schema.load(data)
        except ValidationError as err:
            record_id = data.get("id") if isinstance(data, dict) else None
            raise EmbeddingInputError(str(err.messages), row, record_id) from err
        if dim is None:
            dim = len(record.vector)
        elif len(record.vector) != dim:
            raise EmbeddingInputError(f"Dimension {len(record.vector)} differs from {dim}", row, record.id)
        if remap is not None:
            label = remap.map_label(record.label)
            if label is None:
                dropped += 1
                continue
            record = EmbeddingRecord(record.id, record.page_id, label, record.vector, record.xy)
        records.append(record)

    if dropped:
        logger.info("Dropped %d embedding(s) unmapped by %s", dropped, remap.name)
    return EmbeddingSet(tuple(records))
