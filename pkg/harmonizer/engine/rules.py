from dataclasses import dataclass, field
from typing import Dict, Mapping, Union
from pathlib import Path
from functools import lru_cache
from marshmallow import Schema, fields, validate, ValidationError, post_load, validates_schema, EXCLUDE
from ..taxonomy.taxonomy import Taxonomy
from ..taxonomy.builtin import TargetField
from ..common import get_path, write_json
from ..errors import ConfigError
import json

MAX_MERGE_GAP_FRACTION = 0.25

@dataclass(frozen=True)
class Convention:
    description: str
    mergeable: bool = False
    merge_gap_fraction: float = 0.0
    clip_to_page: bool = True

@dataclass(frozen=True)
class RuleSet:
    """The target annotation standard: a taxonomy plus one convention per category."""
    target_taxonomy: Taxonomy
    conventions: Mapping[str, Convention] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "conventions", dict(self.conventions))
        missing = [c for c in self.target_taxonomy if c not in self.conventions]
        extra = [c for c in self.conventions if c not in self.target_taxonomy]
        if missing or extra:
            raise ConfigError(
                "RuleSet needs exactly one convention per target category"
                + (f"; missing: {', '.join(missing)}" if missing else "")
                + (f"; unknown: {', '.join(extra)}" if extra else "")
            )
        for name, convention in self.conventions.items():
            if not 0.0 <= convention.merge_gap_fraction <= MAX_MERGE_GAP_FRACTION:
                raise ConfigError(
                    f"merge_gap_fraction for '{name}' must lie in [0, {MAX_MERGE_GAP_FRACTION}]"
                )

    def convention(self, category: str) -> Convention:
        return self.conventions[category]

    def __contains__(self, category: object) -> bool:
        return category in self.target_taxonomy

class ConventionSchema(Schema):
    class Meta:
        unknown = EXCLUDE

    description = fields.Str(required=True)
    mergeable = fields.Bool(load_default=False)
    merge_gap_fraction = fields.Float(
        load_default=0.0, validate=validate.Range(min=0.0, max=MAX_MERGE_GAP_FRACTION)
    )
    clip_to_page = fields.Bool(load_default=True)

    @post_load
    def make_convention(self, data, **kwargs):
        return Convention(**data)

class RuleSetSchema(Schema):
    class Meta:
        unknown = EXCLUDE

    target_taxonomy = TargetField(required=True)
    conventions = fields.Dict(keys=fields.Str(), values=fields.Nested(ConventionSchema), required=True)

    @validates_schema
    def check_coverage(self, data, **kwargs):
        taxonomy = data.get("target_taxonomy")
        conventions = data.get("conventions", {})
        if taxonomy is not None and set(conventions) != set(taxonomy):
            raise ValidationError("conventions must name every target category exactly once")

    @post_load
    def make_rules(self, data, **kwargs):
        return RuleSet(data["target_taxonomy"], data["conventions"])

def rules_from_dict(data: Dict) -> RuleSet:
    try:
        return RuleSetSchema().load(data)
    except ValidationError as err:
        raise ConfigError(f"Invalid rule set: {err.messages}") from err

def load_rules(path: Union[str, Path]) -> RuleSet:
    try:
        with open(path, "r", encoding="utf-8") as data:
            return rules_from_dict(json.load(data))
    except json.JSONDecodeError as err:
        raise ConfigError(f"Malformed JSON in {path}: {err}") from err

def save_rules(rules: RuleSet, path: Union[str, Path]) -> Path:
    return write_json(RuleSetSchema().dump(rules), path)

@lru_cache(maxsize=None)
def builtin_rules() -> RuleSet:
    return load_rules(get_path("../data/target_rules.json", __file__))

def resolve_rules(spec: str = "builtin") -> RuleSet:
    if spec in ("builtin", "", None):
        return builtin_rules()
    if not Path(spec).is_file():
        raise ConfigError(f"Rules file not found: {spec}")
    return load_rules(spec)
