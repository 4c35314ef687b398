from typing import Dict, Union
from pathlib import Path
from functools import lru_cache
from marshmallow import Schema, fields, ValidationError, validates, post_load, EXCLUDE
from .taxonomy import Taxonomy, TaxonomyMapping, UnmappedPolicy, identity_mapping
from ..common import get_path, logger, write_json
from ..errors import ConfigError
import json

DATA_DIR = get_path("../data", __file__)

BUILTIN_TAXONOMIES = ("target", "heron", "unstructured", "doclaynet")
"""Taxonomy names shipped as ordered name arrays under `taxonomy/data/`."""

BUILTIN_MAPPINGS = {
    "heron": "heron_to_target.json",
    "unstructured": "unstructured_to_target.json",
    "doclaynet": "doclaynet_to_target.json",
}

def _read_json(path: Union[str, Path]):
    try:
        with open(path, "r", encoding="utf-8") as data:
            return json.load(data)
    except json.JSONDecodeError as err:
        raise ConfigError(f"Malformed JSON in {path}: {err}") from err

@lru_cache(maxsize=None)
def builtin_taxonomy(name: str) -> Taxonomy:
    if name not in BUILTIN_TAXONOMIES:
        raise ConfigError(f"Unknown builtin taxonomy '{name}'. Known: {', '.join(BUILTIN_TAXONOMIES)}")
    return Taxonomy(name, tuple(_read_json(Path(DATA_DIR) / f"{name}.json")))

def builtin_target_taxonomy() -> Taxonomy:
    return builtin_taxonomy("target")

class TargetField(fields.Field):
    """A builtin taxonomy name, or an inline ordered list of names."""
    def _deserialize(self, value, attr, data, **kwargs):
        if isinstance(value, str):
            try:
                return builtin_taxonomy(value)
            except ConfigError as err:
                raise ValidationError(str(err)) from err
        if isinstance(value, list) and all(isinstance(v, str) for v in value):
            try:
                return Taxonomy(data.get("target_name", "custom"), tuple(value))
            except ConfigError as err:
                raise ValidationError(str(err)) from err
        raise ValidationError("Expected a taxonomy name or an array of category names")

    def _serialize(self, value, attr, obj, **kwargs):
        if value is None:
            return None
        if value.name in BUILTIN_TAXONOMIES and value == builtin_taxonomy(value.name):
            return value.name
        return list(value.names)

class PolicyField(fields.Field):
    def _deserialize(self, value, attr, data, **kwargs):
        try:
            return UnmappedPolicy.parse(value)
        except ConfigError as err:
            raise ValidationError(str(err)) from err

    def _serialize(self, value, attr, obj, **kwargs):
        return None if value is None else str(value)

class TaxonomyMappingSchema(Schema):
    class Meta:
        unknown = EXCLUDE

    source = fields.Str(required=True)
    target = TargetField(required=True)
    target_name = fields.Str(load_only=True)
    entries = fields.Dict(keys=fields.Str(), values=fields.Str(), required=True)
    unmapped_policy = PolicyField(load_default=UnmappedPolicy())

    @validates("source")
    def validate_source(self, value, **kwargs):
        if not value:
            raise ValidationError("source must be non-empty")

    @post_load
    def make_mapping(self, data, **kwargs):
        try:
            return TaxonomyMapping(
                source=data["source"], target=data["target"],
                entries=data["entries"], unmapped_policy=data["unmapped_policy"]
            )
        except ConfigError as err:
            raise ValidationError(str(err)) from err

def mapping_from_dict(data: Dict) -> TaxonomyMapping:
    try:
        return TaxonomyMappingSchema().load(data)
    except ValidationError as err:
        raise ConfigError(f"Invalid taxonomy mapping: {err.messages}") from err

def load_mapping(path: Union[str, Path]) -> TaxonomyMapping:
    mapping = mapping_from_dict(_read_json(path))
    logger.debug("Loaded mapping %s from %s", mapping.name, path)
    return mapping

def save_mapping(mapping: TaxonomyMapping, path: Union[str, Path]) -> Path:
    return write_json(TaxonomyMappingSchema().dump(mapping), path)

def load_taxonomy(path: Union[str, Path], name: str = "") -> Taxonomy:
    names = _read_json(path)
    if not isinstance(names, list):
        raise ConfigError(f"Taxonomy file {path} must hold an array of names")
    return Taxonomy(name or Path(path).stem, tuple(names))

@lru_cache(maxsize=None)
def _builtin_mapping(name: str) -> TaxonomyMapping:
    return load_mapping(Path(DATA_DIR) / BUILTIN_MAPPINGS[name])

def builtin_heron_remap() -> TaxonomyMapping:
    return _builtin_mapping("heron")

def builtin_unstructured_remap() -> TaxonomyMapping:
    return _builtin_mapping("unstructured")

def builtin_doclaynet_remap() -> TaxonomyMapping:
    return _builtin_mapping("doclaynet")

def resolve_mapping(spec: str, identity_for: Taxonomy = None) -> TaxonomyMapping:
    """
    Resolves a mapping given on the command line: a builtin name
    (heron, unstructured, doclaynet), `identity`, or a path to mapping JSON.
    """
    if spec in BUILTIN_MAPPINGS:
        return _builtin_mapping(spec)
    if spec == "identity":
        return identity_mapping(identity_for if identity_for is not None else builtin_target_taxonomy())
    if not Path(spec).is_file():
        raise ConfigError(f"Mapping '{spec}' is neither a builtin ({', '.join(BUILTIN_MAPPINGS)}, identity) nor a file")
    return load_mapping(spec)
