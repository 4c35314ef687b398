from typing import Any, Dict, Optional, Tuple
from marshmallow import Schema, fields, validate, ValidationError, post_load, EXCLUDE
from ..dataset.model import BBox, PageRecord
from ..engine.plan import GroupDirective, HarmonizationPlan
from ..errors import PlanParseError
import json

class GroupSchema(Schema):
    class Meta:
        unknown = EXCLUDE

    ids = fields.List(fields.Int(strict=True), required=True)
    target_category = fields.Str(required=True)
    bbox = fields.List(
        fields.Float(allow_nan=False), load_default=None, allow_none=True,
        validate=validate.Length(equal=4)
    )

    @post_load
    def make_directive(self, data, **kwargs):
        bbox = data.get("bbox")
        return GroupDirective(
            tuple(data["ids"]), data["target_category"],
            BBox.from_list(bbox) if bbox is not None else None
        )

class PlanSchema(Schema):
    # a model may add commentary keys next to "groups"
    class Meta:
        unknown = EXCLUDE

    groups = fields.List(fields.Nested(GroupSchema), required=True)

    @post_load
    def make_plan(self, data, **kwargs):
        return HarmonizationPlan(tuple(data["groups"]))

def extract_json_object(text: str) -> Tuple[Dict[str, Any], str]:
    """
    Returns the first JSON object embedded in `text` along with its source
    fragment. Surrounding prose and markdown code fences are ignored.
    """
    decoder = json.JSONDecoder()
    start = text.find("{")
    while start != -1:
        try:
            value, end = decoder.raw_decode(text, start)
        except json.JSONDecodeError:
            start = text.find("{", start + 1)
            continue
        if isinstance(value, dict):
            return value, text[start:end]
        start = text.find("{", end)
    raise PlanParseError("No JSON object found in response", text.strip())

def parse_plan(response_text: str, page: Optional[PageRecord] = None) -> HarmonizationPlan:
    """
    Maps a model response onto a HarmonizationPlan. Only the shape is checked
    here; conservation is left to validate_plan.
    """
    data, fragment = extract_json_object(response_text or "")
    try:
        return PlanSchema().load(data)
    except ValidationError as err:
        where = f" for page {page.image_id}" if page is not None else ""
        raise PlanParseError(f"Malformed plan{where} {err.messages}", fragment) from err
