from typing import Dict, Iterable, List, Optional, Sequence
from pathlib import Path
from ..dataset.model import Annotation, PageRecord
from ..engine.rules import RuleSet
from ..taxonomy.taxonomy import TaxonomyMapping
from ..errors import GroundingError, RemapError
import mimetypes
import base64

OUTPUT_INSTRUCTION = """Answer with a single JSON object and nothing else, of the form:
{"groups": [{"ids": [<annotation ids>], "target_category": "<target category>", "bbox": [x0, y0, x1, y1]}]}
Rules for the answer:
- every annotation id listed above appears in exactly one group; do not invent ids and do not drop any
- a group merges its annotations into one region; an annotation is never split
- target_category must be one of the target categories listed above
- "bbox" is optional; give it only to correct a boundary, in page pixels, inside the page and overlapping the group's boxes"""

def _fmt(value: float) -> str:
    return str(int(value)) if float(value).is_integer() else f"{value:.2f}"

def resolve_image(page: PageRecord, images_dir: Optional[str] = None) -> Path:
    if not page.image_path:
        raise GroundingError(None, f"page {page.image_id} has no image path")
    path = Path(page.image_path)
    if not path.is_absolute() and images_dir:
        path = Path(images_dir) / path
    return path

def encode_image(path: Path) -> str:
    try:
        data = path.read_bytes()
    except OSError as err:
        raise GroundingError(str(path), f"cannot read page image ({err.strerror or err})") from err
    if not data:
        raise GroundingError(str(path), "page image is empty")
    mime = mimetypes.guess_type(path.name)[0] or "image/png"
    return f"data:{mime};base64,{base64.b64encode(data).decode()}"

def render_prompt(page: PageRecord, annotations: Sequence[Annotation], rules: RuleSet,
                  mapping: Optional[TaxonomyMapping] = None, feedback: Iterable[str] = ()) -> str:
    lines: List[str] = [
        "You harmonize document-layout annotations into a target annotation standard.",
        f"The attached image is page {page.image_id} ({page.width}x{page.height} px, origin top-left).",
        "",
        "Target categories and their conventions:",
    ]
    for category in rules.target_taxonomy:
        lines.append(f"- {category}: {rules.convention(category).description}")

    lines += ["", f"Source annotations ({len(annotations)}), as [id] category bbox=[x0, y0, x1, y1]:"]
    for ann in sorted(annotations, key=lambda a: a.id):
        box = ", ".join(_fmt(v) for v in ann.bbox.to_list())
        line = f"[{ann.id}] {ann.category} bbox=[{box}]"
        if mapping is not None:
            try:
                suggested = mapping.map_label(ann.category)
            except RemapError:
                suggested = None
            if suggested:
                line += f" suggested={suggested}"
        lines.append(line)

    lines += ["", OUTPUT_INSTRUCTION]
    feedback = list(feedback)
    if feedback:
        lines += ["", "Your previous answer was rejected for these reasons; fix all of them:"]
        lines += [f"- {reason}" for reason in feedback]
    return "\n".join(lines)

def build_request(page: PageRecord, annotations: Sequence[Annotation], rules: RuleSet, *,
                  model: str = "default", temperature: float = 0.0, images_dir: Optional[str] = None,
                  mapping: Optional[TaxonomyMapping] = None, feedback: Iterable[str] = ()) -> Dict[str, object]:
    """
    Builds an OpenAI-compatible chat-completions payload grounded in the page
    image. Raises GroundingError before anything is sent when the image cannot
    be read.
    """
    image_url = encode_image(resolve_image(page, images_dir))
    prompt = render_prompt(page, annotations, rules, mapping=mapping, feedback=feedback)
    return {
        "model": model,
        "temperature": temperature,
        "messages": [{
            "role": "user",
            "content": [
                {"type": "text", "text": prompt},
                {"type": "image_url", "image_url": {"url": image_url}},
            ],
        }],
    }

def prompt_text(payload: Dict[str, object]) -> str:
    return payload["messages"][0]["content"][0]["text"]
