from pathlib import Path
import json
import pytest
from harmonizer import synthetic

@pytest.fixture
def fixture_dir(tmp_path: Path) -> Path:
    directory = tmp_path / "data"
    synthetic.write_fixture(directory)
    return directory

@pytest.fixture
def write_coco(tmp_path: Path):
    """Writes a COCO dict (or raw text) to a file and returns its path."""
    def write(data, name: str = "coco.json") -> Path:
        path = tmp_path / name
        text = data if isinstance(data, str) else json.dumps(data)
        path.write_text(text, encoding="utf-8")
        return path
    return write

@pytest.fixture
def make_coco():
    """A one-page COCO dict from (id, category_id, xywh) triples."""
    def make(annotations, categories=("Text", "Table"), width=100, height=100):
        return {
            "images": [{"id": 1, "width": width, "height": height, "file_name": "p.png"}],
            "annotations": [
                {"id": i, "image_id": 1, "category_id": c, "bbox": list(b)} for i, c, b in annotations
            ],
            "categories": [{"id": i, "name": n} for i, n in enumerate(categories, 1)],
        }
    return make
