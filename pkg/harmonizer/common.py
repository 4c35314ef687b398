from os.path import abspath, join
from typing import Any, Iterable, Optional, Union
from pathlib import Path
from rich.logging import RichHandler
from rich.console import Console
import hashlib
import logging
import json

logger = logging.getLogger("harmonizer")

PathLike = Union[str, Path]

def get_path(path: str, base: str = __file__) -> str:
    return abspath(join(base, path))

def setup_logging(level: Union[str, int] = "INFO") -> logging.Logger:
    """
    Attaches a single rich handler writing to stderr. Calling this again only
    updates the level.
    """
    if not any(isinstance(handler, RichHandler) for handler in logger.handlers):
        handler = RichHandler(
            console=Console(stderr=True), show_path=False,
            rich_tracebacks=False, markup=False
        )
        handler.setFormatter(logging.Formatter("%(message)s", datefmt="[%X]"))
        logger.addHandler(handler)
        logger.propagate = False
    logger.setLevel(level if isinstance(level, int) else level.upper())
    return logger

def to_json_number(value: float) -> Union[int, float]:
    """Integer-valued floats are written as integers."""
    if isinstance(value, float) and value.is_integer():
        return int(value)
    return value

def dump_json(data: Any) -> str:
    return json.dumps(data, indent=2, ensure_ascii=False) + "\n"

def write_json(data: Any, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dump_json(data), encoding="utf-8")
    return path

def write_jsonl(rows: Iterable[Any], path: PathLike, append: bool = False) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "a" if append else "w", encoding="utf-8") as out:
        for row in rows:
            out.write(json.dumps(row, ensure_ascii=False) + "\n")
    return path

def file_digest(path: PathLike, algorithm: str = "sha256") -> str:
    digest = hashlib.new(algorithm)
    with open(path, "rb") as data:
        for chunk in iter(lambda: data.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()

def text_digest(text: str, algorithm: str = "sha256") -> str:
    return hashlib.new(algorithm, text.encode("utf-8")).hexdigest()

def byte_offset(text: str, char_pos: Optional[int]) -> int:
    """Converts a character position in decoded text into a utf-8 byte offset."""
    if char_pos is None:
        return 0
    return len(text[:char_pos].encode("utf-8"))
