from rapidfuzz.distance import Levenshtein
import unicodedata

def normalize_text(text: str) -> str:
    """NFC, casefold, whitespace runs collapsed to one space, trimmed."""
    return " ".join(unicodedata.normalize("NFC", text or "").casefold().split())

def ned(pred: str, ref: str) -> float:
    """Normalized edit similarity: 1 - Levenshtein / longer length, 1.0 for two empty strings."""
    pred, ref = pred or "", ref or ""
    longest = max(len(pred), len(ref))
    if not longest:
        return 1.0
    return 1.0 - Levenshtein.distance(pred, ref) / longest

def adjusted_ned(pred: str, ref: str) -> float:
    return ned(normalize_text(pred), normalize_text(ref))

def tokens(text: str):
    return normalize_text(text).split()
