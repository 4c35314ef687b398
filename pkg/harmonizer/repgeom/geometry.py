from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple
from scipy.spatial.distance import cdist
from sklearn.metrics import silhouette_samples
import numpy as np
from .embeddings import EmbeddingSet, RecordId
from ..errors import ConfigError, DegenerateInputError
from ..common import logger

DEFAULT_PAIRS: Tuple[Tuple[str, str], ...] = (("paragraph", "list_item"), ("title", "subheading"))
BLOCK_ROWS = 1024

def _silhouette(matrix: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """Per-point silhouette; singleton classes and a == b == 0 score 0."""
    n_labels = len(set(labels))
    if n_labels > len(labels) - 1:
        return np.zeros(len(labels))
    scores = silhouette_samples(matrix, labels, metric="euclidean")
    return np.nan_to_num(scores, nan=0.0)

def _sample(es: EmbeddingSet, sample_cap: Optional[int], seed: int) -> np.ndarray:
    labels = es.labels
    if sample_cap is None:
        return np.arange(len(es))
    if sample_cap < 1:
        raise ConfigError("sample_cap must be >= 1")
    rng = np.random.default_rng(seed)
    keep = []
    for label in es.classes:
        members = np.flatnonzero(labels == label)
        if len(members) > sample_cap:
            members = np.sort(rng.choice(members, sample_cap, replace=False))
        keep.append(members)
    return np.sort(np.concatenate(keep))

def silhouette_per_class(es: EmbeddingSet, *, sample_cap: Optional[int] = None, seed: int = 0) -> Dict[str, float]:
    """
    Mean Euclidean silhouette of each class's members. With `sample_cap`, at
    most that many members per class are drawn, reproducibly from `seed`.
    """
    if len(es.classes) < 2:
        raise DegenerateInputError("Silhouette needs at least two classes")
    index = _sample(es, sample_cap, seed)
    labels = es.labels[index]
    scores = _silhouette(es.matrix[index], labels)
    return {label: float(scores[labels == label].mean()) for label in sorted(set(labels))}

def neighborhood_purity(es: EmbeddingSet, k: int = 100) -> Tuple[float, Dict[str, float], int]:
    """
    Fraction of same-class points among each point's k' = min(k, N - 1)
    nearest Euclidean neighbours, distance ties going to the smaller id.

    Returns (mean purity, per-class purity, k').
    """
    if k < 1:
        raise ConfigError("k must be >= 1")
    n = len(es)
    if n < 2:
        raise DegenerateInputError(f"Neighborhood purity needs at least 2 embeddings, got {n}")
    k_eff = min(k, n - 1)
    if k_eff < k:
        logger.info("Only %d embeddings, purity uses k=%d", n, k_eff)

    matrix, labels, ranks = es.matrix, es.labels, es.id_ranks()
    purity = np.empty(n)
    for start in range(0, n, BLOCK_ROWS):
        rows = np.arange(start, min(start + BLOCK_ROWS, n))
        distances = cdist(matrix[rows], matrix, metric="euclidean")
        distances[np.arange(len(rows)), rows] = np.inf
        tie_break = np.broadcast_to(ranks, distances.shape)
        order = np.lexsort((tie_break, distances), axis=-1)[:, :k_eff]
        purity[rows] = (labels[order] == labels[rows][:, None]).mean(axis=1)

    per_class = {label: float(purity[labels == label].mean()) for label in es.classes}
    return float(purity.mean()), per_class, k_eff

def project_2d(es: EmbeddingSet) -> np.ndarray:
    """
    Projection onto the two leading principal axes of the centered data, each
    axis signed so that its largest-magnitude loading is positive. Records that
    all carry `x, y` are returned as given.
    """
    if es.has_xy:
        return np.array([r.xy for r in es.records], dtype=float)
    if len(es) < 2:
        raise DegenerateInputError("Projection needs at least 2 embeddings")
    centered = es.matrix - es.matrix.mean(axis=0)
    covariance = centered.T @ centered / (len(es) - 1)
    values, vectors = np.linalg.eigh(covariance)
    if values[-1] <= 1e-12:
        raise DegenerateInputError("Embeddings have zero variance, nothing to project")
    axes = vectors[:, ::-1][:, :2].copy()
    for j in range(2):
        if axes[np.argmax(np.abs(axes[:, j])), j] < 0:
            axes[:, j] = -axes[:, j]
    coords = centered @ axes
    coords[np.abs(coords) < 1e-12] = 0.0
    return coords

def pair_separation(es: EmbeddingSet, pairs: Sequence[Tuple[str, str]] = DEFAULT_PAIRS) -> Dict[str, float]:
    """
    Two-class silhouette of each confusable pair, computed on the members of
    the two classes only. Pairs with an absent class are skipped.
    """
    labels = es.labels
    result = {}
    for a, b in pairs:
        members = np.flatnonzero((labels == a) | (labels == b))
        if not (labels[members] == a).any() or not (labels[members] == b).any():
            continue
        scores = _silhouette(es.matrix[members], labels[members])
        result[f"{a}/{b}"] = float(scores.mean())
    return result

@dataclass
class GeometryReport:
    silhouette: Dict[str, float]
    purity_mean: float
    purity_per_class: Dict[str, float]
    coords: List[Tuple[RecordId, str, float, float]]
    params: Dict[str, object]
    pair_separation: Dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, object]:
        return {
            "params": self.params,
            "silhouette": self.silhouette,
            "purity": {"mean": self.purity_mean, "per_class": self.purity_per_class},
            "pair_separation": self.pair_separation,
            "coords": [{"id": i, "label": label, "x": x, "y": y} for i, label, x, y in self.coords],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, object]) -> "GeometryReport":
        try:
            return cls(
                silhouette=dict(data["silhouette"]),
                purity_mean=float(data["purity"]["mean"]),
                purity_per_class=dict(data["purity"]["per_class"]),
                coords=[(c["id"], c["label"], float(c["x"]), float(c["y"])) for c in data["coords"]],
                params=dict(data.get("params", {})),
                pair_separation=dict(data.get("pair_separation", {})),
            )
        except (KeyError, TypeError, ValueError) as err:
            raise DegenerateInputError(f"Not a geometry report: missing or invalid {err}") from err

    def scatter_rows(self) -> List[Dict[str, object]]:
        return [{"id": i, "label": label, "x": x, "y": y} for i, label, x, y in self.coords]

def analyze_geometry(es: EmbeddingSet, k: int = 100, sample_cap: Optional[int] = None,
                     seed: int = 0, pairs: Sequence[Tuple[str, str]] = DEFAULT_PAIRS) -> GeometryReport:
    silhouette = silhouette_per_class(es, sample_cap=sample_cap, seed=seed)
    purity_mean, purity_per_class, k_eff = neighborhood_purity(es, k)
    projection = "precomputed" if es.has_xy else "pca"
    coords = project_2d(es)
    return GeometryReport(
        silhouette=silhouette,
        purity_mean=purity_mean,
        purity_per_class=purity_per_class,
        coords=[(r.id, r.label, float(x), float(y)) for r, (x, y) in zip(es.records, coords)],
        params={
            "k": k, "k_effective": k_eff, "distance": "euclidean",
            "sample_cap": sample_cap, "seed": seed, "projection": projection,
            "records": len(es), "dim": es.dim,
        },
        pair_separation=pair_separation(es, pairs),
    )
