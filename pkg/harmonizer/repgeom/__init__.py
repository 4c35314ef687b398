from .embeddings import EmbeddingRecord, EmbeddingSet, load_embeddings
from .geometry import GeometryReport, DEFAULT_PAIRS, silhouette_per_class, neighborhood_purity
from .geometry import project_2d, pair_separation, analyze_geometry
from .plot import render_scatter
