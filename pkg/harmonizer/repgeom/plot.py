from typing import Optional, Union
from pathlib import Path
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np
from .geometry import GeometryReport

SVG_HASH_SALT = "harmonizer"

def render_scatter(report: GeometryReport, path: Union[str, Path], title: Optional[str] = None) -> Path:
    """
    Writes the projected coordinates as an SVG scatter coloured by class.
    Identical reports give byte-identical files.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    labels = sorted({label for _, label, _, _ in report.coords})
    colors = plt.get_cmap("tab20", max(len(labels), 1))

    with plt.rc_context({"svg.hashsalt": SVG_HASH_SALT, "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(8, 6))
        for n, label in enumerate(labels):
            points = np.array([(x, y) for _, lab, x, y in report.coords if lab == label], dtype=float)
            ax.scatter(points[:, 0], points[:, 1], s=8, color=colors(n), label=label, linewidths=0)
        ax.set_xlabel("axis 1")
        ax.set_ylabel("axis 2")
        params = report.params
        ax.set_title(title or f"{params.get('projection', 'pca')} projection, "
                              f"purity@{params.get('k_effective', '?')} = {report.purity_mean:.3f}")
        if labels:
            ax.legend(loc="center left", bbox_to_anchor=(1.0, 0.5), fontsize="small", frameon=False)
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
    return path
