"""PNG scatter renders of fractal-function graphs.

Each figure owns its Agg canvas and never touches pyplot state:
``figures --render --jobs N`` renders from worker threads.
"""

from __future__ import annotations

import logging
from pathlib import Path

from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure
from mpl_toolkits.mplot3d import Axes3D  # noqa: F401  registers the 3d projection

from models import GraphSample

logger = logging.getLogger(__name__)

CANVAS_PX = (1024, 896)
DPI = 100
COLORMAP = "viridis"
# a marker of 1 px expressed in points^2
MARKER_SIZE = (72 / DPI) ** 2


def render_graph(sample: GraphSample, path: Path | str, title: str = "") -> Path:
    """Write an orthographic 3D scatter of ``sample`` coloured by z."""
    path = Path(path)
    pts = sample.points
    fig = Figure(figsize=(CANVAS_PX[0] / DPI, CANVAS_PX[1] / DPI), dpi=DPI)
    FigureCanvasAgg(fig)
    ax = fig.add_subplot(111, projection="3d")
    ax.set_proj_type("ortho")
    ax.scatter(
        pts[:, 0],
        pts[:, 1],
        pts[:, 2],
        c=pts[:, 2],
        cmap=COLORMAP,
        s=MARKER_SIZE,
        marker=".",
        linewidths=0,
        depthshade=False,
    )
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_zlabel("z")
    if title:
        ax.set_title(title)
    # no Software/creation-time chunks so reruns are byte-identical
    fig.savefig(path, dpi=DPI, metadata={"Software": None})
    logger.info("rendered %d points to %s", len(sample), path)
    return path


__all__ = ["render_graph", "COLORMAP", "CANVAS_PX"]
