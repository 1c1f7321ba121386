import logging
from pathlib import Path

import numpy as np

from app.core.config import settings
from app.core.graph import DiGraph, TopologicalOrder, require_valid_order

logger = logging.getLogger(__name__)


def spy_pixels(g: DiGraph, order: TopologicalOrder, size: int | None = None) -> np.ndarray:
    """Boolean raster of the permuted adjacency; row = source position, column = target position.

    Larger graphs are binned down to `size` pixels per side.
    """
    require_valid_order(g, order)
    limit = size if size is not None else settings.spyplot_max_size
    side = max(1, min(g.n, limit))
    raster = np.zeros((side, side), dtype=bool)
    if g.num_edges:
        scale = side / max(g.n, 1)
        rows = np.minimum((order.sigma[g.src] * scale).astype(np.int64), side - 1)
        cols = np.minimum((order.sigma[g.dst] * scale).astype(np.int64), side - 1)
        raster[rows, cols] = True
    return raster


def render_ppm(raster: np.ndarray) -> bytes:
    """Binary PPM (P6): black pixels on white."""
    height, width = raster.shape
    image = np.full((height, width, 3), 255, dtype=np.uint8)
    image[raster] = 0
    return f"P6\n{width} {height}\n255\n".encode("ascii") + image.tobytes()


def write_spyplot(g: DiGraph, order: TopologicalOrder, path: str | Path, size: int | None = None) -> int:
    raster = spy_pixels(g, order, size)
    data = render_ppm(raster)
    with open(path, "wb") as f:
        f.write(data)
    logger.info("Wrote %sx%s spy plot with %s dark pixels to %s", raster.shape[0], raster.shape[1], int(raster.sum()), path)
    return raster.shape[0]
