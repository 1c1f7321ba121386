import logging

import numpy as np

from app.core.errors import GraphInputError
from app.core.graph import BiPartition, DiGraph, cut_counts, orient_forward
from app.core.spectral import SpectralSolution, solve_fiedler
from app.models.schemas import PartitionMetrics, SpectralConfig

logger = logging.getLogger(__name__)


def split_by_sign(g: DiGraph, x: np.ndarray) -> BiPartition:
    """S = {v : x_v > 0}, then swap so that forward edges dominate the cut."""
    return orient_forward(g, BiPartition(in_t=~(np.asarray(x) > 0)))


def spectral_bipartition(
    g: DiGraph,
    cfg: SpectralConfig | None = None,
) -> tuple[BiPartition, SpectralSolution]:
    solution = solve_fiedler(g, cfg)
    partition = split_by_sign(g, solution.x)
    logger.info(
        "Spectral bi-partition: |S|=%s |T|=%s (c=%s, %s)",
        partition.s_size,
        partition.t_size,
        "auto" if cfg is None or cfg.c is None else cfg.c,
        solution.method,
    )
    return partition, solution


def classic_spectral_bipartition(
    g: DiGraph,
    cfg: SpectralConfig | None = None,
) -> tuple[BiPartition, SpectralSolution]:
    """Undirected Fiedler split: the same solver with c = 0."""
    cfg = (cfg or SpectralConfig()).model_copy(update={"c": 0.0})
    return spectral_bipartition(g, cfg)


def partition_metrics(g: DiGraph, p: BiPartition) -> PartitionMetrics:
    """CON, RCE, WI and RMCE of a bi-partition.

    CON is the cut size over the cut plus the smaller part's internal edge
    count. RCE is the cut share of all edges. WI is the absolute size
    difference over |V|. RMCE is the minority direction's share of the cut.
    """
    if g.num_edges == 0:
        raise GraphInputError("partition metrics are undefined on a graph without edges")
    if p.n != g.n:
        raise GraphInputError(f"partition covers {p.n} vertices, graph has {g.n}")
    forward, backward = cut_counts(g, p)
    cut = forward + backward
    src_t = p.in_t[g.src]
    dst_t = p.in_t[g.dst]
    inside_s = int(np.sum(~src_t & ~dst_t))
    inside_t = int(np.sum(src_t & dst_t))
    con_den = cut + min(inside_s, inside_t)
    return PartitionMetrics(
        con=cut / con_den if con_den else 0.0,
        rce=cut / g.num_edges,
        wi=abs(p.s_size - p.t_size) / g.n,
        rmce=min(forward, backward) / cut if cut else 0.0,
    )
