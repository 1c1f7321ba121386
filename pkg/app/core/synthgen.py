"""Seeded synthetic digraphs with a planted, nearly acyclic bi-partition.

The planted halves are A = {0..n/2-1} and B = {n/2..n-1}. Edges inside a half
get a uniformly random direction; cross edges point B -> A with probability
alpha and A -> B otherwise. All draws come from one Philox stream consumed in
a canonical pair order, so a seed fixes the graph on every platform.
"""

import logging

import numpy as np

from app.core.graph import BiPartition, DiGraph, build_graph
from app.models.schemas import GraphFamily, SynthConfig

logger = logging.getLogger(__name__)


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def _pairs(n: int) -> tuple[np.ndarray, np.ndarray]:
    i, j = np.triu_indices(n, k=1)
    return i.astype(np.int64), j.astype(np.int64)


def _erdos_renyi(cfg: SynthConfig, rng: np.random.Generator) -> np.ndarray:
    i, j = _pairs(cfg.n)
    keep = rng.random(i.shape[0]) < cfg.edge_probability
    return np.stack([i[keep], j[keep]], axis=1)


def _stochastic_block(cfg: SynthConfig, rng: np.random.Generator) -> np.ndarray:
    half = cfg.n // 2
    i, j = _pairs(cfg.n)
    same_block = (i < half) == (j < half)
    prob = np.where(same_block, cfg.p_int, cfg.p_ext)
    keep = rng.random(i.shape[0]) < prob
    return np.stack([i[keep], j[keep]], axis=1)


def _watts_strogatz(cfg: SynthConfig, rng: np.random.Generator) -> np.ndarray:
    n, k = cfg.n, cfg.k
    p = cfg.edge_probability
    neighbours: list[set[int]] = [set() for _ in range(n)]
    for offset in range(1, k // 2 + 1):
        for v in range(n):
            u = (v + offset) % n
            neighbours[v].add(u)
            neighbours[u].add(v)

    # Rewire each clockwise lattice edge; collisions are redrawn.
    for offset in range(1, k // 2 + 1):
        for v in range(n):
            u = (v + offset) % n
            if u not in neighbours[v] or rng.random() >= p:
                continue
            if len(neighbours[v]) >= n - 1:
                continue
            w = int(rng.integers(n))
            while w == v or w in neighbours[v]:
                w = int(rng.integers(n))
            neighbours[v].discard(u)
            neighbours[u].discard(v)
            neighbours[v].add(w)
            neighbours[w].add(v)

    pairs = sorted((v, u) for v in range(n) for u in neighbours[v] if v < u)
    return np.asarray(pairs, dtype=np.int64).reshape(-1, 2)


_SKELETONS = {
    GraphFamily.er: _erdos_renyi,
    GraphFamily.ws: _watts_strogatz,
    GraphFamily.sbm: _stochastic_block,
}


def orient_planted(pairs: np.ndarray, n: int, alpha: float, rng: np.random.Generator) -> np.ndarray:
    """Direct undirected pairs (i < j) against the planted halves."""
    half = n // 2
    i, j = pairs[:, 0], pairs[:, 1]
    draw = rng.random(i.shape[0])
    cross = (i < half) != (j < half)
    # Cross pairs have i in A; reversing them gives the misaligned B -> A edge.
    reverse = np.where(cross, draw < alpha, draw < 0.5)
    src = np.where(reverse, j, i)
    dst = np.where(reverse, i, j)
    return np.stack([src, dst], axis=1)


def planted_partition(n: int) -> BiPartition:
    in_t = np.zeros(n, dtype=bool)
    in_t[n // 2 :] = True
    return BiPartition(in_t=in_t)


def generate(cfg: SynthConfig) -> tuple[DiGraph, BiPartition]:
    rng = _rng(cfg.seed)
    pairs = _SKELETONS[cfg.family](cfg, rng)
    edges = orient_planted(pairs, cfg.n, cfg.alpha, rng)
    g = build_graph(cfg.n, edges)
    logger.info(
        "Generated %s graph: n=%s m=%s alpha=%s seed=%s",
        cfg.family.value,
        g.n,
        g.num_edges,
        cfg.alpha,
        cfg.seed,
    )
    return g, planted_partition(cfg.n)
