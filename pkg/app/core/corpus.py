import json
import logging
from functools import lru_cache
from pathlib import Path

from app.core.config import settings
from app.core.graph import DiGraph
from app.models.schemas import CorpusEntry

logger = logging.getLogger(__name__)


@lru_cache(maxsize=4)
def load_corpus(path: str | None = None) -> tuple[CorpusEntry, ...]:
    source = Path(path or settings.corpus_file)
    with open(source, "r", encoding="utf-8") as f:
        rows = json.load(f)
    return tuple(CorpusEntry(**row) for row in rows)


def find_entry(name: str, path: str | None = None) -> CorpusEntry | None:
    """Case-insensitive lookup by graph name, ignoring any file extension."""
    stem = Path(name).name.split(".")[0].lower()
    for entry in load_corpus(path):
        if entry.name.lower() == stem:
            return entry
    return None


def deviations(entry: CorpusEntry, g: DiGraph, symmetric_pct: float) -> list[str]:
    """Differences between an ingested graph and its table row (percent compared at one decimal)."""
    found: list[str] = []
    if g.n != entry.vertices:
        found.append(f"vertices {g.n} != {entry.vertices}")
    if g.num_edges != entry.edges:
        found.append(f"edges {g.num_edges} != {entry.edges}")
    if abs(round(symmetric_pct, 1) - entry.symmetric_pct) > 0.05:
        found.append(f"symmetric edges {symmetric_pct:.1f}% != {entry.symmetric_pct:.1f}%")
    if found:
        logger.warning("Graph %s deviates from the corpus table: %s", entry.name, "; ".join(found))
    return found
