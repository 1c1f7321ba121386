"""Matrix Market patterns, the acyclic conversion rules, and the edge-list dump format."""

import io
import logging
from collections.abc import Iterable
from dataclasses import dataclass
from pathlib import Path
from typing import TextIO

import numpy as np
from scipy.io import mminfo, mmread, mmwrite
from scipy.sparse import coo_matrix

from app.core.errors import GraphInputError, MatrixMarketError
from app.core.graph import DiGraph, build_graph, is_weakly_connected, largest_weakly_connected_component

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class SparsePattern:
    """Coordinate pattern with 0-based (row, col) entries, symmetric storage expanded."""

    rows: int
    cols: int
    entries: np.ndarray
    symmetry: str = "general"

    @property
    def entry_set(self) -> set[tuple[int, int]]:
        return {(int(i), int(j)) for i, j in self.entries.tolist()}

    @property
    def is_square(self) -> bool:
        return self.rows == self.cols


def _pattern(rows: int, cols: int, coords: Iterable[tuple[int, int]] | np.ndarray, symmetry: str) -> SparsePattern:
    arr = np.asarray(coords if isinstance(coords, np.ndarray) else list(coords), dtype=np.int64).reshape(-1, 2)
    if arr.size:
        arr = np.unique(arr, axis=0)
    return SparsePattern(rows=rows, cols=cols, entries=arr, symmetry=symmetry)


_READ_ERRORS = (ValueError, TypeError, IndexError, OverflowError, RuntimeError, EOFError)


def _parse_bytes(raw: bytes) -> SparsePattern:
    try:
        rows, cols, announced, layout, value_field, symmetry = mminfo(io.BytesIO(raw))
    except _READ_ERRORS as exc:
        raise MatrixMarketError(f"malformed header: {exc}") from exc
    if layout != "coordinate":
        raise MatrixMarketError(f"unsupported layout {layout!r}; only coordinate files are read")
    if value_field == "complex":
        raise MatrixMarketError("complex-valued matrices are not supported")
    try:
        matrix = coo_matrix(mmread(io.BytesIO(raw)))
    except _READ_ERRORS as exc:
        raise MatrixMarketError(f"malformed entries: {exc}") from exc

    row = np.asarray(matrix.row, dtype=np.int64)
    col = np.asarray(matrix.col, dtype=np.int64)
    if row.size and (row.min() < 0 or row.max() >= rows or col.min() < 0 or col.max() >= cols):
        raise MatrixMarketError(f"entry outside a {rows}x{cols} matrix")
    # Symmetric storage comes back mirrored; count the stored triangle only.
    stored = int(row.size) if symmetry == "general" else int(np.count_nonzero(row >= col))
    if stored != announced:
        raise MatrixMarketError(f"size line announces {announced} entries, found {stored}")
    return _pattern(rows, cols, np.stack([row, col], axis=1), symmetry)


def parse_matrix_market(stream: TextIO) -> SparsePattern:
    """Coordinate Matrix Market of any field and symmetry, reduced to its nonzero pattern."""
    return _parse_bytes(stream.read().encode("utf-8"))


def read_matrix_market(path: str | Path) -> SparsePattern:
    with open(path, "rb") as f:
        return _parse_bytes(f.read())


def write_matrix_market(pattern: SparsePattern, stream: TextIO) -> None:
    """Write as a general coordinate pattern, entries sorted by (row, col)."""
    e = np.unique(pattern.entries.reshape(-1, 2).astype(np.int64), axis=0)
    matrix = coo_matrix((np.ones(e.shape[0]), (e[:, 0], e[:, 1])), shape=(pattern.rows, pattern.cols))
    buffer = io.BytesIO()
    mmwrite(buffer, matrix, field="pattern", symmetry="general")
    stream.write(buffer.getvalue().decode("utf-8"))


def _require_square(pattern: SparsePattern) -> None:
    if not pattern.is_square:
        raise MatrixMarketError(f"pattern is {pattern.rows}x{pattern.cols}; a square matrix is required")


def to_digraph(pattern: SparsePattern) -> tuple[DiGraph, float]:
    """One edge per off-diagonal entry, plus the percentage of edges whose reverse exists."""
    _require_square(pattern)
    e = pattern.entries
    off = e[e[:, 0] != e[:, 1]] if e.size else e.reshape(0, 2)
    g = build_graph(pattern.rows, off)
    return g, symmetric_percentage(g)


def symmetric_percentage(g: DiGraph) -> float:
    if g.num_edges == 0:
        return 0.0
    n = max(g.n, 1)
    codes = g.src * n + g.dst
    reverse = g.dst * n + g.src
    return 100.0 * float(np.isin(reverse, codes).sum()) / g.num_edges


def triangular_part(pattern: SparsePattern, upper: bool) -> DiGraph:
    """Strict upper (i < j) or lower (i > j) part as a DAG on all n vertices."""
    _require_square(pattern)
    e = pattern.entries
    if e.size == 0:
        return build_graph(pattern.rows, [])
    mask = e[:, 0] < e[:, 1] if upper else e[:, 0] > e[:, 1]
    return build_graph(pattern.rows, e[mask])


def spanned_vertices(g: DiGraph) -> int:
    return int(np.count_nonzero((g.out_deg + g.in_deg) > 0))


def is_denser(a: DiGraph, b: DiGraph) -> bool:
    """Edges per incident vertex of a strictly exceeds that of b."""
    return a.num_edges * spanned_vertices(b) > b.num_edges * spanned_vertices(a)


def _denser_triangle(upper: DiGraph, lower: DiGraph) -> tuple[DiGraph, str]:
    return (lower, "lower") if is_denser(lower, upper) else (upper, "upper")


def _require_edges(g: DiGraph, rule: str) -> DiGraph:
    if g.num_edges == 0:
        raise GraphInputError(f"{rule} conversion produced a graph without edges")
    return g


def acyclic_convert_partition_rule(pattern: SparsePattern) -> DiGraph:
    """Pick the connected triangle; if both are, the denser; if neither, the denser's largest component."""
    upper = triangular_part(pattern, upper=True)
    lower = triangular_part(pattern, upper=False)
    upper_ok, lower_ok = is_weakly_connected(upper), is_weakly_connected(lower)
    if upper_ok and not lower_ok:
        chosen, label = upper, "upper"
    elif lower_ok and not upper_ok:
        chosen, label = lower, "lower"
    elif upper_ok and lower_ok:
        chosen, label = _denser_triangle(upper, lower)
    else:
        denser, label = _denser_triangle(upper, lower)
        chosen, _ = largest_weakly_connected_component(denser)
        label += " (largest component)"
    logger.info("Partition rule kept the %s triangle: n=%s m=%s", label, chosen.n, chosen.num_edges)
    return _require_edges(chosen, "partition-rule")


def acyclic_convert_toporder_rule(pattern: SparsePattern) -> DiGraph:
    """The denser strict triangle, ties to the upper one; all n vertices kept."""
    upper = triangular_part(pattern, upper=True)
    lower = triangular_part(pattern, upper=False)
    chosen, label = _denser_triangle(upper, lower)
    logger.info("Order rule kept the %s triangle: n=%s m=%s", label, chosen.n, chosen.num_edges)
    return _require_edges(chosen, "order-rule")


# --- Edge-list dump ---

def write_edge_list(g: DiGraph, stream: TextIO) -> None:
    stream.write(f"# n={g.n}\n")
    for u, v in zip(g.src.tolist(), g.dst.tolist()):
        stream.write(f"{u} {v}\n")


def read_edge_list(stream: TextIO) -> DiGraph:
    """Read `u v` lines. With a `# n=` header ids are integers, otherwise any
    token is mapped to a dense id in order of first appearance and kept as a label.
    """
    n: int | None = None
    raw: list[tuple[str, str]] = []
    for lineno, line in enumerate(stream, start=1):
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            body = stripped[1:].strip()
            if body.startswith("n=") and n is None and not raw:
                try:
                    n = int(body[2:])
                except ValueError as exc:
                    raise GraphInputError(f"line {lineno}: malformed vertex count header") from exc
            continue
        parts = stripped.split()
        if len(parts) != 2:
            raise GraphInputError(f"line {lineno}: expected 'u v', got {stripped!r}")
        raw.append((parts[0], parts[1]))

    if n is not None:
        try:
            pairs = [(int(u), int(v)) for u, v in raw]
        except ValueError as exc:
            raise GraphInputError("edge list with an n= header must use integer ids") from exc
        return build_graph(n, pairs)

    ids: dict[str, int] = {}
    for u, v in raw:
        ids.setdefault(u, len(ids))
        ids.setdefault(v, len(ids))
    return build_graph(len(ids), [(ids[u], ids[v]) for u, v in raw], labels=list(ids))


def load_graph(path: str | Path) -> DiGraph:
    """Edge list, or a Matrix Market file taken as is (no triangular extraction)."""
    path = Path(path)
    if path.suffix == ".mtx":
        g, _ = to_digraph(read_matrix_market(path))
        return g
    with open(path, "r", encoding="utf-8") as f:
        return read_edge_list(f)


def save_graph(g: DiGraph, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        write_edge_list(g, f)
