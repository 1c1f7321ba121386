import io

import pytest

from app.core.errors import GraphInputError, MatrixMarketError
from app.core.graph import build_graph, is_acyclic, is_weakly_connected
from app.core.ingest import (
    acyclic_convert_partition_rule,
    acyclic_convert_toporder_rule,
    is_denser,
    load_graph,
    parse_matrix_market,
    read_edge_list,
    save_graph,
    symmetric_percentage,
    to_digraph,
    triangular_part,
    write_edge_list,
    write_matrix_market,
)


def _parse(text: str):
    return parse_matrix_market(io.StringIO(text))


GENERAL_REAL = """%%MatrixMarket matrix coordinate real general
% a comment
4 4 5
1 2 1.0
2 3 -2.5
3 1 0.5
4 4 9.0
2 1 1.0
"""

SKEW_REAL = """%%MatrixMarket matrix coordinate real skew-symmetric
3 3 2
2 1 1.0
3 2 -2.0
"""

SYMMETRIC_PATTERN = """%%MatrixMarket matrix coordinate pattern symmetric
3 3 3
2 1
3 2
3 3
"""


# --- Parsing ---

def test_general_real_entries_are_zero_based():
    pattern = _parse(GENERAL_REAL)
    assert (pattern.rows, pattern.cols) == (4, 4)
    assert pattern.entry_set == {(0, 1), (1, 2), (2, 0), (3, 3), (1, 0)}


def test_symmetric_storage_is_expanded():
    pattern = _parse(SYMMETRIC_PATTERN)
    assert pattern.entry_set == {(1, 0), (0, 1), (2, 1), (1, 2), (2, 2)}
    assert pattern.symmetry == "symmetric"


@pytest.mark.parametrize(
    "text",
    [
        "%%MatrixMarket matrix array real general\n2 2\n1.0\n",
        "%%MatrixMarket matrix coordinate complex general\n1 1 1\n1 1 1.0 0.0\n",
        "%%NotMatrixMarket\n1 1 1\n",
        "%%MatrixMarket matrix coordinate pattern general\n",
        "%%MatrixMarket matrix coordinate pattern general\n2 2 2\n1 1\n",
        "%%MatrixMarket matrix coordinate pattern general\n2 2 1\n3 1\n",
        "%%MatrixMarket matrix coordinate pattern general\n2 two 1\n1 2\n",
    ],
)
def test_malformed_input_rejected(text):
    with pytest.raises(MatrixMarketError):
        _parse(text)


def test_skew_symmetric_storage_is_expanded():
    pattern = _parse(SKEW_REAL)
    assert pattern.entry_set == {(1, 0), (0, 1), (2, 1), (1, 2)}
    assert pattern.symmetry == "skew-symmetric"


def test_explicit_zero_values_stay_in_the_pattern():
    pattern = _parse("%%MatrixMarket matrix coordinate integer general\n2 2 2\n1 2 0\n2 1 7\n")
    assert pattern.entry_set == {(0, 1), (1, 0)}


def test_written_pattern_parses_back():
    pattern = _parse(SYMMETRIC_PATTERN)
    out = io.StringIO()
    write_matrix_market(pattern, out)
    again = _parse(out.getvalue())
    assert again.entry_set == pattern.entry_set
    assert again.symmetry == "general"
    assert out.getvalue().startswith("%%MatrixMarket matrix coordinate pattern general")


# --- Digraph conversion ---

def test_to_digraph_drops_diagonal_and_reports_symmetry():
    g, pct = to_digraph(_parse(GENERAL_REAL))
    assert g.edges == [(0, 1), (1, 0), (1, 2), (2, 0)]
    assert pct == pytest.approx(50.0)


def test_symmetric_percentage_of_dag_is_zero():
    assert symmetric_percentage(build_graph(3, [(0, 1), (1, 2)])) == 0.0
    assert symmetric_percentage(build_graph(2, [])) == 0.0


def test_rectangular_matrix_rejected():
    with pytest.raises(MatrixMarketError):
        to_digraph(_parse("%%MatrixMarket matrix coordinate pattern general\n2 3 1\n1 3\n"))


def test_triangular_parts_are_acyclic():
    pattern = _parse(GENERAL_REAL)
    upper = triangular_part(pattern, upper=True)
    lower = triangular_part(pattern, upper=False)
    assert upper.edges == [(0, 1), (1, 2)]
    assert lower.edges == [(1, 0), (2, 0)]
    assert is_acyclic(upper) and is_acyclic(lower)
    assert upper.n == lower.n == 4


def test_denser_compares_edges_per_spanned_vertex():
    a = build_graph(4, [(0, 1), (0, 2), (1, 2)])
    b = build_graph(4, [(0, 1), (2, 3)])
    assert is_denser(a, b)
    assert not is_denser(b, a)
    assert not is_denser(a, a)


def test_toporder_rule_picks_denser_triangle():
    text = """%%MatrixMarket matrix coordinate pattern general
4 4 4
2 1
3 1
3 2
1 4
"""
    g = acyclic_convert_toporder_rule(_parse(text))
    assert g.edges == [(1, 0), (2, 0), (2, 1)]
    assert g.n == 4


def test_toporder_rule_ties_to_upper():
    g = acyclic_convert_toporder_rule(_parse(SYMMETRIC_PATTERN))
    assert g.edges == [(0, 1), (1, 2)]


def test_partition_rule_prefers_connected_triangle():
    # lower is denser but leaves vertex 3 isolated; upper spans every vertex
    text = """%%MatrixMarket matrix coordinate pattern general
4 4 6
2 1
3 1
3 2
1 2
2 3
3 4
"""
    g = acyclic_convert_partition_rule(_parse(text))
    assert g.edges == [(0, 1), (1, 2), (2, 3)]
    assert is_weakly_connected(g)


def test_partition_rule_falls_back_to_largest_component():
    text = """%%MatrixMarket matrix coordinate pattern general
5 5 3
1 2
2 3
4 5
"""
    g = acyclic_convert_partition_rule(_parse(text))
    assert g.n == 3
    assert g.edges == [(0, 1), (1, 2)]


def test_conversion_without_edges_rejected():
    with pytest.raises(GraphInputError):
        acyclic_convert_toporder_rule(_parse("%%MatrixMarket matrix coordinate pattern general\n2 2 1\n1 1\n"))


# --- Edge lists ---

def test_edge_list_with_header_keeps_isolated_vertices():
    g = build_graph(5, [(0, 3), (3, 4)])
    out = io.StringIO()
    write_edge_list(g, out)
    assert out.getvalue() == "# n=5\n0 3\n3 4\n"
    again = read_edge_list(io.StringIO(out.getvalue()))
    assert again.n == 5
    assert again.edges == g.edges


def test_edge_list_without_header_maps_tokens():
    g = read_edge_list(io.StringIO("# comment\nb a\na c\n\n"))
    assert g.labels == ("b", "a", "c")
    assert g.edges == [(0, 1), (1, 2)]


def test_edge_list_rejects_malformed_lines():
    with pytest.raises(GraphInputError):
        read_edge_list(io.StringIO("0 1 2\n"))
    with pytest.raises(GraphInputError):
        read_edge_list(io.StringIO("# n=2\na b\n"))


def test_load_graph_by_extension(tmp_path):
    mtx = tmp_path / "tiny.mtx"
    mtx.write_text(GENERAL_REAL, encoding="utf-8")
    assert load_graph(mtx).num_edges == 4

    edges = tmp_path / "tiny.edges"
    save_graph(build_graph(3, [(0, 2)]), edges)
    assert load_graph(edges).edges == [(0, 2)]


def test_missing_file_raises_os_error(tmp_path):
    with pytest.raises(OSError):
        load_graph(tmp_path / "absent.edges")
