import pytest

from app.core.errors import OrderValidationError
from app.core.graph import TopologicalOrder, build_graph
from app.core.spyplot import render_ppm, spy_pixels, write_spyplot
from tests.factories import _make_path


def test_pixels_follow_order_positions():
    g = build_graph(3, [(2, 0), (2, 1)])
    raster = spy_pixels(g, TopologicalOrder.from_sequence([2, 0, 1]))
    assert raster.shape == (3, 3)
    assert raster.sum() == 2
    assert raster[0, 1] and raster[0, 2]


def test_topological_order_is_strictly_upper_triangular():
    g = _make_path(6)
    raster = spy_pixels(g, TopologicalOrder.from_sequence(range(6)))
    assert not raster[[r for r in range(6)], [r for r in range(6)]].any()
    assert all(raster[i, i + 1] for i in range(5))


def test_large_graphs_are_binned():
    g = _make_path(100)
    raster = spy_pixels(g, TopologicalOrder.from_sequence(range(100)), size=10)
    assert raster.shape == (10, 10)
    assert raster.any()


def test_invalid_order_rejected():
    with pytest.raises(OrderValidationError):
        spy_pixels(_make_path(3), TopologicalOrder.from_sequence([1, 0, 2]))


def test_ppm_header_and_size(tmp_path):
    g = _make_path(4)
    data = render_ppm(spy_pixels(g, TopologicalOrder.from_sequence(range(4))))
    header = b"P6\n4 4\n255\n"
    assert data.startswith(header)
    assert len(data) == len(header) + 4 * 4 * 3

    path = tmp_path / "spy.ppm"
    assert write_spyplot(g, TopologicalOrder.from_sequence(range(4)), path) == 4
    assert path.read_bytes() == data
