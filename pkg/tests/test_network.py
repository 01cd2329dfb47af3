from __future__ import annotations

import numpy as np
import pytest

from topicsim.network import (
    GraphError,
    build_graph,
    complete_graph,
    from_edges,
    generate_scale_free,
    is_connected,
    neighbors,
    read_edgelist,
    write_edgelist,
)


def test_scale_free_shape():
    g = generate_scale_free(50, 2, np.random.default_rng(0))
    assert g.n == 50
    # clique of 3 (3 edges) + 47 nodes * 2 edges
    assert len(g.weights) == 3 + 47 * 2
    assert is_connected(g)
    assert min(g.degree(i) for i in range(50)) >= 2
    # heavy tail: the best-connected node has far more than the mean degree
    assert max(g.degree(i) for i in range(50)) > 2.5 * (2 * len(g.weights) / 50)


def test_scale_free_is_seeded():
    a = generate_scale_free(30, 2, np.random.default_rng(4))
    b = generate_scale_free(30, 2, np.random.default_rng(4))
    assert a == b


def test_three_nodes_is_a_triangle():
    g = generate_scale_free(3, 2, np.random.default_rng(0))
    assert g.edges == [(0, 1), (0, 2), (1, 2)]


def test_small_populations_fall_back_to_complete():
    g = build_graph(2, 2, np.random.default_rng(0))
    assert g.edges == [(0, 1)]
    assert build_graph(1, 2, np.random.default_rng(0)).edges == []


def test_neighbors_and_errors():
    g = complete_graph(4)
    assert neighbors(g, 2) == [0, 1, 3]
    with pytest.raises(GraphError):
        neighbors(g, 4)
    with pytest.raises(GraphError):
        from_edges(3, [(0, 0)])
    with pytest.raises(GraphError):
        from_edges(3, [(0, 1, -1.0)])
    with pytest.raises(GraphError):
        generate_scale_free(3, 3, np.random.default_rng(0))


def test_edgelist_round_trip(tmp_path):
    g = generate_scale_free(20, 2, np.random.default_rng(1), weight=0.7)
    p = tmp_path / "g.edgelist"
    write_edgelist(g, p)
    assert read_edgelist(p) == g


def test_edgelist_keeps_isolated_tail_nodes(tmp_path):
    g = from_edges(5, [(0, 1)])
    p = tmp_path / "g.edgelist"
    write_edgelist(g, p)
    assert read_edgelist(p).n == 5
