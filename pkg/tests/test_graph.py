import io
import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from diffusion_centrality.graph import (Graph, GraphFormatError, complete_graph, cycle_graph,
                                        degrees, dump_edge_list, erdos_renyi, graph_metadata,
                                        load_edge_list, star_graph, transpose, write_metadata)


def test_load_minimal_cycle():
    g = load_edge_list(b"a\tb\nb\ta\n")
    assert g.node_count == 2 and g.edge_count == 2
    assert g.labels == ("a", "b")
    assert np.all(g.edges[2] == 1.0)


def test_load_empty_stream():
    g = load_edge_list(io.BytesIO(b""))
    assert g.node_count == 0 and g.edge_count == 0


def test_malformed_weight_names_line():
    with pytest.raises(GraphFormatError, match="line 1") as exc:
        load_edge_list(b"a a b\n")
    assert exc.value.line == 1


def test_comments_whitespace_and_weights():
    text = "# header\n\nx y 2.5\n  y\tz   0.5\n"
    g = load_edge_list(text.encode())
    assert g.labels == ("x", "y", "z")
    assert g.edge_set() == {(0, 1, 2.5), (1, 2, 0.5)}


@pytest.mark.parametrize("text, line", [
    ("a b\na b\n", 2),
    ("a b 0\n", 1),
    ("a b -1\n", 1),
    ("a b inf\n", 1),
    ("a b nan\n", 1),
    ("a\n", 1),
    ("a b 1 2\n", 1),
])
def test_rejects_bad_lines(text, line):
    with pytest.raises(GraphFormatError) as exc:
        load_edge_list(text.encode())
    assert exc.value.line == line


def test_self_loop_policy():
    g = load_edge_list(b"a a\n")
    assert g.edge_set() == {(0, 0, 1.0)}
    with pytest.raises(GraphFormatError, match="self-loop"):
        load_edge_list(b"a a\n", allow_self_loops=False)


def test_reverse_flag_flips_edges():
    g = load_edge_list(b"a b\n", reverse=True)
    assert g.edge_set() == {(1, 0, 1.0)}


def test_constructor_validation():
    with pytest.raises(ValueError):
        Graph(2, [0], [2])
    with pytest.raises(ValueError):
        Graph(2, [0, 0], [1, 1])
    with pytest.raises(ValueError):
        Graph(2, [0], [1], [0.0])


def test_degrees_cycle():
    d = degrees(cycle_graph(3))
    assert d.out_degree.tolist() == [1, 1, 1] and d.d_max == 1


def test_degrees_star():
    d = degrees(star_graph(4))
    assert d.out_degree.tolist() == [4, 0, 0, 0, 0] and d.d_max == 4


def test_degrees_weighted():
    g = Graph.from_edges([(0, 1, 2.5), (0, 2, 0.5)])
    assert degrees(g).out_degree[0] == 3.0


def test_adjacency_lists_agree():
    g = Graph.from_edges([(0, 2, 1.5), (0, 1, 1.0), (2, 0, 2.0)])
    assert g.out_adjacency() == [[(2, 1.5), (1, 1.0)], [], [(0, 2.0)]]
    assert g.in_adjacency() == [[(2, 2.0)], [(0, 1.0)], [(0, 1.5)]]
    out_edges = {(u, v, w) for u, lst in enumerate(g.out_adjacency()) for v, w in lst}
    in_edges = {(u, v, w) for v, lst in enumerate(g.in_adjacency()) for u, w in lst}
    assert out_edges == in_edges == g.edge_set()


def test_transpose_small():
    assert transpose(Graph.from_edges([(0, 1)])).edge_set() == {(1, 0, 1.0)}
    rev = transpose(cycle_graph(3))
    assert rev.edge_set() == {(1, 0, 1.0), (2, 1, 1.0), (0, 2, 1.0)}


def test_graph_is_immutable():
    g = complete_graph(3)
    with pytest.raises(ValueError):
        g.edges[0][0] = 2
    with pytest.raises(ValueError):
        g.out_degree[0] = 5


def test_metadata_sidecar(tmp_path):
    g = load_edge_list(b"a b\nb c\n")
    write_metadata(g, tmp_path / "m.json")
    meta = json.loads((tmp_path / "m.json").read_text())
    assert meta == graph_metadata(g) == {"node_count": 3, "edge_count": 2,
                                          "labels": {"a": 0, "b": 1, "c": 2}}


edge_lists = st.lists(
    st.tuples(st.integers(0, 7), st.integers(0, 7),
              st.floats(0.01, 100, allow_nan=False, allow_infinity=False)),
    max_size=30, unique_by=lambda e: (e[0], e[1]))


@given(edge_lists)
@settings(max_examples=60, deadline=None)
def test_degree_sums_and_transpose_involution(edges):
    g = Graph.from_edges(edges, node_count=8)
    d = degrees(g)
    total = sum(w for _, _, w in edges)
    assert d.out_degree.sum() == pytest.approx(total)
    assert d.in_degree.sum() == pytest.approx(total)
    assert transpose(transpose(g)) == g
    assert d.d_max == (max(d.out_degree) if len(edges) else 0)


@given(edge_lists)
@settings(max_examples=60, deadline=None)
def test_edge_list_round_trip(edges):
    labels = [f"n{i}" for i in range(8)]
    g = Graph.from_edges(edges, node_count=8, labels=labels)
    loaded = load_edge_list(dump_edge_list(g).encode())
    again = load_edge_list(dump_edge_list(loaded).encode())
    assert again == loaded
    # labels that appear in edges survive with identical weights
    named = {(g.label_of(u), g.label_of(v), w) for u, v, w in g.edge_set()}
    assert {(loaded.label_of(u), loaded.label_of(v), w) for u, v, w in loaded.edge_set()} == named


def test_erdos_renyi_deterministic():
    assert erdos_renyi(30, 0.1, seed=4) == erdos_renyi(30, 0.1, seed=4)
