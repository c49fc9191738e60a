import numpy as np
import pytest

from subenum.csr import (
    CsrGraph,
    EdgeListParseError,
    SnapshotFormatError,
    build_csr,
    graph_stats,
    load_graph,
    load_snapshot,
    parse_edge_list,
    save_snapshot,
    structurally_equal,
    triangle_count,
)
from subenum.gen import clique, erdos_renyi


def test_build_csr_basic():
    g = build_csr([(0, 1), (1, 2)])
    assert g.vertex_count == 3
    assert g.edge_count == 2
    assert list(g.neighbors_of(1)) == [0, 2]
    assert g.degree(0) == 1
    assert g.has_edge(0, 1) and g.has_edge(1, 0)
    assert not g.has_edge(0, 2)


def test_build_csr_dedup_and_self_loops():
    # duplicates collapse; a self loop disappears but keeps its vertex alive
    g = build_csr([(0, 1), (1, 0), (0, 1), (2, 2)])
    assert g.vertex_count == 3
    assert g.edge_count == 1
    assert g.degree(2) == 0


def test_build_csr_dense_reindex_preserves_relative_order():
    g = build_csr([(10, 40), (40, 99)])
    # ids 10 < 40 < 99 become 0 < 1 < 2
    assert g.vertex_count == 3
    assert list(g.neighbors_of(1)) == [0, 2]


def test_rows_strictly_ascending():
    g = build_csr(erdos_renyi(60, 0.3, seed=3))
    for u in range(g.vertex_count):
        row = g.neighbors_of(u)
        assert np.all(np.diff(row) > 0)


def test_dtypes():
    g = build_csr([(0, 1)])
    assert g.offsets.dtype == np.int64
    assert g.neighbors.dtype == np.int32


def test_empty_graph():
    g = build_csr([])
    assert g.vertex_count == 0 and g.edge_count == 0
    st = graph_stats(g)
    assert st.triangle_count == 0
    assert st.p1 == 0.0 and st.p2 == 0.0


def test_parse_edge_list_comments_and_errors():
    edges = parse_edge_list("# header\n% more\n0 1\n\n1 2\n")
    assert edges == [(0, 1), (1, 2)]
    with pytest.raises(EdgeListParseError) as err:
        parse_edge_list("0 1\n0 1 2\n")
    assert err.value.line_no == 2
    with pytest.raises(EdgeListParseError):
        parse_edge_list("0 -1\n")
    with pytest.raises(EdgeListParseError):
        parse_edge_list("a b\n")


def test_edge_list_round_trip():
    g = build_csr(erdos_renyi(40, 0.2, seed=5))
    text = "\n".join(f"{u} {v}" for u, v in g.edge_list())
    g2 = build_csr(parse_edge_list(text))
    assert structurally_equal(g, g2)


def test_triangle_count_matches_cubic_oracle():
    rng_seeds = range(20)
    for seed in rng_seeds:
        g = build_csr(erdos_renyi(30, 0.25, seed=seed))
        n = g.vertex_count
        naive = 0
        for a in range(n):
            for b in range(a + 1, n):
                if not g.has_edge(a, b):
                    continue
                for c in range(b + 1, n):
                    if g.has_edge(a, c) and g.has_edge(b, c):
                        naive += 1
        assert triangle_count(g) == naive


def test_graph_stats_k4():
    g = build_csr(clique(4))
    st = graph_stats(g)
    assert st.vertex_count == 4 and st.edge_count == 6
    assert st.max_degree == 3
    assert st.triangle_count == 4
    assert abs(st.p1 - 0.75) < 1e-12
    assert abs(st.p2 - 4 * 4 / 144) < 1e-12


def test_snapshot_round_trip(tmp_path):
    g = build_csr(erdos_renyi(50, 0.15, seed=9))
    path = tmp_path / "g.csrg"
    save_snapshot(g, path)
    g2 = load_snapshot(path)
    assert structurally_equal(g, g2)
    # load_graph sniffs the magic
    g3 = load_graph(path)
    assert structurally_equal(g, g3)


def test_load_graph_text(tmp_path):
    path = tmp_path / "g.txt"
    path.write_text("0 1\n1 2\n")
    g = load_graph(path)
    assert g.edge_count == 2


def test_snapshot_rejects_garbage(tmp_path):
    path = tmp_path / "bad.csrg"
    path.write_bytes(b"CSRG" + b"\x00" * 10)
    with pytest.raises(SnapshotFormatError):
        load_snapshot(path)


def test_neighbors_of_range_check():
    g = build_csr([(0, 1)])
    with pytest.raises(IndexError):
        g.neighbors_of(5)
