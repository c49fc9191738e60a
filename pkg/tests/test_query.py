import pytest

from conftest import pool_query, random_connected_query
from subenum.query import (
    QueryGraph,
    QueryParseError,
    automorphism_group,
    build_schedule,
    connected_orderings,
    generate_restrictions,
    parse_query,
    position_scores,
    restriction_scores,
    schedule_to_json,
    verify_restrictions,
)


def test_parse_edge_form():
    q = parse_query("3\n0 1\n1 2\n")
    assert q.vertex_count == 3
    assert q.edges() == [(0, 1), (1, 2)]


def test_parse_bitstring_form():
    # triangle as a 3x3 adjacency matrix
    q = parse_query("011101110")
    assert q.vertex_count == 3
    assert q.edges() == [(0, 1), (0, 2), (1, 2)]


def test_parse_comments_ignored():
    q = parse_query("# triangle\n3\n0 1\n% edge\n1 2\n0 2\n")
    assert q.degree(0) == 2


@pytest.mark.parametrize(
    "text",
    [
        "",
        "x\n0 1\n",
        "2\n0 1 2\n",
        "2\na b\n",
        "01101",  # length not a perfect square
        "0110010110010110",  # asymmetric 4x4
        "010100000",  # disconnected after parsing (vertex 2 isolated)
    ],
)
def test_parse_rejects(text):
    with pytest.raises(QueryParseError):
        parse_query(text)


def test_from_edges_validation():
    with pytest.raises(QueryParseError):
        QueryGraph.from_edges(1, [])
    with pytest.raises(QueryParseError):
        QueryGraph.from_edges(9, [(i, i + 1) for i in range(8)])
    with pytest.raises(QueryParseError):
        QueryGraph.from_edges(3, [(0, 3)])
    with pytest.raises(QueryParseError):
        QueryGraph.from_edges(2, [(0, 0), (0, 1)])
    with pytest.raises(QueryParseError):
        QueryGraph.from_edges(3, [(0, 1)])  # vertex 2 unreachable


def test_connected_orderings_triangle():
    orders = list(connected_orderings(pool_query("triangle")))
    assert orders == [
        (0, 1, 2),
        (0, 2, 1),
        (1, 0, 2),
        (1, 2, 0),
        (2, 0, 1),
        (2, 1, 0),
    ]


def test_connected_orderings_path_excludes_disconnected_starts():
    orders = set(connected_orderings(pool_query("path3")))
    # 0-2 is not an edge, so orders like (0, 2, 1) are invalid
    assert (0, 2, 1) not in orders
    assert (1, 0, 2) in orders
    assert len(orders) == 4


def test_position_scores_clique4():
    q = pool_query("clique4")
    assert position_scores(q, (0, 1, 2, 3)) == (0, 8, 12, 14)


def test_restriction_scores_orientation_insensitive():
    # (2, 0) is a check "position 2 id < position 0 id"; for scoring it is
    # the undirected pair {0, 2}
    assert restriction_scores(4, [(2, 0)]) == restriction_scores(4, [(0, 2)])
    assert restriction_scores(4, [(0, 1), (1, 3), (2, 0)]) == (0, 8, 8, 4)


@pytest.mark.parametrize(
    "name,order,restrictions,scores",
    [
        ("edge", (0, 1), ((0, 1),), (0, 2)),
        ("path3", (1, 0, 2), ((1, 2),), (0, 4, 4)),
        ("triangle", (0, 1, 2), ((0, 1), (2, 0)), (0, 4, 6)),
        ("path4", (1, 2, 0, 3), ((0, 1),), (0, 8, 8, 4)),
        ("star4", (0, 1, 2, 3), ((1, 2), (3, 1)), (0, 8, 8, 8)),
        ("cycle4", (0, 1, 3, 2), ((0, 1), (0, 3), (1, 2)), (0, 8, 8, 6)),
        ("diamond", (1, 2, 0, 3), ((0, 1), (2, 3)), (0, 8, 12, 12)),
        ("clique4", (0, 1, 2, 3), ((0, 1), (1, 3), (2, 0)), (0, 8, 12, 14)),
        ("tailed_triangle", (2, 0, 1, 3), ((1, 2),), (0, 8, 12, 8)),
        ("house", (0, 1, 4, 3, 2), ((0, 1),), (0, 16, 24, 16, 10)),
    ],
)
def test_build_schedule_frozen(name, order, restrictions, scores):
    s = build_schedule(pool_query(name))
    assert s.order == order
    assert s.restrictions == restrictions
    assert s.scores == scores
    assert s.variant == "edge"


def test_build_schedule_variant_passthrough():
    s = build_schedule(pool_query("triangle"), variant="vertex")
    assert s.variant == "vertex"
    with pytest.raises(ValueError):
        build_schedule(pool_query("triangle"), variant="induced")


@pytest.mark.parametrize(
    "name,size",
    [("clique4", 24), ("path4", 2), ("star4", 6), ("triangle", 6), ("cycle4", 8)],
)
def test_automorphism_group_sizes(name, size):
    assert len(automorphism_group(pool_query(name))) == size


def test_automorphisms_preserve_adjacency():
    q = pool_query("diamond")
    for gamma in automorphism_group(q):
        for i in range(q.vertex_count):
            for j in range(i + 1, q.vertex_count):
                assert q.has_edge(i, j) == q.has_edge(gamma[i], gamma[j])


@pytest.mark.parametrize("name", sorted(__import__("conftest").QUERY_POOL))
def test_restrictions_valid_on_pool(name):
    q = pool_query(name)
    s = build_schedule(q)
    assert verify_restrictions(q, s.order, s.restrictions)


def test_all_alternatives_valid_for_clique4():
    q = pool_query("clique4")
    order = (0, 1, 2, 3)
    alts = generate_restrictions(q, order)
    assert len(alts) > 1
    for pairs in alts:
        assert verify_restrictions(q, order, pairs)


def test_restrictions_valid_randomized(rng):
    for _ in range(12):
        q = random_connected_query(rng, rng.randint(3, 5))
        s = build_schedule(q)
        assert verify_restrictions(q, s.order, s.restrictions)


def test_asymmetric_query_has_no_restrictions():
    # triangle with unequal tails hanging off two of its corners
    q = QueryGraph.from_edges(6, [(0, 1), (0, 2), (1, 2), (1, 3), (2, 4), (4, 5)])
    assert len(automorphism_group(q)) == 1
    s = build_schedule(q)
    assert s.restrictions == ()


def test_schedule_json_deterministic():
    s = build_schedule(pool_query("clique4"))
    assert schedule_to_json(s) == schedule_to_json(s)
    doc = schedule_to_json(s)
    assert '"order"' in doc and '"restrictions"' in doc
