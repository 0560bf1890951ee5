import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cscount.graph import (
    GraphFormatError,
    LabeledGraph,
    build_cycle_index,
    compute_degeneracy,
    dump_graph,
    load_graph,
)
from instances import complete_graph, cycle_graph, path_graph, random_graph
from scenarios import brute_four_cycles, brute_triangles


@st.composite
def small_graphs(draw, max_n=12):
    n = draw(st.integers(1, max_n))
    labels = draw(st.lists(st.integers(0, 3), min_size=n, max_size=n))
    pairs = list(itertools.combinations(range(n), 2))
    mask = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    return LabeledGraph.from_edges(labels, [e for e, keep in zip(pairs, mask) if keep])


class TestLoad:
    def test_minimal(self):
        g = load_graph("t 2 1\nv 0 0\nv 1 1\ne 0 1\n")
        assert g.vertex_count == 2
        assert g.edge_count == 1
        assert g.labels == (0, 1)

    def test_k5(self):
        text = "t 5 10\n" + "".join(f"v {i} 0 4\n" for i in range(5))
        text += "".join(f"e {a} {b}\n" for a, b in itertools.combinations(range(5), 2))
        g = load_graph(text)
        assert g.max_degree == 4
        assert g.degeneracy == 4

    def test_self_loop_rejected(self):
        with pytest.raises(GraphFormatError, match="self-loop"):
            load_graph("t 1 1\nv 0 0\ne 0 0\n")

    @pytest.mark.parametrize(
        "text, line",
        [
            ("t 2 1\nv 0 0\nv 1 0\ne 0 5\n", 4),
            ("t 2 1\nv 0 0\nv 1 zero\n", 3),
            ("t 2 1\nv 0 0\nv 1 0\nx 0 1\n", 4),
            ("t 2 1\nv 0 0\nv 2 0\n", 3),
        ],
    )
    def test_errors_carry_line_numbers(self, text, line):
        with pytest.raises(GraphFormatError) as info:
            load_graph(text)
        assert info.value.line_no == line

    def test_missing_vertex_line(self):
        with pytest.raises(GraphFormatError):
            load_graph("t 3 0\nv 0 0\nv 1 0\n")

    def test_duplicates_and_comments(self):
        g = load_graph("# demo\nt 3 4\nv 0 1\nv 1 1 2 # degree ignored\nv 2 0\ne 0 1\ne 1 0\ne 1 2\ne 0 1\n")
        assert g.edges() == [(0, 1), (1, 2)]
        assert g.adjacency[1] == (0, 2)

    def test_string_labels_share_a_map(self):
        labels: dict[str, int] = {}
        g = load_graph("t 2 1\nv 0 C\nv 1 N\ne 0 1\n", labels)
        h = load_graph("t 1 0\nv 0 N\n", labels)
        assert labels == {"C": 0, "N": 1}
        assert g.labels == (0, 1)
        assert h.labels == (1,)

    @settings(max_examples=60, deadline=None)
    @given(small_graphs())
    def test_round_trip(self, g):
        assert load_graph(dump_graph(g)) == g


class TestInvariants:
    @settings(max_examples=80, deadline=None)
    @given(small_graphs())
    def test_structure(self, g):
        for v, adj in enumerate(g.adjacency):
            assert list(adj) == sorted(set(adj))
            assert v not in adj
            for w in adj:
                assert v in g.adjacency[w]
            for label in set(g.labels):
                assert g.label_degree[v].get(label, 0) == sum(1 for w in adj if g.labels[w] == label)
        assert g.degeneracy <= g.max_degree


class TestDegeneracy:
    def test_tree(self):
        assert compute_degeneracy(path_graph(7)) == 1
        star = LabeledGraph.from_edges([0] * 6, [(0, i) for i in range(1, 6)])
        assert compute_degeneracy(star) == 1

    def test_cycle(self):
        assert compute_degeneracy(cycle_graph(6)) == 2

    def test_complete(self):
        assert compute_degeneracy(complete_graph(5)) == 4

    @settings(max_examples=40, deadline=None)
    @given(small_graphs(max_n=8))
    def test_matches_definition(self, g):
        # smallest d such that every induced subgraph has a vertex of degree <= d
        best = 0
        for r in range(1, g.vertex_count + 1):
            for sub in itertools.combinations(range(g.vertex_count), r):
                s = set(sub)
                best = max(best, min(sum(1 for w in g.adjacency[v] if w in s) for v in sub))
        assert compute_degeneracy(g) == best


class TestCycleIndex:
    def test_k3(self):
        idx = build_cycle_index(complete_graph(3))
        assert idx.total_triangles == 1
        assert idx.triangles(0, 1) == (2,)
        assert idx.triangles(2, 1) == (0,)
        assert idx.triangles(0, 2) == (1,)

    def test_c4(self):
        # a=0, b=1, c=2, d=3
        idx = build_cycle_index(cycle_graph(4))
        assert idx.total_four_cycles == 1
        assert idx.four_cycles(0, 1) == ((2, 3),)
        assert idx.four_cycles(1, 0) == ((3, 2),)
        assert idx.total_triangles == 0

    def test_k5_totals(self):
        idx = build_cycle_index(complete_graph(5))
        assert idx.total_triangles == 10
        # 5 vertex subsets of size 4, three 4-cycles each
        assert idx.total_four_cycles == 15

    def test_caps_disable(self):
        idx = build_cycle_index(complete_graph(5), tri_cap=3, quad_cap=3)
        assert not idx.triangles_enabled and not idx.four_cycles_enabled
        assert idx.triangle_apexes == {} and idx.four_cycle_edges == {}
        assert idx.total_triangles == 10 and idx.total_four_cycles == 15

    def test_caps_at_boundary_stay_enabled(self):
        idx = build_cycle_index(complete_graph(5), tri_cap=10, quad_cap=15)
        assert idx.triangles_enabled and idx.four_cycles_enabled

    @settings(max_examples=80, deadline=None)
    @given(small_graphs())
    def test_totals_match_brute_force(self, g):
        idx = build_cycle_index(g)
        assert idx.total_triangles == brute_triangles(g)
        assert idx.total_four_cycles == brute_four_cycles(g)
        assert 3 * idx.total_triangles == sum(len(x) for x in idx.triangle_apexes.values())
        assert 4 * idx.total_four_cycles == sum(len(x) for x in idx.four_cycle_edges.values())

    @settings(max_examples=60, deadline=None)
    @given(small_graphs(max_n=9))
    def test_membership_definitions(self, g):
        idx = build_cycle_index(g)
        n = g.vertex_count
        for a, b in g.edges():
            for x, y in [(a, b), (b, a)]:
                apexes = {c for c in range(n) if c not in (x, y) and g.has_edge(x, c) and g.has_edge(y, c)}
                assert set(idx.triangles(x, y)) == apexes
                assert len(apexes) <= min(g.degree(x), g.degree(y))
                quads = {
                    (c, d)
                    for c in range(n)
                    for d in range(n)
                    if len({x, y, c, d}) == 4 and g.has_edge(y, c) and g.has_edge(c, d) and g.has_edge(d, x)
                }
                assert set(idx.four_cycles(x, y)) == quads

    def test_disabled_index_still_reports_totals(self):
        g = random_graph(40, 0.5, 2, 3)
        idx = build_cycle_index(g, tri_cap=1, quad_cap=1)
        assert idx.total_triangles == brute_triangles(g)
