from hypothesis import given, settings
from hypothesis import strategies as st

from cscount.matching import (
    LocalBipartiteGraph,
    has_augmenting_path,
    max_bipartite_matching,
    maximally_matchable_edges,
)
from scenarios import oracle_matchable


@st.composite
def bipartite_graphs(draw, max_side=8):
    nl = draw(st.integers(0, max_side))
    nr = draw(st.integers(0, max_side))
    pairs = [(i, j) for i in range(nl) for j in range(nr)]
    density = draw(st.floats(0.05, 0.8))
    mask = draw(st.lists(st.floats(0, 1), min_size=len(pairs), max_size=len(pairs)))
    chosen = [p for p, x in zip(pairs, mask) if x < density]
    return LocalBipartiteGraph.from_pairs(list(range(nl)), [f"r{j}" for j in range(nr)],
                                          [(i, f"r{j}") for i, j in chosen])


def test_two_left_one_right():
    b = LocalBipartiteGraph.from_pairs(["u1", "u2"], ["v1"], [("u1", "v1"), ("u2", "v1")])
    assert max_bipartite_matching(b)[0] == 1


def test_empty_right():
    b = LocalBipartiteGraph.from_pairs(["u1"], [], [])
    assert max_bipartite_matching(b) == (0, {})


def test_forced_pairing():
    b = LocalBipartiteGraph.from_pairs(["a", "b"], ["x", "y"], [("a", "x"), ("a", "y"), ("b", "x")])
    size, m = max_bipartite_matching(b)
    assert size == 2
    assert maximally_matchable_edges(b, m) == {("a", "y"), ("b", "x")}


def test_k22_all_edges():
    pairs = [(l, r) for l in "ab" for r in "xy"]
    b = LocalBipartiteGraph.from_pairs(list("ab"), list("xy"), pairs)
    _, m = max_bipartite_matching(b)
    assert maximally_matchable_edges(b, m) == set(pairs)


def test_single_edge():
    b = LocalBipartiteGraph.from_pairs(["a"], ["x"], [("a", "x")])
    _, m = max_bipartite_matching(b)
    assert maximally_matchable_edges(b, m) == {("a", "x")}


def test_non_maximum_matching_detected():
    b = LocalBipartiteGraph.from_pairs(["a", "b"], ["x", "y"], [("a", "x"), ("a", "y"), ("b", "x")])
    assert has_augmenting_path(b, {"a": "x"})
    try:
        maximally_matchable_edges(b, {"a": "x"}, check=True)
    except ValueError:
        pass
    else:
        raise AssertionError("expected a contract violation")


@settings(max_examples=300, deadline=None)
@given(bipartite_graphs())
def test_matches_exhaustive_enumeration(b):
    size, m = max_bipartite_matching(b)
    best, union = oracle_matchable(b)
    assert size == best
    assert len(set(m.values())) == size
    assert all((l, r) in b.pairs() for l, r in m.items())
    assert not has_augmenting_path(b, m)
    assert maximally_matchable_edges(b, m) == union
