"""Random instance generators shared by the test modules."""

from __future__ import annotations

import random

from cscount.graph import LabeledGraph


def random_graph(n: int, p: float, n_labels: int, seed: int) -> LabeledGraph:
    r = random.Random(seed)
    labels = [r.randrange(n_labels) for _ in range(n)]
    edges = [(a, b) for a in range(n) for b in range(a + 1, n) if r.random() < p]
    return LabeledGraph.from_edges(labels, edges)


def random_connected_subgraph(g: LabeledGraph, k: int, seed: int, induced: bool = True) -> LabeledGraph | None:
    """Query grown by random expansion from a random vertex of ``g``.

    Non-induced queries keep a random spanning subset of the edges, which
    makes them sparser than the region they came from.
    """
    r = random.Random(seed)
    start = r.randrange(g.vertex_count)
    chosen = [start]
    tree_edges = []
    frontier = set(g.adjacency[start])
    while len(chosen) < k:
        frontier -= set(chosen)
        if not frontier:
            return None
        w = r.choice(sorted(frontier))
        parent = r.choice([x for x in chosen if g.has_edge(x, w)])
        chosen.append(w)
        tree_edges.append((parent, w))
        frontier |= set(g.adjacency[w])
    idx = {v: i for i, v in enumerate(chosen)}
    edges = set((idx[a], idx[b]) for a, b in tree_edges)
    for a in chosen:
        for b in g.adjacency[a]:
            if b in idx and idx[a] < idx[b] and (induced or r.random() < 0.5):
                edges.add((idx[a], idx[b]))
    return LabeledGraph.from_edges([g.labels[v] for v in chosen], edges)


def random_instance(seed: int, q_range=(3, 8), n_range=(20, 64), label_range=(2, 4), p_range=(0.2, 0.5)):
    """(query, data) pair; the query is a connected subgraph of the data graph."""
    r = random.Random(seed)
    while True:
        n = r.randint(*n_range)
        g = random_graph(n, r.uniform(*p_range), r.randint(*label_range), r.randrange(2**31))
        q = random_connected_subgraph(g, r.randint(*q_range), r.randrange(2**31), induced=r.random() < 0.5)
        if q is not None:
            return q, g


def complete_graph(n: int, label: int = 0) -> LabeledGraph:
    return LabeledGraph.from_edges([label] * n, [(a, b) for a in range(n) for b in range(a + 1, n)])


def cycle_graph(n: int, label: int = 0) -> LabeledGraph:
    return LabeledGraph.from_edges([label] * n, [(i, (i + 1) % n) for i in range(n)])


def path_graph(n: int, label: int = 0) -> LabeledGraph:
    return LabeledGraph.from_edges([label] * n, [(i, i + 1) for i in range(n - 1)])
