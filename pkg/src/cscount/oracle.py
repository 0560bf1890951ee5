"""Exact ground truth: backtracking embedding counts and candidate-tree enumeration."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from .candidate_space import CandidateSpace
from .graph import LabeledGraph
from .graph_sampler import _greedy_order, matching_order
from .tree_sampler import RootedSpanningTree

ENUMERATION_GUARD = 10**6


@dataclass
class OracleResult:
    count: int
    embeddings: list[dict[int, int]] = field(default_factory=list)
    elapsed: float = 0.0
    partial: bool = False


class _Timeout(Exception):
    pass


def exact_count(
    q: LabeledGraph,
    g: LabeledGraph,
    cs: CandidateSpace | None = None,
    limit: int | None = None,
    timeout: float | None = None,
    keep_embeddings: int = 0,
) -> OracleResult:
    """Count embeddings of ``q`` in ``g`` by plain backtracking.

    With ``cs``, extensions come from its candidate-neighbor sets; without
    it, from raw adjacency filtered by label. ``limit`` stops once that many
    embeddings are found; ``timeout`` (seconds) stops with ``partial=True``.
    Vertex sets are Python ints used as bitsets.
    """
    start = time.perf_counter()
    n = q.vertex_count
    if n == 0:
        return OracleResult(1, [{}] if keep_embeddings else [], 0.0)
    if cs is not None:
        if cs.empty:
            return OracleResult(0, [], time.perf_counter() - start)
        order = matching_order(cs)
        roots = _mask(cs.candidates[order[0]])
        table: dict[tuple[int, int], dict[int, int]] = {}
        for u in range(n):
            for u2 in q.adjacency[u]:
                table[(u2, u)] = {v2: _mask(cs.neighbors(u2, u, v2)) for v2 in cs.candidates[u2]}

        def extend(u: int, u2: int, v2: int) -> int:
            return table[(u2, u)].get(v2, 0)
    else:
        by_label: dict[int, int] = {}
        for v, lab in enumerate(g.labels):
            by_label[lab] = by_label.get(lab, 0) | (1 << v)
        sizes = [by_label.get(q.labels[u], 0).bit_count() for u in range(n)]
        first = min(range(n), key=lambda u: (sizes[u], u))
        order = _greedy_order(q, first)
        roots = by_label.get(q.labels[first], 0)
        nbr: list[dict[int, int]] = []
        for v in range(g.vertex_count):
            m: dict[int, int] = {}
            for w in g.adjacency[v]:
                m[g.labels[w]] = m.get(g.labels[w], 0) | (1 << w)
            nbr.append(m)

        def extend(u: int, u2: int, v2: int) -> int:
            return nbr[v2].get(q.labels[u], 0)

    back = [[u2 for u2 in q.adjacency[u] if u2 in order[:i]] for i, u in enumerate(order)]
    mapping: dict[int, int] = {}
    found: list[dict[int, int]] = []
    count = 0
    ticks = 0
    enumerate_last = bool(keep_embeddings) or limit is not None

    def recurse(depth: int, used: int) -> bool:
        nonlocal count, ticks
        ticks += 1
        if timeout is not None and ticks % 4096 == 0 and time.perf_counter() - start > timeout:
            raise _Timeout
        u = order[depth]
        if depth == 0:
            cands = roots
        else:
            cands = ~used
            for u2 in back[depth]:
                cands &= extend(u, u2, mapping[u2])
        if depth == n - 1 and not enumerate_last:
            count += cands.bit_count()
            return False
        while cands:
            low = cands & -cands
            cands ^= low
            v = low.bit_length() - 1
            if depth == n - 1:
                count += 1
                if len(found) < keep_embeddings:
                    done = dict(mapping)
                    done[u] = v
                    found.append(done)
                if limit is not None and count >= limit:
                    return True
                continue
            mapping[u] = v
            stop = recurse(depth + 1, used | low)
            del mapping[u]
            if stop:
                return True
        return False

    partial = False
    try:
        recurse(0, 0)
    except _Timeout:
        partial = True
    return OracleResult(count, found, time.perf_counter() - start, partial)


def _mask(vertices) -> int:
    m = 0
    for v in vertices:
        m |= 1 << v
    return m


def enumerate_candidate_trees(
    cs: CandidateSpace, tree: RootedSpanningTree, guard: int = ENUMERATION_GUARD
) -> list[dict[int, int]]:
    """All homomorphisms of ``tree`` into the CS, root first, in BFS order."""
    order = tree.bfs_order
    out: list[dict[int, int]] = []
    mapping: dict[int, int] = {}

    def recurse(i: int) -> None:
        if i == len(order):
            if len(out) >= guard:
                raise OverflowError(f"more than {guard} candidate trees")
            out.append(dict(mapping))
            return
        u = order[i]
        if i == 0:
            options = cs.candidate_list(u)
        else:
            p = tree.parent[u]
            options = cs.neighbor_list(p, u, mapping[p])
        for v in options:
            mapping[u] = v
            recurse(i + 1)
        mapping.pop(u, None)

    if not cs.empty:
        recurse(0)
    return out


def is_embedding(q: LabeledGraph, g: LabeledGraph, mapping: dict[int, int]) -> bool:
    if len(mapping) != q.vertex_count or len(set(mapping.values())) != len(mapping):
        return False
    if any(q.labels[u] != g.labels[v] for u, v in mapping.items()):
        return False
    return all(g.has_edge(mapping[a], mapping[b]) for a, b in q.edges())
