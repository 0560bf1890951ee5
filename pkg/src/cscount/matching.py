"""Maximum bipartite matching and maximally matchable edges."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable, Sequence


@dataclass
class LocalBipartiteGraph:
    """Bipartite graph with left vertices indexed ``0..len(left)-1``.

    ``edges[i]`` lists the right-side vertices adjacent to ``left[i]``.
    """

    left: list[Hashable]
    right: list[Hashable]
    edges: list[list[Hashable]] = field(default_factory=list)

    @classmethod
    def from_pairs(cls, left: Sequence, right: Sequence, pairs) -> LocalBipartiteGraph:
        pos = {x: i for i, x in enumerate(left)}
        adj: list[list] = [[] for _ in left]
        for a, b in pairs:
            if b not in adj[pos[a]]:
                adj[pos[a]].append(b)
        return cls(list(left), list(right), adj)

    def pairs(self) -> set[tuple]:
        return {(self.left[i], r) for i, rs in enumerate(self.edges) for r in rs}


def max_bipartite_matching(b: LocalBipartiteGraph) -> tuple[int, dict]:
    """Augmenting-path maximum matching; returns ``(size, {left: right})``."""
    match_right: dict = {}

    def augment(i: int, seen: set) -> bool:
        for r in b.edges[i]:
            if r in seen:
                continue
            seen.add(r)
            j = match_right.get(r)
            if j is None or augment(j, seen):
                match_right[r] = i
                return True
        return False

    for i in range(len(b.left)):
        augment(i, set())
    matching = {b.left[i]: r for r, i in match_right.items()}
    return len(matching), matching


def has_augmenting_path(b: LocalBipartiteGraph, matching: dict) -> bool:
    match_right = {r: l for l, r in matching.items()}
    idx = {x: i for i, x in enumerate(b.left)}
    visited: set = set()

    def search(i: int) -> bool:
        for r in b.edges[i]:
            if r in visited:
                continue
            visited.add(r)
            j = match_right.get(r)
            if j is None or search(idx[j]):
                return True
        return False

    return any(b.left[i] not in matching and search(i) for i in range(len(b.left)))


def maximally_matchable_edges(b: LocalBipartiteGraph, matching: dict, check: bool = False) -> set[tuple]:
    """Edges of ``b`` that belong to at least one maximum matching.

    ``matching`` must be maximum. In the directed graph with matched edges
    oriented right->left and the rest left->right, an unmatched edge (l, r)
    is maximally matchable iff l and r share a strongly connected component,
    l is reachable from a free left vertex, or a free right vertex is
    reachable from r.
    """
    if check and has_augmenting_path(b, matching):
        raise ValueError("matching is not maximum")
    # node ids: ("L", i) / ("R", r)
    match_right = {r: l for l, r in matching.items()}
    succ: dict[tuple, list[tuple]] = {}
    pred: dict[tuple, list[tuple]] = {}
    nodes: list[tuple] = [("L", i) for i in range(len(b.left))]
    seen_right: set = set()
    for i, rs in enumerate(b.edges):
        for r in rs:
            if r not in seen_right:
                seen_right.add(r)
                nodes.append(("R", r))
            if matching.get(b.left[i]) == r:
                src, dst = ("R", r), ("L", i)
            else:
                src, dst = ("L", i), ("R", r)
            succ.setdefault(src, []).append(dst)
            pred.setdefault(dst, []).append(src)

    free_left = [("L", i) for i in range(len(b.left)) if b.left[i] not in matching]
    free_right = [("R", r) for r in seen_right if r not in match_right]
    from_free_left = _reach(free_left, succ)
    to_free_right = _reach(free_right, pred)
    comp = _scc(nodes, succ)

    result = set()
    for i, rs in enumerate(b.edges):
        l = b.left[i]
        for r in rs:
            if (
                matching.get(l) == r
                or comp[("L", i)] == comp[("R", r)]
                or ("L", i) in from_free_left
                or ("R", r) in to_free_right
            ):
                result.add((l, r))
    return result


def _reach(starts, adj) -> set:
    seen = set(starts)
    stack = list(starts)
    while stack:
        x = stack.pop()
        for y in adj.get(x, ()):
            if y not in seen:
                seen.add(y)
                stack.append(y)
    return seen


def _scc(nodes, succ) -> dict:
    """Iterative Tarjan; returns node -> component id."""
    index: dict = {}
    low: dict = {}
    on_stack: set = set()
    stack: list = []
    comp: dict = {}
    counter = 0
    n_comp = 0
    for root in nodes:
        if root in index:
            continue
        work = [(root, iter(succ.get(root, ())))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(succ.get(w, ()))))
                    advanced = True
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
            if low[v] == index[v]:
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp[w] = n_comp
                    if w == v:
                        break
                n_comp += 1
    return comp
