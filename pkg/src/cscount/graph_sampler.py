"""Stratified recursive sampling over partial embeddings."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .candidate_space import CandidateSpace
from .graph import LabeledGraph

DEFAULT_K = 100_000
DEFAULT_SUBSET_DIVISOR = 4


def matching_order(cs: CandidateSpace) -> list[int]:
    """Smallest candidate set first, then most already-placed neighbors (ties: smaller id)."""
    q = cs.query
    n = q.vertex_count
    if n == 0:
        return []
    first = min(range(n), key=lambda u: (cs.size(u), u))
    return _greedy_order(q, first)


def _greedy_order(q: LabeledGraph, first: int) -> list[int]:
    n = q.vertex_count
    order = [first]
    placed = [False] * n
    placed[first] = True
    links = [0] * n
    for w in q.adjacency[first]:
        links[w] += 1
    for _ in range(n - 1):
        best = max((u for u in range(n) if not placed[u]), key=lambda u: (links[u], -u))
        if links[best] == 0:
            raise ValueError("query graph is disconnected")
        order.append(best)
        placed[best] = True
        for w in q.adjacency[best]:
            links[w] += 1
    return order


def extendable_candidates(cs: CandidateSpace, mapping: dict[int, int], u: int) -> list[int]:
    """Intersection of C(u | u', M(u')) over mapped neighbors u', minus the image of M."""
    q = cs.query
    lists = [cs.neighbors(u2, u, mapping[u2]) for u2 in q.adjacency[u] if u2 in mapping]
    if not lists:
        if mapping:
            raise ValueError(f"query vertex {u} has no mapped neighbor")
        return cs.candidate_list(u)
    lists.sort(key=len)
    result = set(lists[0])
    for s in lists[1:]:
        result.intersection_update(s)
        if not result:
            return []
    image = set(mapping.values())
    return sorted(result - image)


def get_sample_size(query_size: int, tree_successes: int, K: float = DEFAULT_K) -> float:
    return query_size * K / math.sqrt(tree_successes + 1)


def subset_size(n_candidates: int, ub: float, k: int) -> int:
    sz = -(-n_candidates // k)
    if not math.isinf(ub):
        sz = min(sz, math.floor(ub))
    return max(1, sz)


@dataclass
class GraphSampler:
    """Recursive estimator of the number of embeddings extending a partial embedding.

    At each level the candidates of the next vertex form strata; a random
    subset of them is explored and the child estimates are scaled by
    ``|C_M(u)| / |S|``. ``ub`` caps the samples spent below a call, and each
    child receives the unspent budget divided among the remaining children.
    """

    cs: CandidateSpace
    order: list[int]
    rng: np.random.Generator
    k: int = DEFAULT_SUBSET_DIVISOR

    def __post_init__(self):
        q = self.cs.query
        pos = {u: i for i, u in enumerate(self.order)}
        self._back = [[u2 for u2 in q.adjacency[u] if pos[u2] < i] for i, u in enumerate(self.order)]

    def _extendable(self, depth: int, mapping: dict[int, int], image: set[int]) -> list[int] | set[int]:
        u = self.order[depth]
        back = self._back[depth]
        if not back:
            return self.cs.candidate_list(u) if depth == 0 else []
        nbr = self.cs.neighbors
        sets = sorted((nbr(u2, u, mapping[u2]) for u2 in back), key=len)
        result = set(sets[0])
        for other in sets[1:]:
            result.intersection_update(other)
            if not result:
                return result
        result.difference_update(image)
        return result

    def estimate(self, mapping: dict[int, int], ub: float, image: set[int] | None = None) -> tuple[float, int]:
        depth = len(mapping)
        if depth == len(self.order):
            return 1.0, 1
        if image is None:
            image = set(mapping.values())
        cands = self._extendable(depth, mapping, image)
        if not cands:
            return 0.0, 1
        sz = subset_size(len(cands), ub, self.k)
        if depth == len(self.order) - 1:
            # every child is a complete embedding worth (1, 1)
            return float(len(cands)), sz
        chosen = self._random_subset(sorted(cands), sz)
        u = self.order[depth]
        total = 0.0
        used = 0
        for i, v in enumerate(chosen):
            child_ub = (ub - used) / (sz - i)
            mapping[u] = v
            image.add(v)
            w, n = self.estimate(mapping, max(child_ub, 1.0), image)
            image.discard(v)
            del mapping[u]
            total += w
            used += n
        return len(cands) / sz * total, used

    def _random_subset(self, items: list[int], size: int) -> list[int]:
        if size >= len(items):
            return items
        # partial Fisher-Yates
        pool = list(items)
        n = len(pool)
        draws = self.rng.random(size)
        for i in range(size):
            j = min(i + int(draws[i] * (n - i)), n - 1)
            pool[i], pool[j] = pool[j], pool[i]
        return pool[:size]


def estimate_w(
    cs: CandidateSpace,
    mapping: dict[int, int],
    ub: float,
    order: list[int],
    rng: np.random.Generator,
    k: int = DEFAULT_SUBSET_DIVISOR,
) -> tuple[float, int]:
    if ub < 1:
        raise ValueError("ub must be at least 1")
    for u in order[: len(mapping)]:
        if u not in mapping:
            raise ValueError("mapping must cover a prefix of the matching order")
    return GraphSampler(cs, order, rng, k).estimate(dict(mapping), ub)


def candidate_graph_sampling(
    cs: CandidateSpace,
    tree_successes: int,
    rng: np.random.Generator,
    K: float = DEFAULT_K,
    k: int = DEFAULT_SUBSET_DIVISOR,
    ub: float | None = None,
) -> tuple[float, int]:
    """Estimate the embedding count; returns ``(estimate, samples_used)``.

    ``ub`` overrides the budget derived from the tree-sampling successes;
    ``math.inf`` with ``k=1`` degenerates to exhaustive backtracking.
    """
    if cs.empty:
        return 0.0, 0
    order = matching_order(cs)
    if ub is None:
        ub = get_sample_size(cs.query.vertex_count, tree_successes, K)
    return GraphSampler(cs, order, rng, k).estimate({}, max(ub, 1.0))
