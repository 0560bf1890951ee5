"""Candidate-tree counting, uniform tree sampling, and the adaptive stopping loop."""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator

import numpy as np
from scipy.special import betaincinv

from .candidate_space import CandidateSpace
from .graph import edge_key


@dataclass
class RootedSpanningTree:
    root: int
    parent: dict[int, int]
    bfs_order: list[int]
    non_tree_edges: list[tuple[int, int]]
    children: dict[int, list[int]] = field(default_factory=dict)

    def tree_edges(self) -> list[tuple[int, int]]:
        """(parent, child) pairs in BFS order."""
        return [(self.parent[u], u) for u in self.bfs_order[1:]]

    def postorder(self) -> list[int]:
        return self.bfs_order[::-1]


class ZeroEmbeddings(Exception):
    """A query edge has no candidate edges left, so the count is zero."""


def choose_spanning_tree(cs: CandidateSpace) -> RootedSpanningTree:
    """Prim's minimum spanning tree under candidate-edge density.

    Densities are compared as exact fractions, so the result minimizes the
    product of densities (equivalently the sum of log-densities).
    """
    q = cs.query
    n = q.vertex_count
    for a, b in q.edges():
        if cs.edge_count(a, b) == 0:
            raise ZeroEmbeddings(f"query edge ({a}, {b}) has no candidate edges")
    root = min(range(n), key=lambda u: (cs.size(u), u))
    parent: dict[int, int] = {}
    in_tree = {root}
    heap: list[tuple[Fraction, int, int]] = []

    def push(u: int) -> None:
        for w in q.adjacency[u]:
            if w not in in_tree:
                heapq.heappush(heap, (cs.density(u, w), u, w))

    push(root)
    while heap:
        _, p, u = heapq.heappop(heap)
        if u in in_tree:
            continue
        in_tree.add(u)
        parent[u] = p
        push(u)
    if len(in_tree) != n:
        raise ValueError("query graph is disconnected")
    return _root_tree(q, root, parent)


def _root_tree(q, root: int, parent: dict[int, int]) -> RootedSpanningTree:
    children: dict[int, list[int]] = {u: [] for u in range(q.vertex_count)}
    for u, p in parent.items():
        children[p].append(u)
    for c in children.values():
        c.sort()
    order = [root]
    for u in order:
        order.extend(children[u])
    tree = {edge_key(u, p) for u, p in parent.items()}
    non_tree = [e for e in q.edges() if e not in tree]
    return RootedSpanningTree(root, dict(parent), order, non_tree, children)


def tree_from_edges(q, root: int, edges: Iterable[tuple[int, int]]) -> RootedSpanningTree:
    """Root an arbitrary spanning tree of ``q`` given as undirected edges."""
    adj: dict[int, list[int]] = {u: [] for u in range(q.vertex_count)}
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    parent: dict[int, int] = {}
    seen = {root}
    stack = [root]
    while stack:
        u = stack.pop()
        for w in adj[u]:
            if w not in seen:
                seen.add(w)
                parent[w] = u
                stack.append(w)
    if len(seen) != q.vertex_count:
        raise ValueError("edges do not span the query")
    return _root_tree(q, root, parent)


def log_density(cs: CandidateSpace, u: int, u2: int) -> float:
    return math.log(cs.edge_count(u, u2)) - math.log(cs.size(u) * cs.size(u2))


@dataclass
class TreeCountTable:
    """``D[u][v]``: candidate trees of the subtree at ``u`` with ``u`` mapped to ``v``."""

    D: dict[int, dict[int, float | int]]
    total: float | int
    root: int


def count_candidate_trees(cs: CandidateSpace, tree: RootedSpanningTree, exact: bool = False) -> TreeCountTable:
    """Bottom-up evaluation of D(u, v) = prod_children sum_{C(child|u,v)} D(child, .).

    ``exact=True`` keeps Python integers instead of doubles.
    """
    one = 1 if exact else 1.0
    D: dict[int, dict[int, float | int]] = {}
    for u in tree.postorder():
        kids = tree.children.get(u, [])
        du = {}
        for v in cs.candidates[u]:
            val = one
            for c in kids:
                dc = D[c]
                val *= sum((dc[w] for w in cs.neighbors(u, c, v)), 0 if exact else 0.0)
                if not val:
                    break
            du[v] = val
        D[u] = du
    total = sum(D[tree.root].values(), 0 if exact else 0.0)
    return TreeCountTable(D, total, tree.root)


class TreeSampler:
    """Vectorized uniform sampler over candidate trees.

    Each tree edge (p, u) is stored in CSR form over the candidates of p.
    Within a row, draws use the normalized cumulative weights offset by the
    row index, so one ``searchsorted`` serves all rows at once.
    """

    def __init__(self, cs: CandidateSpace, tree: RootedSpanningTree, table: TreeCountTable):
        if not table.total > 0:
            raise ValueError("no candidate trees to sample from")
        self.cs = cs
        self.tree = tree
        q = cs.query
        self.n = q.vertex_count
        self.cands = {u: np.array(cs.candidate_list(u), dtype=np.int64) for u in range(self.n)}
        index = {u: {v: i for i, v in enumerate(self.cands[u])} for u in range(self.n)}

        root = tree.root
        w = np.array([float(table.D[root][v]) for v in self.cands[root]])
        self.root_cdf = _normalized_cdf(w)

        self.edges = {}
        for p, u in tree.tree_edges():
            du = table.D[u]
            flat: list[int] = []
            keys: list[float] = []
            offsets = [0]
            last = []
            for i, vp in enumerate(self.cands[p]):
                row = cs.neighbor_list(p, u, int(vp))
                weights = np.array([float(du[x]) for x in row])
                cdf = _normalized_cdf(weights) if weights.sum() > 0 else np.ones(len(row))
                flat.extend(index[u][x] for x in row)
                keys.extend(i + cdf)
                positive = np.nonzero(weights > 0)[0]
                last.append(offsets[-1] + (int(positive[-1]) if len(positive) else len(row) - 1))
                offsets.append(len(flat))
            self.edges[u] = (
                p,
                np.array(flat, dtype=np.int64),
                np.array(keys),
                np.array(offsets, dtype=np.int64),
                np.array(last, dtype=np.int64),
            )

        self.non_tree = []
        nv = cs.data.vertex_count
        for a, b in tree.non_tree_edges:
            pairs = cs.candidate_edges(a, b)
            keys = np.array(sorted(x * nv + y for x, y in pairs), dtype=np.int64)
            self.non_tree.append((a, b, keys))
        self._nv = nv

    def sample_indices(self, rng: np.random.Generator, size: int) -> dict[int, np.ndarray]:
        """Candidate-index arrays per query vertex for ``size`` independent trees."""
        idx: dict[int, np.ndarray] = {}
        r = rng.random(size)
        idx[self.tree.root] = np.minimum(np.searchsorted(self.root_cdf, r, side="right"), len(self.root_cdf) - 1)
        for u in self.tree.bfs_order[1:]:
            p, flat, keys, offsets, last = self.edges[u]
            rows = idx[p]
            target = rows + rng.random(size)
            pos = np.searchsorted(keys, target, side="right")
            pos = np.clip(pos, offsets[rows], last[rows])
            idx[u] = flat[pos]
        return idx

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """``(size, |V_q|)`` array of data vertices; column u is s(u)."""
        idx = self.sample_indices(rng, size)
        out = np.empty((size, self.n), dtype=np.int64)
        for u in range(self.n):
            out[:, u] = self.cands[u][idx[u]]
        return out

    def check(self, samples: np.ndarray) -> np.ndarray:
        """Boolean mask: injective and every non-tree edge maps to a candidate edge."""
        ok = np.ones(len(samples), dtype=bool)
        for i in range(self.n):
            for j in range(i + 1, self.n):
                ok &= samples[:, i] != samples[:, j]
        for a, b, keys in self.non_tree:
            k = samples[:, a] * self._nv + samples[:, b]
            if len(keys) == 0:
                ok[:] = False
                break
            pos = np.minimum(np.searchsorted(keys, k), len(keys) - 1)
            ok &= keys[pos] == k
        return ok

    def outcomes(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return self.check(self.sample(rng, size))


def _normalized_cdf(weights: np.ndarray) -> np.ndarray:
    cdf = np.cumsum(weights, dtype=float)
    cdf /= cdf[-1]
    cdf[-1] = 1.0
    return cdf


def sample_tree(cs: CandidateSpace, tree: RootedSpanningTree, table: TreeCountTable, rng: np.random.Generator) -> dict[int, int]:
    """One uniformly random candidate tree as ``{query vertex: data vertex}``."""
    row = TreeSampler(cs, tree, table).sample(rng, 1)[0]
    return {u: int(v) for u, v in enumerate(row)}


def check_embedding(cs: CandidateSpace, s: dict[int, int], tree: RootedSpanningTree) -> bool:
    if len(set(s.values())) != len(s):
        return False
    return all(cs.has_candidate_edge(a, s[a], b, s[b]) for a, b in tree.non_tree_edges)


# -- Clopper-Pearson stopping ----------------------------------------------------

def clopper_pearson(trials: int, successes: int, alpha: float) -> tuple[float, float]:
    """Exact two-sided binomial interval via Beta quantiles."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    if not 0 <= successes <= trials:
        raise ValueError("successes must lie in [0, trials]")
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    lo = 0.0 if successes == 0 else float(betaincinv(successes, trials - successes + 1, alpha / 2))
    hi = 1.0 if successes == trials else float(betaincinv(successes + 1, trials - successes, 1 - alpha / 2))
    return lo, hi


@dataclass
class StoppingConfig:
    alpha: float = 0.05
    c: float = 1.25
    early_fail_trials: int = 50_000
    early_fail_successes: int = 10
    trial_cap: int = 400_000
    check_every: int = 1024

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        if not self.c > 1:
            raise ValueError("c must exceed 1")


def interval_satisfied(trials: int, successes: int, alpha: float, c: float) -> bool:
    if successes == 0:
        return False
    rho = successes / trials
    lo, hi = clopper_pearson(trials, successes, alpha)
    return rho / c <= lo and hi <= c * rho


@dataclass
class StopResult:
    trials: int
    successes: int
    early_fail: bool
    reason: str  # "interval", "early_fail", "cap", "exhausted"


def run_stopping_rule(batches: Iterable[np.ndarray], config: StoppingConfig) -> StopResult:
    """Consume Bernoulli outcomes in order until a stopping condition fires.

    The interval test runs after each success and every ``check_every``
    trials; after ``early_fail_trials`` trials with at most
    ``early_fail_successes`` successes the loop gives up; ``trial_cap`` bounds
    the total. Outcomes past the stopping point are ignored.
    """
    trials = successes = 0
    for batch in batches:
        batch = np.asarray(batch, dtype=bool)
        if len(batch) == 0:
            continue
        cum = np.cumsum(batch) + successes
        n = np.arange(trials + 1, trials + len(batch) + 1)
        events = batch | (n % config.check_every == 0) | (n == config.early_fail_trials) | (n == config.trial_cap)
        for i in np.flatnonzero(events):
            t, s = int(n[i]), int(cum[i])
            if (batch[i] or t % config.check_every == 0) and interval_satisfied(t, s, config.alpha, config.c):
                return StopResult(t, s, False, "interval")
            if t == config.early_fail_trials and s <= config.early_fail_successes:
                return StopResult(t, s, True, "early_fail")
            if t >= config.trial_cap:
                return StopResult(t, s, False, "cap")
        trials += len(batch)
        successes = int(cum[-1])
    return StopResult(trials, successes, False, "exhausted")


def _batches(sampler: TreeSampler, rng: np.random.Generator, start: int = 1024, limit: int = 65536) -> Iterator[np.ndarray]:
    size = start
    while True:
        yield sampler.outcomes(rng, size)
        size = min(2 * size, limit)


@dataclass
class TreeSamplingResult:
    estimate: float
    successes: int
    trials: int
    early_fail: bool
    total: float
    reason: str = ""


def candidate_tree_sampling(
    cs: CandidateSpace,
    config: StoppingConfig | None = None,
    rng: np.random.Generator | None = None,
    tree: RootedSpanningTree | None = None,
    table: TreeCountTable | None = None,
    outcomes: Iterable[np.ndarray] | None = None,
) -> TreeSamplingResult:
    """Sample candidate trees until the stopping rule fires.

    ``outcomes`` replaces the sampler with a pre-recorded success stream.
    """
    config = config or StoppingConfig()
    if tree is None:
        tree = choose_spanning_tree(cs)
    if table is None:
        table = count_candidate_trees(cs, tree)
    if not table.total > 0:
        return TreeSamplingResult(0.0, 0, 0, False, 0.0, "empty")
    if outcomes is None:
        rng = rng if rng is not None else np.random.default_rng()
        outcomes = _batches(TreeSampler(cs, tree, table), rng)
    stop = run_stopping_rule(outcomes, config)
    est = stop.successes / stop.trials * float(table.total) if stop.trials else 0.0
    return TreeSamplingResult(est, stop.successes, stop.trials, stop.early_fail, float(table.total), stop.reason)


def fixed_trial_estimate(sampler: TreeSampler, total: float, trials: int, rng: np.random.Generator) -> float:
    """Plain Monte-Carlo estimate from exactly ``trials`` samples (no adaptive stop)."""
    return float(sampler.outcomes(rng, trials).sum()) / trials * total
