"""Candidate Space construction and safety-condition refinement."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .graph import CycleIndex, LabeledGraph, edge_key
from .matching import LocalBipartiteGraph, max_bipartite_matching, maximally_matchable_edges

_EMPTY: frozenset[int] = frozenset()


class CandidateSpace:
    """Per-query-vertex candidate sets plus explicit candidate edges.

    ``neighbors(u, u2, v)`` is ``C(u2 | u, v)``: the candidates of ``u2`` that
    are joined to ``v`` by a candidate edge of query edge ``(u, u2)``. Both
    orientations of every candidate edge are stored, and every removal keeps
    them in sync and cascades: a vertex that loses all candidate neighbors
    toward some query neighbor is removed as well.
    """

    def __init__(self, query: LabeledGraph, data: LabeledGraph, candidates: list[set[int]]):
        self.query = query
        self.data = data
        self.candidates = candidates
        self._nbr: dict[tuple[int, int], dict[int, set[int]]] = {}
        self._edge_count: dict[tuple[int, int], int] = {}
        self.empty = any(not c for c in candidates)

    @classmethod
    def from_candidate_edges(
        cls,
        query: LabeledGraph,
        data: LabeledGraph,
        candidates: dict[int, list[int]],
        edges: dict[tuple[int, int], list[tuple[int, int]]],
    ) -> CandidateSpace:
        """Assemble a CS by hand: ``edges[(u, u2)]`` lists pairs ``(v, v2)``."""
        cs = cls(query, data, [set(candidates.get(u, ())) for u in range(query.vertex_count)])
        for u in range(query.vertex_count):
            for u2 in query.adjacency[u]:
                cs._nbr[(u, u2)] = {}
                cs._edge_count[edge_key(u, u2)] = 0
        for (u, u2), pairs in edges.items():
            if not query.has_edge(u, u2):
                raise ValueError(f"({u}, {u2}) is not a query edge")
            for v, v2 in pairs:
                if v not in cs.candidates[u] or v2 not in cs.candidates[u2]:
                    raise ValueError(f"candidate edge ({v}, {v2}) has an endpoint outside the candidate sets")
                if not data.has_edge(v, v2):
                    raise ValueError(f"({v}, {v2}) is not a data edge")
                if not cs.has_candidate_edge(u, v, u2, v2):
                    cs._add_edge(u, v, u2, v2)
        return cs

    # -- queries -----------------------------------------------------------
    def candidate_list(self, u: int) -> list[int]:
        return sorted(self.candidates[u])

    def size(self, u: int) -> int:
        return len(self.candidates[u])

    def neighbors(self, u: int, u2: int, v: int) -> set[int] | frozenset[int]:
        return self._nbr[(u, u2)].get(v, _EMPTY)

    def neighbor_list(self, u: int, u2: int, v: int) -> list[int]:
        return sorted(self.neighbors(u, u2, v))

    def has_candidate_edge(self, u: int, v: int, u2: int, v2: int) -> bool:
        return v2 in self._nbr[(u, u2)].get(v, _EMPTY)

    def edge_count(self, u: int, u2: int) -> int:
        """|E_CS(u, u2)|."""
        return self._edge_count[edge_key(u, u2)]

    def candidate_edges(self, u: int, u2: int) -> list[tuple[int, int]]:
        """Pairs ``(v, v2)`` with v a candidate of u and v2 of u2."""
        return sorted((v, v2) for v, s in self._nbr[(u, u2)].items() for v2 in s)

    def density(self, u: int, u2: int) -> Fraction:
        return Fraction(self.edge_count(u, u2), self.size(u) * self.size(u2))

    def total_candidates(self) -> int:
        return sum(len(c) for c in self.candidates)

    def total_edges(self) -> int:
        return sum(self._edge_count.values())

    def copy(self) -> CandidateSpace:
        cs = CandidateSpace(self.query, self.data, [set(c) for c in self.candidates])
        cs._nbr = {k: {v: set(s) for v, s in m.items()} for k, m in self._nbr.items()}
        cs._edge_count = dict(self._edge_count)
        cs.empty = self.empty
        return cs

    def dump(self) -> str:
        """Text dump: ``C(u): v...`` lines, then ``C(u'|u,v): v'...`` lines."""
        q = self.query
        lines = [f"C({u}): " + " ".join(map(str, self.candidate_list(u))) for u in range(q.vertex_count)]
        for u in range(q.vertex_count):
            for u2 in q.adjacency[u]:
                for v in self.candidate_list(u):
                    vs = " ".join(map(str, self.neighbor_list(u, u2, v)))
                    lines.append(f"C({u2}|{u},{v}): {vs}")
        return "\n".join(lines) + "\n"

    # -- mutation ----------------------------------------------------------
    def _add_edge(self, u: int, v: int, u2: int, v2: int) -> None:
        self._nbr[(u, u2)].setdefault(v, set()).add(v2)
        self._nbr[(u2, u)].setdefault(v2, set()).add(v)
        self._edge_count[edge_key(u, u2)] += 1

    def remove_edge(self, u: int, v: int, u2: int, v2: int) -> None:
        """Drop candidate edge (v, v2) of query edge (u, u2) and cascade."""
        fwd = self._nbr[(u, u2)].get(v)
        if fwd is None or v2 not in fwd:
            return
        fwd.discard(v2)
        self._nbr[(u2, u)][v2].discard(v)
        self._edge_count[edge_key(u, u2)] -= 1
        pending = []
        if not fwd:
            pending.append((u, v))
        if not self._nbr[(u2, u)][v2]:
            pending.append((u2, v2))
        self._drain(pending)

    def remove_vertex(self, u: int, v: int) -> None:
        self._drain([(u, v)])

    def _drain(self, pending: list[tuple[int, int]]) -> None:
        adj = self.query.adjacency
        while pending:
            u, v = pending.pop()
            if v not in self.candidates[u]:
                continue
            self.candidates[u].discard(v)
            if not self.candidates[u]:
                self.empty = True
            for u2 in adj[u]:
                out = self._nbr[(u, u2)].pop(v, _EMPTY)
                back = self._nbr[(u2, u)]
                self._edge_count[edge_key(u, u2)] -= len(out)
                for v2 in out:
                    s = back[v2]
                    s.discard(v)
                    if not s and v2 in self.candidates[u2]:
                        pending.append((u2, v2))


def build_initial_cs(q: LabeledGraph, g: LabeledGraph) -> CandidateSpace:
    """Label and label-degree filtered candidates; all data edges between them."""
    by_label: dict[int, list[int]] = {}
    for v, l in enumerate(g.labels):
        by_label.setdefault(l, []).append(v)
    candidates = []
    for u in range(q.vertex_count):
        need = q.label_degree[u]
        c = {
            v
            for v in by_label.get(q.labels[u], ())
            if all(g.label_degree[v].get(l, 0) >= k for l, k in need.items())
        }
        candidates.append(c)
    cs = CandidateSpace(q, g, candidates)
    for u in range(q.vertex_count):
        for u2 in q.adjacency[u]:
            cs._nbr[(u, u2)] = {}
            cs._edge_count[edge_key(u, u2)] = 0
    for u, u2 in q.edges():
        c2 = candidates[u2]
        for v in candidates[u]:
            for v2 in g.adjacency[v]:
                if v2 in c2:
                    cs._add_edge(u, v, u2, v2)
    return cs


# -- safety conditions -------------------------------------------------------

def triangle_safe(
    cs: CandidateSpace, cycle_q: CycleIndex, cycle_g: CycleIndex, query_edge, data_edge
) -> bool:
    if not (cycle_q.triangles_enabled and cycle_g.triangles_enabled):
        return True
    u, u2 = query_edge
    v, v2 = data_edge
    apexes_q = cycle_q.triangles(u, u2)
    if not apexes_q:
        return True
    if len(apexes_q) > len(cycle_g.triangles(v, v2)):
        return False
    for w in apexes_q:
        if cs.neighbors(u, w, v).isdisjoint(cs.neighbors(u2, w, v2)):
            return False
    return True


def four_cycle_safe(
    cs: CandidateSpace, cycle_q: CycleIndex, cycle_g: CycleIndex, query_edge, data_edge
) -> bool:
    """Every query 4-cycle u-u2-a-b through the edge has a CS image v-v2-c-d."""
    if not (cycle_q.four_cycles_enabled and cycle_g.four_cycles_enabled):
        return True
    u, u2 = query_edge
    v, v2 = data_edge
    quads_q = cycle_q.four_cycles(u, u2)
    if not quads_q:
        return True
    if len(quads_q) > len(cycle_g.four_cycles(v, v2)):
        return False
    for a, b in quads_q:
        # a is adjacent to u2, b to u
        b_side = cs.neighbors(u, b, v)
        if not b_side:
            return False
        found = False
        for c in cs.neighbors(u2, a, v2):
            if c == v:
                continue
            common = cs.neighbors(a, b, c)
            small, large = (common, b_side) if len(common) <= len(b_side) else (b_side, common)
            for d in small:
                if d != v2 and d in large:
                    found = True
                    break
            if found:
                break
        if not found:
            return False
    return True


def neighbor_safe(cs: CandidateSpace, u: int, v: int) -> bool:
    """Label-wise Hall condition on candidate neighbors (ablation baseline)."""
    q = cs.query
    pooled: dict[int, set[int]] = {}
    for u2 in q.adjacency[u]:
        pooled.setdefault(q.labels[u2], set()).update(cs.neighbors(u, u2, v))
    return all(len(pooled.get(l, ())) >= k for l, k in q.label_degree[u].items())


def local_bipartite(cs: CandidateSpace, u: int, v: int) -> LocalBipartiteGraph:
    left = list(cs.query.adjacency[u])
    edges = [cs.neighbor_list(u, u2, v) for u2 in left]
    right = sorted({w for e in edges for w in e})
    return LocalBipartiteGraph(left, right, edges)


def edge_bipartite_refine(cs: CandidateSpace, u: int, v: int) -> tuple[bool, list[tuple[int, int]]]:
    """Check B(u, v) for a left-perfect matching and drop edges outside every maximum matching.

    Returns ``(vertex_ok, removed)`` where ``removed`` lists the pairs
    ``(u2, v2)`` whose candidate edge was deleted. When ``vertex_ok`` is
    false, ``v`` has been removed from ``C(u)``.
    """
    b = local_bipartite(cs, u, v)
    size, matching = max_bipartite_matching(b)
    if size < len(b.left):
        cs.remove_vertex(u, v)
        return False, []
    keep = maximally_matchable_edges(b, matching)
    removed = []
    for u2, rs in zip(b.left, b.edges):
        for v2 in rs:
            if (u2, v2) not in keep:
                removed.append((u2, v2))
                cs.remove_edge(u, v, u2, v2)
    return True, removed


# -- refinement loop -----------------------------------------------------------

@dataclass
class RefinementConfig:
    phi: float = 2 / 3
    tau: float = 0.9
    R: float = 5.0
    triangle: bool = True
    four_cycle: bool = True
    bipartite: bool = True
    neighbor_safety: bool = False

    def __post_init__(self):
        if not 0.0 <= self.phi <= 1.0:
            raise ValueError("phi must lie in [0, 1]")
        if not 0.0 <= self.tau <= 1.0:
            raise ValueError("tau must lie in [0, 1]")
        if self.R < 0:
            raise ValueError("R must be non-negative")


@dataclass
class RefinementState:
    penalty: list[float]
    phi: float
    tau: float
    R: float
    degree_budget_used: int = 0
    history: list[int] = field(default_factory=list)

    @classmethod
    def initial(cls, n: int, config: RefinementConfig) -> RefinementState:
        return cls(penalty=[config.phi] * n, phi=config.phi, tau=config.tau, R=config.R)

    def update(self, q: LabeledGraph, u: int, size_before: int, size_after: int) -> None:
        ratio = size_after / size_before if size_before else 0.0
        for u2 in q.adjacency[u]:
            self.penalty[u2] *= ratio
        self.penalty[u] = 1.0

    def finished(self, q: LabeledGraph) -> bool:
        return min(self.penalty) > self.tau or self.degree_budget_used > self.R * q.edge_count


def choose_refinement_vertex(state: RefinementState) -> int:
    """Lowest penalty, smallest id on ties."""
    return min(range(len(state.penalty)), key=lambda u: (state.penalty[u], u))


def refine_vertex(
    cs: CandidateSpace, u: int, cycle_q: CycleIndex, cycle_g: CycleIndex, config: RefinementConfig
) -> None:
    q = cs.query
    check_tri = config.triangle and cycle_q.triangles_enabled and cycle_g.triangles_enabled
    check_quad = config.four_cycle and cycle_q.four_cycles_enabled and cycle_g.four_cycles_enabled
    for v in sorted(cs.candidates[u]):
        if cs.empty:
            return
        if v not in cs.candidates[u]:
            continue
        if config.neighbor_safety and not neighbor_safe(cs, u, v):
            cs.remove_vertex(u, v)
            continue
        if config.bipartite and max_bipartite_matching(local_bipartite(cs, u, v))[0] < q.degree(u):
            cs.remove_vertex(u, v)
            continue
        if check_tri or check_quad:
            for u2 in q.adjacency[u]:
                for v2 in cs.neighbor_list(u, u2, v):
                    if v not in cs.candidates[u]:
                        break
                    if not cs.has_candidate_edge(u, v, u2, v2):
                        continue
                    if (check_tri and not triangle_safe(cs, cycle_q, cycle_g, (u, u2), (v, v2))) or (
                        check_quad and not four_cycle_safe(cs, cycle_q, cycle_g, (u, u2), (v, v2))
                    ):
                        cs.remove_edge(u, v, u2, v2)
            if v not in cs.candidates[u]:
                continue
        if config.bipartite:
            edge_bipartite_refine(cs, u, v)
        if v in cs.candidates[u] and any(not cs.neighbors(u, u2, v) for u2 in q.adjacency[u]):
            cs.remove_vertex(u, v)


def refine_candidate_space(
    cs: CandidateSpace,
    cycle_q: CycleIndex,
    cycle_g: CycleIndex,
    config: RefinementConfig | None = None,
    state: RefinementState | None = None,
) -> CandidateSpace:
    """Promising-first refinement of ``cs`` in place; returns ``cs``.

    Stops once every penalty exceeds ``tau`` or the summed degree of the
    refined vertices exceeds ``R * |E_q|``. Pass ``state`` to inspect the
    penalty trajectory afterwards.
    """
    config = config or RefinementConfig()
    q = cs.query
    if state is None:
        state = RefinementState.initial(q.vertex_count, config)
    while not cs.empty and not state.finished(q):
        u = choose_refinement_vertex(state)
        state.degree_budget_used += q.degree(u)
        state.history.append(u)
        before = cs.size(u)
        refine_vertex(cs, u, cycle_q, cycle_g, config)
        state.update(q, u, before, cs.size(u))
    return cs
