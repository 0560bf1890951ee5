"""Vertex-labeled undirected graphs, the ``t/v/e`` text format, and small-cycle indexes."""

from __future__ import annotations

import io
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, TextIO

DEFAULT_CYCLE_CAP = 10**10

Edge = tuple[int, int]


class GraphFormatError(ValueError):
    """Raised for malformed graph files. Carries the offending line number."""

    def __init__(self, message: str, line_no: int | None = None):
        self.line_no = line_no
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)


def edge_key(a: int, b: int) -> Edge:
    return (a, b) if a < b else (b, a)


@dataclass(frozen=True, eq=False)
class LabeledGraph:
    """Immutable vertex-labeled simple graph.

    ``adjacency[v]`` is a strictly increasing tuple of neighbors and
    ``label_degree[v]`` maps a label to the number of neighbors carrying it.
    """

    labels: tuple[int, ...]
    adjacency: tuple[tuple[int, ...], ...]
    label_degree: tuple[dict[int, int], ...] = field(repr=False)
    max_degree: int
    degeneracy: int
    neighbor_sets: tuple[frozenset[int], ...] = field(repr=False)

    @classmethod
    def from_edges(cls, labels: Iterable[int], edges: Iterable[Edge]) -> LabeledGraph:
        labels = tuple(int(l) for l in labels)
        n = len(labels)
        nbrs: list[set[int]] = [set() for _ in range(n)]
        for a, b in edges:
            if not (0 <= a < n and 0 <= b < n):
                raise ValueError(f"edge ({a}, {b}) references a vertex outside 0..{n - 1}")
            if a == b:
                raise ValueError(f"self-loop on vertex {a}")
            nbrs[a].add(b)
            nbrs[b].add(a)
        adjacency = tuple(tuple(sorted(s)) for s in nbrs)
        label_degree = tuple(dict(Counter(labels[w] for w in adj)) for adj in adjacency)
        max_degree = max((len(a) for a in adjacency), default=0)
        return cls(
            labels=labels,
            adjacency=adjacency,
            label_degree=label_degree,
            max_degree=max_degree,
            degeneracy=_peel_degeneracy(adjacency),
            neighbor_sets=tuple(frozenset(s) for s in nbrs),
        )

    @property
    def vertex_count(self) -> int:
        return len(self.labels)

    @property
    def edge_count(self) -> int:
        return sum(len(a) for a in self.adjacency) // 2

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def has_edge(self, a: int, b: int) -> bool:
        return b in self.neighbor_sets[a]

    def edges(self) -> list[Edge]:
        """Each undirected edge once, smaller endpoint first, in lexicographic order."""
        return [(v, w) for v, adj in enumerate(self.adjacency) for w in adj if v < w]

    def label_set(self) -> set[int]:
        return set(self.labels)

    def is_connected(self) -> bool:
        n = self.vertex_count
        if n == 0:
            return True
        seen = {0}
        stack = [0]
        while stack:
            v = stack.pop()
            for w in self.adjacency[v]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == n

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LabeledGraph):
            return NotImplemented
        return self.labels == other.labels and self.adjacency == other.adjacency

    def __hash__(self) -> int:
        return hash((self.labels, self.adjacency))


def _peel_degeneracy(adjacency: tuple[tuple[int, ...], ...]) -> int:
    # bucket-queue minimum-degree peeling (Matula-Beck)
    n = len(adjacency)
    if n == 0:
        return 0
    degree = [len(a) for a in adjacency]
    max_deg = max(degree)
    buckets: list[set[int]] = [set() for _ in range(max_deg + 1)]
    for v, d in enumerate(degree):
        buckets[d].add(v)
    removed = [False] * n
    best = 0
    lo = 0
    for _ in range(n):
        lo = max(lo - 1, 0)
        while not buckets[lo]:
            lo += 1
        v = buckets[lo].pop()
        removed[v] = True
        best = max(best, lo)
        for w in adjacency[v]:
            if not removed[w]:
                buckets[degree[w]].discard(w)
                degree[w] -= 1
                buckets[degree[w]].add(w)
    return best


def compute_degeneracy(g: LabeledGraph) -> int:
    return _peel_degeneracy(g.adjacency)


def load_graph(stream: TextIO | str, label_map: dict[str, int] | None = None) -> LabeledGraph:
    """Parse the ``t/v/e`` format.

    Integer labels are used as-is unless ``label_map`` is given, in which case
    every label token is treated as a string and assigned a stable id (the map
    is extended in place so query and data graphs can share it).
    """
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    n: int | None = None
    labels: dict[int, int] = {}
    edges: list[Edge] = []
    for line_no, raw in enumerate(stream, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        kind = tok[0]
        try:
            if kind == "t":
                if n is not None:
                    raise GraphFormatError("duplicate header", line_no)
                if len(tok) < 2:
                    raise GraphFormatError("header needs a vertex count", line_no)
                n = int(tok[1])
                if n < 0:
                    raise GraphFormatError("negative vertex count", line_no)
            elif kind == "v":
                if n is None:
                    raise GraphFormatError("vertex line before header", line_no)
                if len(tok) not in (3, 4):
                    raise GraphFormatError("expected 'v <id> <label> [degree]'", line_no)
                vid = int(tok[1])
                if not 0 <= vid < n:
                    raise GraphFormatError(f"vertex id {vid} out of range 0..{n - 1}", line_no)
                if vid in labels:
                    raise GraphFormatError(f"vertex {vid} declared twice", line_no)
                labels[vid] = _parse_label(tok[2], label_map, line_no)
            elif kind == "e":
                if n is None:
                    raise GraphFormatError("edge line before header", line_no)
                if len(tok) != 3:
                    raise GraphFormatError("expected 'e <src> <dst>'", line_no)
                a, b = int(tok[1]), int(tok[2])
                for x in (a, b):
                    if not 0 <= x < n:
                        raise GraphFormatError(f"vertex id {x} out of range 0..{n - 1}", line_no)
                if a == b:
                    raise GraphFormatError(f"self-loop on vertex {a}", line_no)
                edges.append((a, b))
            else:
                raise GraphFormatError(f"unknown record type {kind!r}", line_no)
        except ValueError as exc:
            if isinstance(exc, GraphFormatError):
                raise
            raise GraphFormatError(f"malformed line {line!r}", line_no) from exc
    if n is None:
        raise GraphFormatError("missing 't' header")
    missing = [v for v in range(n) if v not in labels]
    if missing:
        raise GraphFormatError(f"no 'v' line for vertices {missing[:5]}")
    return LabeledGraph.from_edges([labels[v] for v in range(n)], edges)


def _parse_label(token: str, label_map: dict[str, int] | None, line_no: int) -> int:
    if label_map is not None:
        if token not in label_map:
            label_map[token] = len(label_map)
        return label_map[token]
    label = int(token)
    if label < 0:
        raise GraphFormatError("labels must be non-negative", line_no)
    return label


def read_graph(path, label_map: dict[str, int] | None = None) -> LabeledGraph:
    with open(path) as fh:
        return load_graph(fh, label_map)


def dump_graph(g: LabeledGraph) -> str:
    lines = [f"t {g.vertex_count} {g.edge_count}"]
    lines += [f"v {v} {l} {g.degree(v)}" for v, l in enumerate(g.labels)]
    lines += [f"e {a} {b}" for a, b in g.edges()]
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class CycleIndex:
    """Per-edge triangle apexes and 4-cycle opposite edges.

    Keys are edges ``(a, b)`` with ``a < b``. ``four_cycle_edges[(a, b)]``
    holds oriented pairs ``(c, d)`` such that ``a-b-c-d-a`` is a 4-cycle,
    i.e. ``c`` is adjacent to ``b`` and ``d`` to ``a``. Use the lookup
    methods to get the orientation matching an arbitrary edge direction.
    """

    triangle_apexes: dict[Edge, tuple[int, ...]]
    four_cycle_edges: dict[Edge, tuple[Edge, ...]]
    triangles_enabled: bool
    four_cycles_enabled: bool
    total_triangles: int
    total_four_cycles: int

    def triangles(self, a: int, b: int) -> tuple[int, ...]:
        return self.triangle_apexes.get(edge_key(a, b), ())

    def four_cycles(self, a: int, b: int) -> tuple[Edge, ...]:
        """Pairs ``(c, d)`` with ``a-b-c-d-a`` a 4-cycle."""
        pairs = self.four_cycle_edges.get(edge_key(a, b), ())
        if a < b:
            return pairs
        return tuple((d, c) for c, d in pairs)


def build_cycle_index(
    g: LabeledGraph, tri_cap: int = DEFAULT_CYCLE_CAP, quad_cap: int = DEFAULT_CYCLE_CAP
) -> CycleIndex:
    if tri_cap <= 0 or quad_cap <= 0:
        raise ValueError("cycle caps must be positive")
    edges = g.edges()
    nbr = g.neighbor_sets

    tri: dict[Edge, tuple[int, ...]] = {}
    tri_incidences = 0
    tri_enabled = True
    for a, b in edges:
        small, large = (a, b) if g.degree(a) <= g.degree(b) else (b, a)
        apexes = tuple(sorted(c for c in g.adjacency[small] if c in nbr[large]))
        if apexes:
            tri[(a, b)] = apexes
            tri_incidences += len(apexes)
            if tri_incidences > 3 * tri_cap:
                tri_enabled = False
                break
    total_tri = tri_incidences // 3 if tri_enabled else _count_triangles(g)
    if not tri_enabled:
        tri = {}

    quad: dict[Edge, tuple[Edge, ...]] = {}
    quad_incidences = 0
    quad_enabled = True
    for a, b in edges:
        pairs = []
        for c in g.adjacency[b]:
            if c == a:
                continue
            nc = nbr[c]
            for d in g.adjacency[a]:
                if d != b and d != c and d in nc:
                    pairs.append((c, d))
        if pairs:
            quad[(a, b)] = tuple(pairs)
            quad_incidences += len(pairs)
            if quad_incidences > 4 * quad_cap:
                quad_enabled = False
                break
    if quad_enabled:
        total_quad = quad_incidences // 4
    else:
        quad = {}
        total_quad = _count_four_cycles(g)
    return CycleIndex(
        triangle_apexes=tri,
        four_cycle_edges=quad,
        triangles_enabled=tri_enabled,
        four_cycles_enabled=quad_enabled,
        total_triangles=total_tri,
        total_four_cycles=total_quad,
    )


def _count_triangles(g: LabeledGraph) -> int:
    total = 0
    for a, b in g.edges():
        total += len(g.neighbor_sets[a] & g.neighbor_sets[b])
    return total // 3


def _count_four_cycles(g: LabeledGraph) -> int:
    # each 4-cycle is counted once per diagonal pair {x, y} of opposite vertices
    total = 0
    for x in range(g.vertex_count):
        common = Counter()
        for w in g.adjacency[x]:
            for y in g.adjacency[w]:
                if y > x:
                    common[y] += 1
        total += sum(k * (k - 1) // 2 for k in common.values())
    return total // 2
