"""Labeled graphs, ordered k-vertex subgraphs, and atomic types.

Everything downstream (refinement engines, generators, sampler, neural stack)
consumes the :class:`LabeledGraph` defined here: a finite simple graph with
integer vertex labels and optional real-valued vertex/edge features.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, Mapping, Sequence

from .errors import GraphError, GuardError

Edge = tuple[int, int]


@dataclass(frozen=True)
class LabeledGraph:
    """Immutable simple graph with integer vertex labels.

    Edges are stored sorted with ``u < v``. Features, when present, are
    tuples of equal-length float tuples (one per vertex / per edge, edge
    order matching ``edges``).
    """

    n: int
    edges: tuple[Edge, ...]
    labels: tuple[int, ...]
    vertex_features: tuple[tuple[float, ...], ...] | None = None
    edge_features: tuple[tuple[float, ...], ...] | None = None

    @cached_property
    def adjacency(self) -> tuple[tuple[int, ...], ...]:
        """Sorted neighbor tuple per vertex."""
        nbrs: list[list[int]] = [[] for _ in range(self.n)]
        for u, v in self.edges:
            nbrs[u].append(v)
            nbrs[v].append(u)
        return tuple(tuple(sorted(b)) for b in nbrs)

    @cached_property
    def edge_set(self) -> frozenset[Edge]:
        return frozenset(self.edges)

    @cached_property
    def edge_index(self) -> dict[Edge, int]:
        """Position of each (u < v) edge in the canonical edge order."""
        return {e: i for i, e in enumerate(self.edges)}

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self.adjacency[v]

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def has_edge(self, u: int, v: int) -> bool:
        if u > v:
            u, v = v, u
        return (u, v) in self.edge_set

    def degree_sequence(self) -> tuple[int, ...]:
        return tuple(sorted(len(b) for b in self.adjacency))

    def label_histogram(self) -> dict[int, int]:
        hist: dict[int, int] = {}
        for lab in self.labels:
            hist[lab] = hist.get(lab, 0) + 1
        return hist

    def permute(self, perm: Sequence[int]) -> "LabeledGraph":
        """Relabel vertices by ``v -> perm[v]`` (perm must be a bijection)."""
        if sorted(perm) != list(range(self.n)):
            raise GraphError("perm is not a permutation of the vertex set")
        edges = sorted(tuple(sorted((perm[u], perm[v]))) for u, v in self.edges)
        labels = [0] * self.n
        for v, lab in enumerate(self.labels):
            labels[perm[v]] = lab
        vfeat = None
        if self.vertex_features is not None:
            rows: list[tuple[float, ...]] = [()] * self.n
            for v, row in enumerate(self.vertex_features):
                rows[perm[v]] = row
            vfeat = tuple(rows)
        efeat = None
        if self.edge_features is not None:
            by_edge = {
                tuple(sorted((perm[u], perm[v]))): row
                for (u, v), row in zip(self.edges, self.edge_features)
            }
            efeat = tuple(by_edge[e] for e in edges)
        return LabeledGraph(self.n, tuple(edges), tuple(labels), vfeat, efeat)


def build_graph(
    n: int,
    edge_list: Sequence[Sequence[int]],
    labels: Mapping[int, int] | Sequence[int] | None = None,
    vertex_features: Sequence[Sequence[float]] | None = None,
    edge_features: Sequence[Sequence[float]] | None = None,
) -> LabeledGraph:
    """Validate and normalize raw input into a :class:`LabeledGraph`.

    Rejects self-loops, duplicate edges, and out-of-range vertex ids.
    Missing labels default to 0.
    """
    if n < 0:
        raise GraphError(f"vertex count must be >= 0, got {n}")
    norm: list[Edge] = []
    for pair in edge_list:
        u, v = int(pair[0]), int(pair[1])
        if u == v:
            raise GraphError(f"self-loop at vertex {u}")
        if not (0 <= u < n and 0 <= v < n):
            raise GraphError(f"edge ({u}, {v}) references a vertex outside [0, {n})")
        norm.append((u, v) if u < v else (v, u))
    deduped = sorted(set(norm))
    if len(deduped) != len(norm):
        raise GraphError("duplicate edge in edge list")

    if labels is None:
        label_tuple = (0,) * n
    elif isinstance(labels, Mapping):
        for v in labels:
            if not (0 <= v < n):
                raise GraphError(f"label for unknown vertex {v}")
        label_tuple = tuple(int(labels.get(v, 0)) for v in range(n))
    else:
        if len(labels) != n:
            raise GraphError(f"expected {n} labels, got {len(labels)}")
        label_tuple = tuple(int(x) for x in labels)

    vfeat = None
    if vertex_features is not None:
        if len(vertex_features) != n:
            raise GraphError("vertex_features length must equal n")
        rows = [tuple(float(x) for x in row) for row in vertex_features]
        dims = {len(r) for r in rows}
        if len(dims) > 1:
            raise GraphError("vertex feature rows have mixed dimensionality")
        vfeat = tuple(rows)

    efeat = None
    if edge_features is not None:
        if len(edge_features) != len(norm):
            raise GraphError("edge_features length must match edge count")
        by_edge = {
            e: tuple(float(x) for x in row)
            for e, row in zip(norm, edge_features)
        }
        rows = [by_edge[e] for e in deduped]
        dims = {len(r) for r in rows}
        if len(dims) > 1:
            raise GraphError("edge feature rows have mixed dimensionality")
        efeat = tuple(rows)

    return LabeledGraph(n, tuple(deduped), label_tuple, vfeat, efeat)


@dataclass(frozen=True)
class OrderedSubgraph:
    """A k-tuple of vertex ids marking a subgraph of its owning graph.

    In ordered mode, tuple position i carries marker label i+1 (a repeated
    vertex carries several markers). In unordered mode the tuple is a sorted
    set of distinct vertices and only membership matters.
    """

    graph_id: int
    vertices: tuple[int, ...]
    ordered: bool = True

    @property
    def k(self) -> int:
        return len(self.vertices)

    def position_labels(self) -> dict[int, tuple[int, ...]]:
        """Vertex -> 1-based marker positions it holds."""
        out: dict[int, list[int]] = {}
        for pos, v in enumerate(self.vertices, start=1):
            out.setdefault(v, []).append(pos)
        return {v: tuple(ps) for v, ps in out.items()}


def enumerate_subgraphs(
    graph: LabeledGraph, k: int, ordered: bool = True, graph_id: int = 0
) -> Iterator[OrderedSubgraph]:
    """All n^k ordered tuples, or all C(n, k) sorted k-sets when unordered."""
    if k < 1:
        raise GuardError(f"subgraph size must be >= 1, got {k}")
    if ordered:
        for tup in itertools.product(range(graph.n), repeat=k):
            yield OrderedSubgraph(graph_id, tup, True)
    else:
        if k > graph.n:
            raise GuardError(
                f"unordered subgraph size {k} exceeds vertex count {graph.n}"
            )
        for tup in itertools.combinations(range(graph.n), k):
            yield OrderedSubgraph(graph_id, tup, False)


def count_subgraphs(graph: LabeledGraph, k: int, ordered: bool = True) -> int:
    """Cardinality of :func:`enumerate_subgraphs` without enumerating."""
    if k < 1:
        raise GuardError(f"subgraph size must be >= 1, got {k}")
    if ordered:
        return graph.n**k
    if k > graph.n:
        raise GuardError(f"unordered subgraph size {k} exceeds vertex count {graph.n}")
    return math.comb(graph.n, k)


def atomic_pattern(graph: LabeledGraph, tup: Sequence[int]) -> tuple:
    """Canonical structured key of a tuple's equality/adjacency/label pattern.

    Two tuples get equal patterns exactly when the index-wise map between
    them preserves equalities, adjacencies, and vertex labels, i.e. is a
    partial isomorphism of labeled graphs.
    """
    if len(tup) == 0:
        raise GraphError("atomic type of an empty tuple is undefined")
    for v in tup:
        if not (0 <= v < graph.n):
            raise GraphError(f"vertex id {v} outside [0, {graph.n})")
    k = len(tup)
    eq = []
    adj = []
    for i in range(k):
        for j in range(i + 1, k):
            eq.append(int(tup[i] == tup[j]))
            adj.append(int(graph.has_edge(tup[i], tup[j])))
    labels = tuple(graph.labels[v] for v in tup)
    return ("atp", k, tuple(eq), tuple(adj), labels)


@dataclass(frozen=True)
class AtomicType:
    canonical_code: int


def atomic_type(graph: LabeledGraph, tup: Sequence[int], table=None) -> AtomicType:
    """Canonical integer code of a tuple's atomic pattern.

    With a color table the code is registered there (collision-checked and
    shared with every other key the table has seen); without one a standalone
    content hash of the pattern is returned.
    """
    key = atomic_pattern(graph, tup)
    if table is not None:
        return AtomicType(table.relabel(key))
    from .colors import hash_key

    return AtomicType(hash_key(key))


def triangle_count(graph: LabeledGraph) -> int:
    """Exact number of triangles (used as a regression target)."""
    count = 0
    for u, v in graph.edges:
        nu = set(graph.adjacency[u])
        # u < v, so demanding w > v counts each triangle once via its
        # smallest edge.
        count += sum(1 for w in graph.adjacency[v] if w > v and w in nu)
    return count
