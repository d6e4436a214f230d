"""The ordered-subgraph refinement engine.

For every k-vertex subgraph g of a graph, run a marked 1-WL: vertices start
from the atomic type of the (1+k)-tuple (v, g) and are refined by their
neighborhood (or by the whole vertex set, configurable). A vertex's final
color is the relabeled multiset of its colors across all subgraphs; the
vertex-subgraph variant aggregates per subgraph first.

Content-addressed color ids rename classes every round even after the
partition stabilizes, so colors are only comparable at equal round counts.
Every marked run is therefore carried to one common round count R; once a
run's partition stabilizes, the remaining rounds are iterated on its class
quotient, which costs O(classes * degree) per round instead of O(n * degree).
"""
from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

from .colors import ColorTable, class_count, histogram
from .errors import CapExceeded, EmptySelection, GuardError
from .graphs import LabeledGraph, atomic_pattern
from .refinement import Coloring, Verdict

DEFAULT_PAIR_CAP = 10**7


@dataclass(frozen=True)
class OswlConfig:
    """Settings for the subgraph engine.

    square: "neighbors" refines by adjacent vertices (marked 1-WL),
    "all-vertices" aggregates over the whole vertex set each round.
    subgraph_set: None means every subgraph of size k; an explicit sequence
    of vertex tuples restricts the run to those marks.
    max_rounds: override for the common round count R (default: vertex count).
    """

    k: int
    square: str = "neighbors"
    ordered: bool = True
    subgraph_set: tuple[tuple[int, ...], ...] | None = None
    max_rounds: int | None = None
    cap: int = DEFAULT_PAIR_CAP

    def __post_init__(self):
        if self.k < 0:
            raise GuardError(f"subgraph size must be >= 0, got {self.k}")
        if self.square not in ("neighbors", "all-vertices"):
            raise GuardError(f"unknown square mode {self.square!r}")
        if self.k == 0 and self.subgraph_set is not None:
            raise GuardError("k = 0 only supports the full (empty-tuple) subgraph set")
        if self.subgraph_set is not None:
            object.__setattr__(
                self,
                "subgraph_set",
                tuple(tuple(int(v) for v in g) for g in self.subgraph_set),
            )

    def with_cap(self, cap: int) -> "OswlConfig":
        return replace(self, cap=cap)


def _subgraph_tuples(graph: LabeledGraph, cfg: OswlConfig) -> list[tuple[int, ...]]:
    if cfg.subgraph_set is not None:
        if len(cfg.subgraph_set) == 0:
            raise EmptySelection("explicit subgraph set is empty")
        for g in cfg.subgraph_set:
            if len(g) != cfg.k:
                raise GuardError(f"subgraph {g} does not have size k={cfg.k}")
            for v in g:
                if not (0 <= v < graph.n):
                    raise GuardError(f"subgraph vertex {v} outside [0, {graph.n})")
            if not cfg.ordered and (len(set(g)) != len(g) or list(g) != sorted(g)):
                raise GuardError(
                    f"unordered subgraphs must be sorted distinct tuples, got {g}"
                )
        return list(cfg.subgraph_set)
    if cfg.k == 0:
        return [()]
    if cfg.ordered:
        count = graph.n**cfg.k
    else:
        if cfg.k > graph.n:
            raise GuardError(
                f"unordered subgraph size {cfg.k} exceeds vertex count {graph.n}"
            )
        count = math.comb(graph.n, cfg.k)
    if count * max(graph.n, 1) > cfg.cap:
        raise CapExceeded(
            f"{count} subgraphs x {graph.n} vertices exceed the cap of {cfg.cap}"
        )
    if cfg.ordered:
        return list(itertools.product(range(graph.n), repeat=cfg.k))
    return list(itertools.combinations(range(graph.n), cfg.k))


def marked_initial_colors(
    graph: LabeledGraph, g: tuple[int, ...], ordered: bool, table: ColorTable
) -> list[int]:
    """Initial colors of the g-marked graph: atomic types of (v, g).

    Ordered mode uses the (1+k)-tuple directly. Unordered mode takes the
    minimum code over all orderings of g's members, which is invariant under
    isomorphism and identifies exactly the pairs whose unordered marked
    patterns agree.
    """
    if ordered or len(g) <= 1:
        return [
            table.relabel(atomic_pattern(graph, (v, *g))) for v in range(graph.n)
        ]
    perms = list(itertools.permutations(g))
    return [
        min(table.relabel(atomic_pattern(graph, (v, *p))) for p in perms)
        for v in range(graph.n)
    ]


def _refine_marked(
    graph: LabeledGraph,
    init: Sequence[int],
    square: str,
    rounds: int,
    table: ColorTable,
) -> list[int]:
    """Exactly `rounds` refinement steps, switching to the class quotient
    once the partition stabilizes."""
    n = graph.n
    adjacency = graph.adjacency
    colors = list(init)
    prev_classes = class_count(colors)
    done = 0
    while done < rounds:
        if square == "neighbors":
            nxt = [
                table.relabel(
                    ("wl", colors[v], tuple(sorted(colors[u] for u in adjacency[v])))
                )
                for v in range(n)
            ]
        else:
            everyone = tuple(sorted(colors))
            nxt = [table.relabel(("wl", colors[v], everyone)) for v in range(n)]
        done += 1
        nxt_classes = class_count(nxt)
        colors = nxt
        if nxt_classes == prev_classes:
            break
        prev_classes = nxt_classes

    if done >= rounds:
        return colors

    # Stable partition: remaining rounds only rename classes, so iterate on
    # the quotient. At a stable partition every member of a class has the
    # same neighbor-class multiset, so one representative per class suffices.
    # Contexts are re-sorted by color value each round to produce byte-equal
    # keys to what full stepping would emit (other runs may still be in full
    # mode and must stay comparable).
    class_ids = sorted(set(colors))
    index_of = {c: i for i, c in enumerate(class_ids)}
    vertex_class = [index_of[c] for c in colors]
    if square == "neighbors":
        rep_of: dict[int, int] = {}
        for v, ci in enumerate(vertex_class):
            rep_of.setdefault(ci, v)
        context = [
            tuple(vertex_class[u] for u in adjacency[rep_of[ci]])
            for ci in range(len(class_ids))
        ]
    else:
        sizes = [0] * len(class_ids)
        for ci in vertex_class:
            sizes[ci] += 1
        full = tuple(
            ci for ci in range(len(class_ids)) for _ in range(sizes[ci])
        )
        context = [full for _ in range(len(class_ids))]

    current = class_ids
    for _ in range(rounds - done):
        current = [
            table.relabel(
                ("wl", current[ci], tuple(sorted(current[cj] for cj in context[ci])))
            )
            for ci in range(len(class_ids))
        ]
    return [current[ci] for ci in vertex_class]


def _thread_count() -> int:
    raw = os.environ.get("OSWL_THREADS", "1")
    try:
        value = int(raw)
    except ValueError:
        return 1
    return max(value, 1)


def _per_subgraph_colors(
    graph: LabeledGraph,
    tuples: Sequence[tuple[int, ...]],
    cfg: OswlConfig,
    rounds: int,
    table: ColorTable,
) -> Iterable[list[int]]:
    """Final marked colorings, one per subgraph, in subgraph order."""

    def run(g: tuple[int, ...]) -> list[int]:
        init = marked_initial_colors(graph, g, cfg.ordered, table)
        return _refine_marked(graph, init, cfg.square, rounds, table)

    workers = _thread_count()
    if workers == 1 or len(tuples) < 2:
        for g in tuples:
            yield run(g)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            yield from pool.map(run, tuples, chunksize=max(len(tuples) // (4 * workers), 1))


def _common_rounds(cfg: OswlConfig, *graphs: LabeledGraph) -> int:
    if cfg.max_rounds is not None:
        return cfg.max_rounds
    return max([g.n for g in graphs] + [1])


def oswl_vertex_colors(
    graph: LabeledGraph,
    cfg: OswlConfig,
    table: ColorTable | None = None,
    rounds: int | None = None,
) -> Coloring:
    """Final vertex coloring: relabel of each vertex's color multiset across
    all configured subgraphs."""
    table = table if table is not None else ColorTable()
    tuples = _subgraph_tuples(graph, cfg)
    r = rounds if rounds is not None else _common_rounds(cfg, graph)
    per_vertex: list[list[int]] = [[] for _ in range(graph.n)]
    for cg in _per_subgraph_colors(graph, tuples, cfg, r, table):
        for v in range(graph.n):
            per_vertex[v].append(cg[v])
    final = [
        table.relabel(("agg", tuple(sorted(per_vertex[v])))) for v in range(graph.n)
    ]
    return Coloring("vertices", final, r, True, list(final))


def oswl_graph_color(
    graph: LabeledGraph,
    cfg: OswlConfig,
    table: ColorTable | None = None,
    rounds: int | None = None,
) -> tuple[int, tuple]:
    """Graph color id plus the vertex-color histogram it relabels."""
    table = table if table is not None else ColorTable()
    coloring = oswl_vertex_colors(graph, cfg, table, rounds)
    hist = coloring.histogram()
    return table.relabel(("graph", tuple(sorted(coloring.colors)))), hist


def vs_oswl_graph_color(
    graph: LabeledGraph,
    cfg: OswlConfig,
    table: ColorTable | None = None,
    rounds: int | None = None,
) -> tuple[int, tuple]:
    """Vertex-subgraph variant: aggregate over vertices per subgraph first.

    Returns the graph color id and the histogram of per-subgraph colors.
    """
    table = table if table is not None else ColorTable()
    tuples = _subgraph_tuples(graph, cfg)
    r = rounds if rounds is not None else _common_rounds(cfg, graph)
    sub_colors = [
        table.relabel(("sub", tuple(sorted(cg))))
        for cg in _per_subgraph_colors(graph, tuples, cfg, r, table)
    ]
    hist = histogram(sub_colors)
    return table.relabel(("graph", tuple(sorted(sub_colors)))), hist


def oswl_pair_verdict(
    g1: LabeledGraph,
    g2: LabeledGraph,
    cfg: OswlConfig,
    table: ColorTable | None = None,
    vertex_subgraph: bool = False,
    algorithm: str = "oswl",
) -> Verdict:
    """Compare two graphs under a common round count R = max(n1, n2)."""
    table = table if table is not None else ColorTable()
    r = _common_rounds(cfg, g1, g2)
    if vertex_subgraph:
        _, h1 = vs_oswl_graph_color(g1, cfg, table, r)
        _, h2 = vs_oswl_graph_color(g2, cfg, table, r)
    else:
        _, h1 = oswl_graph_color(g1, cfg, table, r)
        _, h2 = oswl_graph_color(g2, cfg, table, r)
    verdict = "equivalent" if h1 == h2 else "distinguished"
    return Verdict(verdict, r, (h1, h2), algorithm)
