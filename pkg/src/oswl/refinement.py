"""Color refinement (1-WL) and folklore k-WL, plus the pair-comparison front end.

Both engines speak the same color-id language (see `colors.py`), so running
them on two graphs independently is the "parallel run with a shared relabel
table" convention: histograms from the two runs are directly comparable at
equal round indices.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

from .colors import ColorTable, Histogram, class_count, histogram
from .errors import CapExceeded, GuardError
from .graphs import LabeledGraph, atomic_pattern

DEFAULT_TUPLE_CAP = 10**6


@dataclass
class Coloring:
    """A refinement result over vertices or k-tuples.

    `colors[i]` is the color of object i (vertex i, or the i-th tuple in
    mixed-radix order for k-WL). `round` is the first stable round: one more
    refinement step would only rename classes, not split any.
    """

    space: str
    colors: list[int]
    round: int
    stable: bool
    vertex_colors: list[int] = field(default_factory=list)

    def histogram(self) -> Histogram:
        return histogram(self.colors)

    def num_classes(self) -> int:
        return class_count(self.colors)


def wl_step(
    adjacency: Sequence[Sequence[int]], colors: Sequence[int], table: ColorTable
) -> list[int]:
    """One 1-WL round: recolor by (own color, sorted neighbor colors)."""
    return [
        table.relabel(("wl", colors[v], tuple(sorted(colors[u] for u in nbrs))))
        for v, nbrs in enumerate(adjacency)
    ]


def initial_vertex_colors(graph: LabeledGraph, table: ColorTable) -> list[int]:
    return [table.relabel(("lab", lab)) for lab in graph.labels]


def color_refinement(
    graph: LabeledGraph,
    table: ColorTable | None = None,
    initial: Sequence[int] | None = None,
) -> Coloring:
    """Refine vertex colors to stability; at most n rounds are ever needed."""
    table = table if table is not None else ColorTable()
    colors = list(initial) if initial is not None else initial_vertex_colors(graph, table)
    rounds = 0
    prev_classes = class_count(colors)
    for _ in range(max(graph.n, 1)):
        nxt = wl_step(graph.adjacency, colors, table)
        nxt_classes = class_count(nxt)
        if nxt_classes == prev_classes:
            return Coloring("vertices", colors, rounds, True, list(colors))
        colors, prev_classes = nxt, nxt_classes
        rounds += 1
    return Coloring("vertices", colors, rounds, True, list(colors))


class _KwlState:
    """Colors over V^k in mixed-radix tuple order, with O(1) substitution."""

    def __init__(self, graph: LabeledGraph, k: int, table: ColorTable, cap: int):
        if k < 2:
            raise GuardError(f"k-WL needs k >= 2, got {k}")
        if graph.n == 0:
            raise GuardError("k-WL on the empty graph is undefined")
        if graph.n**k > cap:
            raise CapExceeded(
                f"{graph.n}^{k} tuples exceed the cap of {cap}; raise the cap to force"
            )
        self.graph = graph
        self.k = k
        self.table = table
        n = graph.n
        self.strides = [n ** (k - 1 - j) for j in range(k)]
        self.tuples = list(itertools.product(range(n), repeat=k))
        self.colors = [
            table.relabel(atomic_pattern(graph, tup)) for tup in self.tuples
        ]

    def step(self) -> None:
        n = self.graph.n
        k = self.k
        strides = self.strides
        colors = self.colors
        table = self.table
        new: list[int] = []
        for idx, tup in enumerate(self.tuples):
            base = [idx - tup[j] * strides[j] for j in range(k)]
            ctx = sorted(
                tuple(colors[base[j] + w * strides[j]] for j in range(k))
                for w in range(n)
            )
            new.append(table.relabel(("kwl", colors[idx], tuple(ctx))))
        self.colors = new

    def diagonal_of(self, colors: Sequence[int]) -> list[int]:
        diag_stride = sum(self.strides)
        return [colors[v * diag_stride] for v in range(self.graph.n)]

    def diagonal(self) -> list[int]:
        return self.diagonal_of(self.colors)


def k_wl(
    graph: LabeledGraph,
    k: int,
    table: ColorTable | None = None,
    cap: int = DEFAULT_TUPLE_CAP,
) -> Coloring:
    """Folklore k-WL to stability.

    Each round recolors tuple v by (own color, multiset over swap vertices w
    of the vector of colors of the k tuples with w substituted per position).
    The returned `vertex_colors` are the diagonal tuples (v, ..., v).
    """
    table = table if table is not None else ColorTable()
    state = _KwlState(graph, k, table, cap)
    rounds = 0
    prev_classes = class_count(state.colors)
    for _ in range(len(state.tuples) + 1):
        before = state.colors
        state.step()
        nxt_classes = class_count(state.colors)
        if nxt_classes == prev_classes:
            return Coloring("tuples", before, rounds, True, state.diagonal_of(before))
        prev_classes = nxt_classes
        rounds += 1
    raise AssertionError("k-WL failed to stabilize within the object-count bound")


@dataclass(frozen=True)
class AlgorithmSpec:
    """Parsed engine selector: cr, kwl:k, oswl:k, or vs-oswl:k."""

    kind: str
    k: int = 0
    square: str = "neighbors"
    ordered: bool = True

    def name(self) -> str:
        if self.kind == "cr":
            return "cr"
        return f"{self.kind}:{self.k}"


def parse_algorithm(text: str) -> AlgorithmSpec:
    parts = text.strip().split(":")
    kind = parts[0]
    if kind == "cr":
        if len(parts) > 1:
            raise GuardError("cr takes no dimension suffix")
        return AlgorithmSpec("cr")
    if kind not in ("kwl", "oswl", "vs-oswl"):
        raise GuardError(f"unknown algorithm {text!r}")
    if len(parts) != 2:
        raise GuardError(f"algorithm {kind!r} needs a dimension, e.g. {kind}:2")
    try:
        k = int(parts[1])
    except ValueError as exc:
        raise GuardError(f"bad dimension in {text!r}") from exc
    if kind == "kwl" and k < 2:
        raise GuardError("kwl needs k >= 2")
    if kind in ("oswl", "vs-oswl") and k < 0:
        raise GuardError(f"{kind} needs k >= 0")
    return AlgorithmSpec(kind, k)


@dataclass
class Verdict:
    verdict: str
    round: int
    histograms: tuple[Histogram, Histogram]
    algorithm: str

    @property
    def distinguished(self) -> bool:
        return self.verdict == "distinguished"

    def to_json(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "verdict": self.verdict,
            "round": self.round,
            "histograms": [
                [[str(c), m] for c, m in h] for h in self.histograms
            ],
        }


def _lockstep(histograms_fn, step_fn, all_colors_fn, algorithm: str) -> Verdict:
    """Run two refinements in parallel rounds until verdict or joint stability.

    Reports the first round whose histograms differ, or (on "equivalent") the
    first round at which the joint partition over both object sets stopped
    splitting. Joint class counts grow strictly until stable, which bounds the
    loop by the total object count.
    """
    rounds = 0
    prev_joint = None
    while True:
        h1, h2 = histograms_fn()
        if h1 != h2:
            return Verdict("distinguished", rounds, (h1, h2), algorithm)
        joint = class_count(all_colors_fn())
        if joint == prev_joint:
            return Verdict("equivalent", max(rounds - 1, 0), (h1, h2), algorithm)
        prev_joint = joint
        step_fn()
        rounds += 1


def distinguish(
    g1: LabeledGraph,
    g2: LabeledGraph,
    algorithm: str | AlgorithmSpec,
    table: ColorTable | None = None,
    tuple_cap: int = DEFAULT_TUPLE_CAP,
    oswl_cap: int | None = None,
    oswl_config=None,
) -> Verdict:
    """Decide whether an engine tells g1 and g2 apart.

    cr/kwl run in lockstep and report the first round whose color histograms
    differ; with no difference up to joint stability the verdict is
    "equivalent". The subgraph engines compare their final aggregated
    histograms at a common round count (max of the two vertex counts).
    """
    spec = parse_algorithm(algorithm) if isinstance(algorithm, str) else algorithm
    table = table if table is not None else ColorTable()

    if spec.kind == "cr":
        c1 = initial_vertex_colors(g1, table)
        c2 = initial_vertex_colors(g2, table)

        def hists():
            return histogram(c1), histogram(c2)

        def step():
            c1[:] = wl_step(g1.adjacency, c1, table)
            c2[:] = wl_step(g2.adjacency, c2, table)

        return _lockstep(hists, step, lambda: c1 + c2, spec.name())

    if spec.kind == "kwl":
        s1 = _KwlState(g1, spec.k, table, tuple_cap)
        s2 = _KwlState(g2, spec.k, table, tuple_cap)

        def hists():
            return histogram(s1.colors), histogram(s2.colors)

        def step():
            s1.step()
            s2.step()

        return _lockstep(hists, step, lambda: s1.colors + s2.colors, spec.name())

    if spec.kind in ("oswl", "vs-oswl"):
        from .subgraph_refinement import OswlConfig, oswl_pair_verdict

        if oswl_config is None:
            cfg = OswlConfig(k=spec.k, square=spec.square, ordered=spec.ordered)
        else:
            cfg = oswl_config
        if oswl_cap is not None:
            cfg = cfg.with_cap(oswl_cap)
        return oswl_pair_verdict(
            g1, g2, cfg, table, vertex_subgraph=(spec.kind == "vs-oswl"),
            algorithm=spec.name(),
        )

    raise GuardError(f"unknown algorithm kind {spec.kind!r}")
