"""Hard-instance generators: CFI gadget pairs, twisted grid graphs, and
backbone-cycle composites, plus the colorful distance-two-clique detector.

All generators are deterministic: clouds are emitted in base-vertex order and
cloud members in ascending subset-bitmask order, so outputs are stable
golden-file material.
"""
from __future__ import annotations

import importlib.resources
import itertools
import json
from dataclasses import dataclass

from .errors import GraphError, GuardError
from .graphs import LabeledGraph, build_graph

CFI_MAX_K = 15
FURER_MAX_DEGREE = 12
D2C_MAX_SIZE = 6


def _parity_masks(width: int, parity: int) -> list[int]:
    """Bitmasks over `width` bits with popcount of the given parity, ascending."""
    return [m for m in range(1 << width) if bin(m).count("1") % 2 == parity]


@dataclass(frozen=True)
class CfiGadget:
    """A CFI gadget over the complete base graph on k+1 vertices.

    Every base vertex becomes a cloud of nodes, one per even subset of its
    incident base edges (variant "H": base vertex 0 uses the odd subsets).
    Every base edge e becomes a two-node cloud {e0, e1}; a vertex-cloud node
    (v, S) connects to e1 when e is in S and to e0 otherwise. Cloud labels
    are distinct per cloud and shared between the two variants.
    """

    k: int
    variant: str
    graph: LabeledGraph
    cloud_map: dict[int, str]

    def clouds(self) -> dict[str, tuple[int, ...]]:
        out: dict[str, list[int]] = {}
        for node, key in self.cloud_map.items():
            out.setdefault(key, []).append(node)
        return {key: tuple(sorted(nodes)) for key, nodes in out.items()}

    def sidecar(self) -> dict:
        clouds = self.clouds()
        return {
            "generator": "cfi",
            "k": self.k,
            "variant": self.variant,
            "clouds": {key: list(nodes) for key, nodes in sorted(clouds.items())},
            "kinds": {key: cloud_kind(key) for key in sorted(clouds)},
        }


def cloud_kind(key: str) -> str:
    return "vertex" if key.startswith("v") else "edge"


def is_vertex_cloud(key: str) -> bool:
    return cloud_kind(key) == "vertex"


def gen_cfi(k: int, variant: str) -> CfiGadget:
    """Build the gadget pair member for parameter k (variant "G" or "H").

    Derived size (the construction's own arithmetic): (k+1) * 2^(k-1)
    vertex-cloud nodes plus 2 * C(k+1, 2) edge nodes; e.g. k=2 gives 12.
    """
    if k < 1:
        raise GuardError(f"cfi parameter must be >= 1, got {k}")
    if k > CFI_MAX_K:
        raise GuardError(f"cfi parameter {k} rejected (2^k blowup guard, max {CFI_MAX_K})")
    if variant not in ("G", "H"):
        raise GuardError(f"cfi variant must be G or H, got {variant!r}")

    base_vertices = range(k + 1)
    base_edges = list(itertools.combinations(base_vertices, 2))
    incident = {
        v: [i for i, e in enumerate(base_edges) if v in e] for v in base_vertices
    }

    node_ids: dict[tuple, int] = {}
    labels: list[int] = []
    cloud_map: dict[int, str] = {}

    for v in base_vertices:
        parity = 1 if (variant == "H" and v == 0) else 0
        for mask in _parity_masks(len(incident[v]), parity):
            node = len(labels)
            node_ids[("v", v, mask)] = node
            labels.append(v)
            cloud_map[node] = f"v{v}"
    for i, (a, b) in enumerate(base_edges):
        for side in (0, 1):
            node = len(labels)
            node_ids[("e", i, side)] = node
            labels.append(k + 1 + i)
            cloud_map[node] = f"e{a}-{b}"

    edges: list[tuple[int, int]] = []
    for i in range(len(base_edges)):
        edges.append((node_ids[("e", i, 0)], node_ids[("e", i, 1)]))
    for v in base_vertices:
        parity = 1 if (variant == "H" and v == 0) else 0
        for mask in _parity_masks(len(incident[v]), parity):
            node = node_ids[("v", v, mask)]
            for bit, edge_idx in enumerate(incident[v]):
                side = 1 if (mask >> bit) & 1 else 0
                edges.append((node, node_ids[("e", edge_idx, side)]))

    graph = build_graph(len(labels), edges, labels)
    return CfiGadget(k, variant, graph, cloud_map)


def cfi_pair(k: int) -> tuple[CfiGadget, CfiGadget]:
    return gen_cfi(k, "G"), gen_cfi(k, "H")


@dataclass(frozen=True)
class FurerGraph:
    """One twisted-or-not grid graph with its cloud bookkeeping."""

    h: int
    n: int
    twisted_edges: tuple[tuple[int, int], ...]
    graph: LabeledGraph
    cloud_map: dict[int, str]
    base_edges: tuple[tuple[int, int], ...]

    def sidecar(self) -> dict:
        clouds: dict[str, list[int]] = {}
        for node, key in self.cloud_map.items():
            clouds.setdefault(key, []).append(node)
        return {
            "generator": "furer",
            "h": self.h,
            "n": self.n,
            "twisted_edges": [list(e) for e in self.twisted_edges],
            "clouds": {key: sorted(nodes) for key, nodes in sorted(clouds.items())},
            "kinds": {key: "vertex" for key in sorted(clouds)},
        }


@dataclass(frozen=True)
class FurerPair:
    h: int
    n: int
    twist_edge: tuple[int, int]
    x_graph: LabeledGraph
    y_graph: LabeledGraph
    cloud_map: dict[int, str]


def _grid(h: int, n: int) -> tuple[int, list[tuple[int, int]]]:
    """h x n grid; vertex (r, c) has index r * n + c."""
    count = h * n
    edges = []
    for r in range(h):
        for c in range(n):
            v = r * n + c
            if c + 1 < n:
                edges.append((v, v + 1))
            if r + 1 < h:
                edges.append((v, v + n))
    return count, sorted(edges)


def default_twist_edge(h: int, n: int) -> tuple[int, int]:
    """First base edge whose endpoints both have degree 3, else the first edge."""
    count, edges = _grid(h, n)
    deg = [0] * count
    for u, v in edges:
        deg[u] += 1
        deg[v] += 1
    for u, v in edges:
        if deg[u] == 3 and deg[v] == 3:
            return (u, v)
    return edges[0]


def furer_graph(
    h: int, n: int, twisted_edges: tuple[tuple[int, int], ...] = ()
) -> FurerGraph:
    """Grid graph with every base vertex of degree d blown up into a cloud of
    2^(d-1) even-subset nodes; listed base edges use the twisted (parity-
    flipped) connection rule."""
    if h < 1:
        raise GuardError(f"grid height must be >= 1, got {h}")
    if n < 2:
        raise GuardError(f"grid width must be >= 2, got {n}")
    count, base_edges = _grid(h, n)
    twisted = set()
    for u, v in twisted_edges:
        e = (u, v) if u < v else (v, u)
        if e not in set(base_edges):
            raise GuardError(f"twist edge {e} is not a base grid edge")
        twisted.add(e)

    incident = {v: [] for v in range(count)}
    for i, (u, v) in enumerate(base_edges):
        incident[u].append(i)
        incident[v].append(i)
    for v in range(count):
        if len(incident[v]) > FURER_MAX_DEGREE:
            raise GuardError(
                f"base degree {len(incident[v])} exceeds guard {FURER_MAX_DEGREE}"
            )

    node_ids: dict[tuple[int, int], int] = {}
    labels: list[int] = []
    cloud_map: dict[int, str] = {}
    members: dict[int, list[tuple[int, int]]] = {}
    for v in range(count):
        members[v] = []
        for mask in _parity_masks(len(incident[v]), 0):
            node = len(labels)
            node_ids[(v, mask)] = node
            labels.append(v)
            cloud_map[node] = f"v{v}"
            members[v].append((mask, node))

    edges: list[tuple[int, int]] = []
    for i, (u, v) in enumerate(base_edges):
        bit_u = incident[u].index(i)
        bit_v = incident[v].index(i)
        flip = (u, v) in twisted
        for mask_u, node_u in members[u]:
            in_u = (mask_u >> bit_u) & 1
            for mask_v, node_v in members[v]:
                in_v = (mask_v >> bit_v) & 1
                same = in_u == in_v
                if same != flip:
                    edges.append((node_u, node_v))

    graph = build_graph(len(labels), edges, labels)
    return FurerGraph(h, n, tuple(sorted(twisted)), graph, cloud_map, tuple(base_edges))


def gen_furer(
    h: int | None = None,
    n: int = 4,
    twisted: bool = False,
    k_base: int | None = None,
) -> FurerGraph:
    """Convenience wrapper: k_base sets h = k_base + 1; `twisted` applies the
    deterministic default twist edge."""
    if k_base is not None:
        if h is not None and h != k_base + 1:
            raise GuardError("give either h or k_base, not conflicting values")
        h = k_base + 1
    if h is None:
        raise GuardError("grid height h (or k_base) is required")
    twist = (default_twist_edge(h, n),) if twisted else ()
    return furer_graph(h, n, twist)


def furer_pair(h: int | None = None, n: int = 4, k_base: int | None = None) -> FurerPair:
    x = gen_furer(h, n, twisted=False, k_base=k_base)
    y = gen_furer(h, n, twisted=True, k_base=k_base)
    return FurerPair(x.h, x.n, y.twisted_edges[0], x.graph, y.graph, x.cloud_map)


def furer_golden() -> dict:
    """Pinned smallest separating ladder instance plus the scan table that
    produced it (regenerate with scripts/find_furer_threshold.py)."""
    path = importlib.resources.files("oswl").joinpath("data/furer_min_n.json")
    return json.loads(path.read_text())


def furer_twist_isomorphism(fg: FurerGraph, path: list[int]) -> dict[int, int]:
    """Explicit node bijection moving a twist across the base path.

    For consecutive twisted edges e1 = (path[0], path[1]), e2 = (path[1],
    path[2]) the map flips membership of both edges in every cloud node of
    the middle vertex, which turns the double-twisted graph into the
    untwisted one. Returns the node mapping (identity elsewhere).
    """
    if len(path) != 3:
        raise GraphError("twist moving needs a length-3 base path")
    a, b, c = path
    count, base_edges = _grid(fg.h, fg.n)
    edge_idx = {e: i for i, e in enumerate(base_edges)}
    e1 = tuple(sorted((a, b)))
    e2 = tuple(sorted((b, c)))
    if e1 not in edge_idx or e2 not in edge_idx:
        raise GraphError("path edges are not grid edges")
    incident = {v: [] for v in range(count)}
    for i, (u, v) in enumerate(base_edges):
        incident[u].append(i)
        incident[v].append(i)
    bit1 = incident[b].index(edge_idx[e1])
    bit2 = incident[b].index(edge_idx[e2])
    node_of = {}
    for node, key in fg.cloud_map.items():
        base_v = int(key[1:])
        node_of[node] = base_v
    # Rebuild (vertex, mask) ids in generation order to find flip partners.
    mapping = {}
    mask_of: dict[int, int] = {}
    ids: dict[tuple[int, int], int] = {}
    next_id = 0
    for v in range(count):
        for mask in _parity_masks(len(incident[v]), 0):
            ids[(v, mask)] = next_id
            mask_of[next_id] = mask
            next_id += 1
    for node, base_v in node_of.items():
        if base_v == b:
            flipped = mask_of[node] ^ (1 << bit1) ^ (1 << bit2)
            mapping[node] = ids[(b, flipped)]
        else:
            mapping[node] = node
    return mapping


def gen_backbone(k: int, pattern: str) -> LabeledGraph:
    """Four-cycle backbone with one gadget copy hung off each cycle vertex.

    "alternating" attaches the G-variant at opposite cycle vertices 0 and 2;
    "blocked" attaches the two G copies at adjacent vertices 0 and 1. Every
    gadget node is adjacent to its backbone vertex. The backbone label is one
    past the largest gadget label.
    """
    if pattern not in ("alternating", "blocked"):
        raise GuardError(f"pattern must be alternating or blocked, got {pattern!r}")
    g_gadget = gen_cfi(k, "G").graph
    h_gadget = gen_cfi(k, "H").graph
    order = (
        ["G", "H", "G", "H"] if pattern == "alternating" else ["G", "G", "H", "H"]
    )
    red = max(g_gadget.labels) + 1
    labels: list[int] = [red] * 4
    edges: list[tuple[int, int]] = [(0, 1), (1, 2), (2, 3), (0, 3)]
    offset = 4
    for anchor, variant in enumerate(order):
        gadget = g_gadget if variant == "G" else h_gadget
        for u, v in gadget.edges:
            edges.append((offset + u, offset + v))
        for w in range(gadget.n):
            edges.append((anchor, offset + w))
        labels.extend(gadget.labels)
        offset += gadget.n
    return build_graph(offset, edges, labels)


def backbone_pair(k: int) -> tuple[LabeledGraph, LabeledGraph]:
    return gen_backbone(k, "alternating"), gen_backbone(k, "blocked")


def find_colorful_d2_clique(
    graph: LabeledGraph, size: int, cloud_map: dict[int, str]
) -> tuple[int, ...] | None:
    """Search for `size` vertex-cloud nodes, pairwise at distance exactly two
    and all from distinct clouds. Brute-force backtracking over the
    vertex-cloud nodes; None when no witness exists."""
    if size < 1:
        raise GuardError(f"clique size must be >= 1, got {size}")
    if size > D2C_MAX_SIZE:
        raise GuardError(f"clique size {size} exceeds guard {D2C_MAX_SIZE}")
    candidates = sorted(v for v, key in cloud_map.items() if is_vertex_cloud(key))
    neigh = [set(graph.adjacency[v]) for v in range(graph.n)]

    def compatible(u: int, v: int) -> bool:
        if u == v or cloud_map[u] == cloud_map[v]:
            return False
        if graph.has_edge(u, v):
            return False
        return bool(neigh[u] & neigh[v])

    chosen: list[int] = []

    def extend(start: int) -> tuple[int, ...] | None:
        if len(chosen) == size:
            return tuple(chosen)
        for i in range(start, len(candidates)):
            v = candidates[i]
            if all(compatible(v, u) for u in chosen):
                chosen.append(v)
                found = extend(i + 1)
                if found is not None:
                    return found
                chosen.pop()
        return None

    return extend(0)
