"""Subgraph encodings: exact top-k MAP, perturb-and-MAP sampling, the
implicit-MLE gradient estimator, mask policies, and an exact enumeration
oracle for tests.

Encodings z live over vertices (or edges, for edge policies). Unordered mode
is a k-hot indicator; ordered mode stores k + 1 - rank, so the top-ranked
vertex carries value k and unselected vertices carry 0.
"""
from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .errors import CapExceeded, GuardError
from .graphs import LabeledGraph

ORACLE_CAP = 10**5


@dataclass(frozen=True)
class EncodingVector:
    """Integer encoding of one sampled subgraph."""

    z: tuple[int, ...]
    mode: str
    k: int

    def __post_init__(self):
        if self.mode not in ("unordered", "ordered"):
            raise GuardError(f"unknown encoding mode {self.mode!r}")
        nonzero = [x for x in self.z if x != 0]
        if len(nonzero) != self.k:
            raise GuardError(
                f"encoding must have exactly k={self.k} nonzero entries, got {len(nonzero)}"
            )
        if self.mode == "unordered":
            if any(x not in (0, 1) for x in self.z):
                raise GuardError("unordered encodings are binary")
        else:
            if sorted(nonzero) != list(range(1, self.k + 1)):
                raise GuardError(
                    "ordered encodings assign each value in 1..k exactly once"
                )

    def selected(self) -> tuple[int, ...]:
        """Selected vertices; in ordered mode sorted by rank (best first)."""
        if self.mode == "unordered":
            return tuple(i for i, x in enumerate(self.z) if x)
        return tuple(
            i for _, i in sorted((-x, i) for i, x in enumerate(self.z) if x)
        )

    def rank_of(self, vertex: int) -> int | None:
        """1-based rank in ordered mode; None when unselected."""
        if self.z[vertex] == 0:
            return None
        if self.mode == "unordered":
            raise GuardError("ranks exist only in ordered mode")
        return self.k + 1 - self.z[vertex]


@dataclass(frozen=True)
class SamplerConfig:
    """Sampling and gradient-estimation settings for one policy head."""

    k: int
    m: int = 1
    mode: str = "unordered"
    noise: str = "gumbel"
    scale: float = 1.0
    lam: float = 1.0
    grad_agg: str = "sum"
    num_noise_samples: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.k < 1:
            raise GuardError(f"sample size must be >= 1, got {self.k}")
        if self.m < 1:
            raise GuardError(f"row count must be >= 1, got {self.m}")
        if self.mode not in ("unordered", "ordered"):
            raise GuardError(f"unknown mode {self.mode!r}")
        if self.noise not in ("gumbel", "none"):
            raise GuardError(f"unknown noise kind {self.noise!r}")
        if not self.scale > 0:
            raise GuardError("noise scale must be positive")
        if not self.lam > 0:
            raise GuardError("perturbation strength must be positive")
        if self.grad_agg not in ("sum", "mean"):
            raise GuardError(f"unknown gradient aggregation {self.grad_agg!r}")
        if self.num_noise_samples < 1:
            raise GuardError("need at least one noise sample")


def _check_theta(theta) -> np.ndarray:
    row = np.asarray(theta, dtype=np.float64)
    if row.ndim != 1:
        raise GuardError(f"theta row must be 1-d, got shape {row.shape}")
    if not np.all(np.isfinite(row)):
        raise GuardError("theta contains non-finite entries")
    return row


def _top_k_indices(row: np.ndarray, k: int) -> np.ndarray:
    """Indices of the k largest entries, ties resolved toward smaller index.

    Selection runs in O(n) via argpartition; only the k winners are sorted.
    """
    n = row.shape[0]
    if k == n:
        return np.arange(n)
    part = np.argpartition(-row, k - 1)[:k]
    threshold = row[part].min()
    strict = np.flatnonzero(row > threshold)
    tied = np.flatnonzero(row == threshold)
    fill = k - strict.shape[0]
    return np.concatenate([strict, tied[:fill]])


def map_solve(theta, k: int, mode: str = "unordered") -> EncodingVector:
    """Exact argmax of <z, theta> over the encoding set.

    Unordered: indicator of the top-k entries. Ordered: the i-th best entry
    gets value k + 1 - i, so the inner product totals rank-weighted scores.
    Both reduce to picking the k largest entries; the declared tie rule
    prefers smaller vertex indices for membership and for rank.
    """
    row = _check_theta(theta)
    n = row.shape[0]
    if not 1 <= k <= n:
        raise GuardError(f"need 1 <= k <= n, got k={k}, n={n}")
    if mode not in ("unordered", "ordered"):
        raise GuardError(f"unknown mode {mode!r}")
    chosen = _top_k_indices(row, k)
    z = [0] * n
    if mode == "unordered":
        for i in chosen:
            z[int(i)] = 1
    else:
        # rank within the winners: by value descending, index ascending
        order = chosen[np.lexsort((chosen, -row[chosen]))]
        for rank_minus_1, i in enumerate(order):
            z[int(i)] = k - rank_minus_1
    return EncodingVector(tuple(z), mode, k)


def sample_subgraph(
    theta, cfg: SamplerConfig, rng: np.random.Generator
) -> EncodingVector:
    """Perturb-and-MAP draw: MAP of theta plus Gumbel noise (or plain MAP)."""
    row = _check_theta(theta)
    if cfg.noise == "gumbel":
        row = row + rng.gumbel(loc=0.0, scale=cfg.scale, size=row.shape)
    return map_solve(row, cfg.k, cfg.mode)


@dataclass(frozen=True)
class MaskedAdjacency:
    """Dense adjacency restricted to a sampled subgraph.

    Kept in original vertex indexing; ordered codes additionally carry the
    vertex -> rank map so downstream features can embed positions.
    """

    matrix: np.ndarray
    vertex_mask: np.ndarray
    rank_of_vertex: dict[int, int] | None = None

    def __post_init__(self):
        if self.matrix.shape != (self.vertex_mask.shape[0],) * 2:
            raise GuardError("adjacency / mask dimension mismatch")


def to_masked_adjacency(z: EncodingVector, graph: LabeledGraph) -> MaskedAdjacency:
    """Zero out rows/columns of unselected vertices in the dense adjacency."""
    if len(z.z) != graph.n:
        raise GuardError(
            f"encoding length {len(z.z)} does not match graph size {graph.n}"
        )
    mask = np.array([x != 0 for x in z.z], dtype=bool)
    matrix = np.zeros((graph.n, graph.n), dtype=np.float64)
    for u, v in graph.edges:
        if mask[u] and mask[v]:
            matrix[u, v] = matrix[v, u] = 1.0
    ranks = None
    if z.mode == "ordered":
        ranks = {v: z.k + 1 - z.z[v] for v in range(graph.n) if z.z[v] != 0}
    return MaskedAdjacency(matrix, mask, ranks)


def vertex_grad_from_edges(
    edge_grads, graph: LabeledGraph, agg: str = "sum"
) -> np.ndarray:
    """Fold per-edge loss gradients into per-vertex ones over N_G(v)."""
    rows = np.asarray(edge_grads, dtype=np.float64)
    if rows.shape != (len(graph.edges),):
        raise GuardError(
            f"expected one gradient per edge ({len(graph.edges)}), got shape {rows.shape}"
        )
    if not np.all(np.isfinite(rows)):
        raise GuardError("edge gradients contain non-finite entries")
    out = np.zeros(graph.n, dtype=np.float64)
    for (u, v), g in zip(graph.edges, rows):
        out[u] += g
        out[v] += g
    if agg == "mean":
        degrees = np.array([graph.degree(v) for v in range(graph.n)], dtype=np.float64)
        np.divide(out, degrees, out=out, where=degrees > 0)
    return out


def imle_finite_difference(
    theta, grad_vector, cfg: SamplerConfig, rng: np.random.Generator
) -> np.ndarray:
    """Core implicit-MLE step over an arbitrary encoding coordinate space.

    Averages (z*(theta + eps) - z*(theta + eps - lam * g)) / lam over noise
    draws. A zero g yields exactly zero. Callers scoring vertices should use
    :func:`imle_gradient`, which folds per-edge loss gradients first; callers
    scoring edges pass their per-edge gradients here directly.
    """
    row = _check_theta(theta)
    g = np.asarray(grad_vector, dtype=np.float64)
    if g.shape != row.shape or not np.all(np.isfinite(g)):
        raise GuardError("gradient vector must match theta and be finite")
    total = np.zeros_like(row)
    for _ in range(cfg.num_noise_samples):
        if cfg.noise == "gumbel":
            eps = rng.gumbel(loc=0.0, scale=cfg.scale, size=row.shape)
        else:
            eps = 0.0
        plus = np.asarray(map_solve(row + eps, cfg.k, cfg.mode).z, dtype=np.float64)
        shifted = np.asarray(
            map_solve(row + eps - cfg.lam * g, cfg.k, cfg.mode).z,
            dtype=np.float64,
        )
        total += (plus - shifted) / cfg.lam
    return total / cfg.num_noise_samples


def imle_gradient(
    theta,
    edge_grads,
    graph: LabeledGraph,
    cfg: SamplerConfig,
    rng: np.random.Generator,
    extra_vertex_grad=None,
) -> np.ndarray:
    """Implicit-MLE estimate of d loss / d theta for one vertex-score row.

    Aggregates the downstream per-edge gradients onto vertices over N_G(v);
    extra_vertex_grad (e.g. from auxiliary losses differentiated directly by
    vertex) is added in before the shift. A zero downstream gradient yields
    exactly zero.
    """
    row = _check_theta(theta)
    if row.shape[0] != graph.n:
        raise GuardError("theta length must equal the vertex count")
    vertex_grad = vertex_grad_from_edges(edge_grads, graph, cfg.grad_agg)
    if extra_vertex_grad is not None:
        extra = np.asarray(extra_vertex_grad, dtype=np.float64)
        if extra.shape != vertex_grad.shape or not np.all(np.isfinite(extra)):
            raise GuardError("bad auxiliary vertex gradient")
        vertex_grad = vertex_grad + extra
    return imle_finite_difference(row, vertex_grad, cfg, rng)


@dataclass(frozen=True)
class PolicyMasks:
    """Vertex / edge keep-masks for one sampled subgraph."""

    vertex_mask: np.ndarray
    edge_mask: np.ndarray


_EGO_RE = re.compile(r"^ego\((\d+)\)-(select|delete)$")

POLICIES = (
    "node-select",
    "node-delete",
    "edge-select",
    "edge-delete",
    "ego(r)-select",
    "ego(r)-delete",
)


def policy_kind(policy: str) -> tuple[str, str]:
    """Split a policy name into (space, direction).

    Space is "node", "edge", or "ego"; direction is "select" or "delete".
    """
    ego = _EGO_RE.match(policy)
    if ego:
        return "ego", ego.group(2)
    if policy in ("node-select", "node-delete", "edge-select", "edge-delete"):
        space, direction = policy.split("-")
        return space, direction
    raise GuardError(f"unknown policy {policy!r}")


def _edge_mask_from_vertices(graph: LabeledGraph, vmask: np.ndarray) -> np.ndarray:
    return np.array([bool(vmask[u] and vmask[v]) for u, v in graph.edges], dtype=bool)


def _ego_closure(graph: LabeledGraph, centers: list[int], radius: int) -> np.ndarray:
    mask = np.zeros(graph.n, dtype=bool)
    frontier = set(centers)
    mask[list(frontier)] = True
    for _ in range(radius):
        nxt = set()
        for v in frontier:
            for w in graph.adjacency[v]:
                if not mask[w]:
                    mask[w] = True
                    nxt.add(w)
        frontier = nxt
    return mask


def apply_policy(policy: str, z: EncodingVector, graph: LabeledGraph) -> PolicyMasks:
    """Turn one sampled encoding into keep-masks.

    Node and ego policies take vertex encodings; edge policies take encodings
    over the canonical edge list (all vertices stay, only edges change).
    Delete variants complement their select counterpart's kept set.
    """
    ego = _EGO_RE.match(policy)
    if ego:
        if len(z.z) != graph.n:
            raise GuardError("ego policies need a vertex encoding")
        radius = int(ego.group(1))
        centers = [i for i, x in enumerate(z.z) if x]
        vmask = _ego_closure(graph, centers, radius)
        if ego.group(2) == "delete":
            vmask = ~vmask
        return PolicyMasks(vmask, _edge_mask_from_vertices(graph, vmask))
    if policy in ("node-select", "node-delete"):
        if len(z.z) != graph.n:
            raise GuardError("node policies need a vertex encoding")
        vmask = np.array([x != 0 for x in z.z], dtype=bool)
        if policy == "node-delete":
            vmask = ~vmask
        return PolicyMasks(vmask, _edge_mask_from_vertices(graph, vmask))
    if policy in ("edge-select", "edge-delete"):
        if len(z.z) != len(graph.edges):
            raise GuardError("edge policies need an encoding over the edge list")
        emask = np.array([x != 0 for x in z.z], dtype=bool)
        if policy == "edge-delete":
            emask = ~emask
        vmask = np.ones(graph.n, dtype=bool)
        return PolicyMasks(vmask, emask)
    raise GuardError(f"unknown policy {policy!r}")


def enumerate_encodings(n: int, k: int, mode: str):
    """All valid encodings as tuples, in deterministic order."""
    if not 1 <= k <= n:
        raise GuardError(f"need 1 <= k <= n, got k={k}, n={n}")
    if mode == "unordered":
        count = math.comb(n, k)
        if count > ORACLE_CAP:
            raise CapExceeded(f"{count} unordered encodings exceed {ORACLE_CAP}")
        for members in itertools.combinations(range(n), k):
            z = [0] * n
            for i in members:
                z[i] = 1
            yield tuple(z)
    elif mode == "ordered":
        count = math.perm(n, k)
        if count > ORACLE_CAP:
            raise CapExceeded(f"{count} ordered encodings exceed {ORACLE_CAP}")
        for seq in itertools.permutations(range(n), k):
            z = [0] * n
            for rank_minus_1, i in enumerate(seq):
                z[i] = k - rank_minus_1
            yield tuple(z)
    else:
        raise GuardError(f"unknown mode {mode!r}")


def exact_distribution_oracle(
    theta, k: int, mode: str = "unordered"
) -> tuple[list[tuple[tuple[int, ...], float]], float]:
    """Exact exponential-family table: [(z, p(z; theta)), ...] and log A.

    p(z) = exp(<z, theta> - A) with A the log partition over all encodings.
    Enumeration only; meant for tests and tiny instances.
    """
    row = _check_theta(theta)
    encodings = list(enumerate_encodings(row.shape[0], k, mode))
    scores = np.array([np.dot(z, row) for z in encodings])
    log_a = float(logsumexp(scores))
    probs = np.exp(scores - log_a)
    return list(zip(encodings, probs.tolist())), log_a
