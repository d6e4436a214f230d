"""Upstream score model and downstream subgraph model.

The upstream model runs three normalized-propagation layers over the
original graph and emits one score row per policy head; permuting the
input vertices permutes the score columns identically. The downstream
model runs message passing separately inside each sampled subgraph
(masked vertices are zeroed after every layer and excluded from pooling),
mean-pools within each subgraph, mean-pools across subgraphs, and applies
a final readout.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import GuardError
from ..graphs import LabeledGraph
from ..sampling import PolicyMasks
from .layers import (
    GCNLayer,
    GINLayer,
    LayerSpec,
    Linear,
    ReLU,
    ReadoutMLP,
    masked_mean_pool,
    masked_mean_pool_backward,
    mean_pool,
    mean_pool_backward,
    normalized_adjacency,
)
from .params import ParamStore


def one_hot_labels(graph: LabeledGraph, num_labels: int) -> np.ndarray:
    if max(graph.labels, default=0) >= num_labels:
        raise GuardError(
            f"graph label {max(graph.labels)} outside feature space {num_labels}"
        )
    out = np.zeros((graph.n, num_labels))
    out[np.arange(graph.n), list(graph.labels)] = 1.0
    return out


def masked_dense_adjacency(graph: LabeledGraph, masks: PolicyMasks) -> np.ndarray:
    """Dense adjacency keeping only surviving edges between surviving vertices."""
    a = np.zeros((graph.n, graph.n))
    for (u, v), keep in zip(graph.edges, masks.edge_mask):
        if keep and masks.vertex_mask[u] and masks.vertex_mask[v]:
            a[u, v] = a[v, u] = 1.0
    return a


def full_masks(graph: LabeledGraph) -> PolicyMasks:
    return PolicyMasks(
        np.ones(graph.n, dtype=bool), np.ones(len(graph.edges), dtype=bool)
    )


@dataclass
class SubgraphBatch:
    """One graph plus the m sampled keep-masks the downstream model consumes."""

    graph: LabeledGraph
    masks: list[PolicyMasks]
    features: np.ndarray

    def __post_init__(self):
        if not self.masks:
            raise GuardError("need at least one subgraph mask")
        for pm in self.masks:
            if pm.vertex_mask.shape != (self.graph.n,):
                raise GuardError("vertex mask size does not match the graph")
            if pm.edge_mask.shape != (len(self.graph.edges),):
                raise GuardError("edge mask size does not match the edge list")
        if self.features.shape[0] != self.graph.n:
            raise GuardError("feature rows must match the vertex count")

    def copy_features(self, pm: PolicyMasks) -> np.ndarray:
        """Per-copy input: shared features plus the membership indicator."""
        x = np.concatenate(
            [self.features, pm.vertex_mask.astype(np.float64)[:, None]], axis=1
        )
        x[~pm.vertex_mask] = 0.0
        return x


class UpstreamModel:
    """Three propagation layers with ReLU, then a per-head linear score map."""

    def __init__(
        self,
        store: ParamStore,
        d_in: int,
        hidden: int,
        heads: int,
        rng: np.random.Generator,
        edge_outputs: bool = False,
        depth: int = 3,
    ):
        self.edge_outputs = edge_outputs
        self.layers = []
        self.acts = []
        d = d_in
        for i in range(depth):
            spec = LayerSpec("gcn", d, hidden)
            self.layers.append(GCNLayer(store, f"up.gcn{i}", spec, "upstream", rng))
            self.acts.append(ReLU())
            d = hidden
        self.head = Linear(
            store, "up.head", LayerSpec("linear", hidden, heads), "upstream", rng
        )

    def forward(self, graph: LabeledGraph, features: np.ndarray) -> np.ndarray:
        """Score matrix theta with one row per head, one column per vertex
        (per canonical edge for edge outputs)."""
        if features.shape[0] != graph.n:
            raise GuardError("feature rows must match the vertex count")
        self._graph = graph
        h = features
        a_norm = normalized_adjacency(graph)
        for layer, act in zip(self.layers, self.acts):
            h = act.forward(layer.forward(a_norm, h))
        self._h_final = h
        if self.edge_outputs:
            pairs = np.array([h[u] + h[v] for u, v in graph.edges])
            scores = self.head.forward(pairs)
        else:
            scores = self.head.forward(h)
        return scores.T

    def backward(self, dtheta: np.ndarray) -> None:
        d_obj = self.head.backward(dtheta.T)
        if self.edge_outputs:
            dh = np.zeros_like(self._h_final)
            for (u, v), row in zip(self._graph.edges, d_obj):
                dh[u] += row
                dh[v] += row
        else:
            dh = d_obj
        for layer, act in zip(reversed(self.layers), reversed(self.acts)):
            dh = layer.backward(act.backward(dh))


class DownstreamModel:
    """Per-subgraph message passing, two-level pooling, and a readout head.

    `standardizer`, when set to a `(shift, scale)` pair, is applied to the
    pooled graph vector before the readout. Sum aggregation over several
    rounds leaves the vector dominated by a class-independent component
    orders of magnitude above any discriminative direction; fixing an
    affine reparameterization from training-set statistics removes that
    conditioning problem without touching the learned parameters. It is
    not stored in checkpoints and must be recomputed from the dataset.
    """

    def __init__(
        self,
        store: ParamStore,
        d_in: int,
        hidden: int,
        d_out: int,
        rng: np.random.Generator,
        depth: int = 4,
    ):
        self.standardizer = None
        self.layers = []
        d = d_in + 1  # the membership indicator channel
        for i in range(depth):
            spec = LayerSpec("gin", d, hidden)
            self.layers.append(GINLayer(store, f"down.gin{i}", spec, "downstream", rng))
            d = hidden
        self.readout = ReadoutMLP(
            store, "down.readout", LayerSpec("readout-mlp", hidden, d_out), "downstream", rng
        )

    def _run_copy(self, a: np.ndarray, mask: np.ndarray, x: np.ndarray):
        h = x
        for layer in self.layers:
            h = layer.forward(a, h)
            h[~mask] = 0.0
        return masked_mean_pool(h, mask)

    def forward(
        self, batch: SubgraphBatch, adjacency_override: list[np.ndarray] | None = None
    ) -> np.ndarray:
        """Prediction for one graph; adjacency_override substitutes explicit
        dense matrices for the mask-derived ones (gradient checks only)."""
        self._batch = batch
        self._inputs = []
        embeddings = []
        for idx, pm in enumerate(batch.masks):
            if adjacency_override is None:
                a = masked_dense_adjacency(batch.graph, pm)
            else:
                a = adjacency_override[idx]
            x = batch.copy_features(pm)
            self._inputs.append((a, pm.vertex_mask, x))
            pooled, _ = self._run_copy(a, pm.vertex_mask, x)
            embeddings.append(pooled)
        self._emb = np.array(embeddings)
        graph_vec = mean_pool(self._emb)
        if self.standardizer is not None:
            shift, scale = self.standardizer
            graph_vec = (graph_vec - shift) / scale
        return self.readout.forward(graph_vec[None, :])[0]

    def backward(self, dpred: np.ndarray) -> list[np.ndarray]:
        """Fill parameter gradients; return one dense adjacency gradient per
        subgraph copy for the sampler's estimator."""
        d_graph_vec = self.readout.backward(dpred[None, :])[0]
        if self.standardizer is not None:
            d_graph_vec = d_graph_vec / self.standardizer[1]
        d_emb = mean_pool_backward(d_graph_vec, self._emb.shape[0])
        adjacency_grads = []
        n = self._batch.graph.n
        for (a, mask, x), d_pool in zip(self._inputs, d_emb):
            # layer caches hold the last copy processed, so replay this
            # copy's forward pass before walking its layers backward
            _, pool_cache = self._run_copy(a, mask, x)
            dh = masked_mean_pool_backward(d_pool, pool_cache, n)
            da_total = np.zeros((n, n))
            for layer in reversed(self.layers):
                dh[~mask] = 0.0
                dh, da = layer.backward(dh)
                da_total += da
            adjacency_grads.append(da_total)
        return adjacency_grads


def edge_grads_from_adjacency(da: np.ndarray, graph: LabeledGraph) -> np.ndarray:
    """Fold a dense adjacency gradient onto the canonical edge list."""
    return np.array([da[u, v] + da[v, u] for u, v in graph.edges])
