"""Differentiable layers with explicit forward and backward passes.

Every layer caches what its backward pass needs, accumulates parameter
gradients into the shared :class:`ParamStore`, and returns the gradient with
respect to its inputs. Message-passing layers additionally expose the
gradient with respect to the dense adjacency, which the sampler's gradient
estimator consumes.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import GuardError
from ..graphs import LabeledGraph
from .params import ParamStore

LAYER_KINDS = ("linear", "relu", "gin", "gcn", "pool-intra", "pool-inter", "readout-mlp")


@dataclass(frozen=True)
class LayerSpec:
    """Shape-level description of one layer in a stack."""

    kind: str
    d_in: int = 0
    d_out: int = 0
    eps: float = 0.0

    def __post_init__(self):
        if self.kind not in LAYER_KINDS:
            raise GuardError(f"unknown layer kind {self.kind!r}")
        if self.kind in ("linear", "gin", "gcn", "readout-mlp"):
            if self.d_in < 1 or self.d_out < 1:
                raise GuardError(f"{self.kind} needs positive dimensions")


def glorot(rng: np.random.Generator, d_in: int, d_out: int) -> np.ndarray:
    bound = np.sqrt(6.0 / (d_in + d_out))
    return rng.uniform(-bound, bound, size=(d_in, d_out))


class Linear:
    def __init__(self, store: ParamStore, name: str, spec: LayerSpec, group: str,
                 rng: np.random.Generator):
        self.store, self.name = store, name
        self.w = store.register(f"{name}.w", glorot(rng, spec.d_in, spec.d_out), group)
        self.b = store.register(f"{name}.b", np.zeros(spec.d_out), group)

    def forward(self, x: np.ndarray) -> np.ndarray:
        self._x = x
        return x @ self.w + self.b

    def backward(self, dy: np.ndarray) -> np.ndarray:
        self.store.add_grad(f"{self.name}.w", self._x.T @ dy)
        self.store.add_grad(f"{self.name}.b", dy.sum(axis=0))
        return dy @ self.w.T


class ReLU:
    def forward(self, x: np.ndarray) -> np.ndarray:
        self._gate = x > 0
        return np.where(self._gate, x, 0.0)

    def backward(self, dy: np.ndarray) -> np.ndarray:
        return np.where(self._gate, dy, 0.0)


class ReadoutMLP:
    """Two affine maps with a ReLU between them; the final graph-level head.

    The second map starts at zero so predictions begin at the origin
    regardless of the embedding scale; otherwise deep sum-aggregation
    stacks saturate a cross-entropy head before training starts.
    """

    def __init__(self, store: ParamStore, name: str, spec: LayerSpec, group: str,
                 rng: np.random.Generator):
        hidden = spec.d_in
        self.fc1 = Linear(store, f"{name}.fc1", LayerSpec("linear", spec.d_in, hidden), group, rng)
        self.act = ReLU()
        self.fc2 = Linear(store, f"{name}.fc2", LayerSpec("linear", hidden, spec.d_out), group, rng)
        self.fc2.w[...] = 0.0

    def forward(self, x: np.ndarray) -> np.ndarray:
        return self.fc2.forward(self.act.forward(self.fc1.forward(x)))

    def backward(self, dy: np.ndarray) -> np.ndarray:
        return self.fc1.backward(self.act.backward(self.fc2.backward(dy)))


def normalized_adjacency(graph: LabeledGraph) -> np.ndarray:
    """Symmetric degree-normalized adjacency with self-loops."""
    a = np.eye(graph.n)
    for u, v in graph.edges:
        a[u, v] = a[v, u] = 1.0
    inv_sqrt = 1.0 / np.sqrt(a.sum(axis=1))
    return a * inv_sqrt[:, None] * inv_sqrt[None, :]


class GCNLayer:
    """H' = A_norm H W + b with a fixed, pre-normalized operator."""

    def __init__(self, store: ParamStore, name: str, spec: LayerSpec, group: str,
                 rng: np.random.Generator):
        self.store, self.name = store, name
        self.w = store.register(f"{name}.w", glorot(rng, spec.d_in, spec.d_out), group)
        self.b = store.register(f"{name}.b", np.zeros(spec.d_out), group)

    def forward(self, a_norm: np.ndarray, x: np.ndarray) -> np.ndarray:
        self._a, self._ax = a_norm, a_norm @ x
        return self._ax @ self.w + self.b

    def backward(self, dy: np.ndarray) -> np.ndarray:
        self.store.add_grad(f"{self.name}.w", self._ax.T @ dy)
        self.store.add_grad(f"{self.name}.b", dy.sum(axis=0))
        # the operator is symmetric, so no transpose is needed
        return self._a @ (dy @ self.w.T)


class GINLayer:
    """H' = MLP((A + (1 + eps) I) H); eps stays fixed, not trained.

    backward returns (dH, dA): dA covers every adjacency entry, including
    entries currently zeroed by masks, which is what the implicit-MLE
    estimator needs.
    """

    def __init__(self, store: ParamStore, name: str, spec: LayerSpec, group: str,
                 rng: np.random.Generator):
        self.eps = spec.eps
        hidden = spec.d_out
        self.fc1 = Linear(store, f"{name}.fc1", LayerSpec("linear", spec.d_in, hidden), group, rng)
        self.act = ReLU()
        self.fc2 = Linear(store, f"{name}.fc2", LayerSpec("linear", hidden, spec.d_out), group, rng)

    def forward(self, a: np.ndarray, x: np.ndarray) -> np.ndarray:
        self._a, self._x = a, x
        s = a @ x + (1.0 + self.eps) * x
        return self.fc2.forward(self.act.forward(self.fc1.forward(s)))

    def backward(self, dy: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        ds = self.fc1.backward(self.act.backward(self.fc2.backward(dy)))
        dx = self._a.T @ ds + (1.0 + self.eps) * ds
        da = ds @ self._x.T
        return dx, da


def masked_mean_pool(x: np.ndarray, mask: np.ndarray) -> tuple[np.ndarray, dict]:
    """Mean over surviving rows; an empty mask yields the zero vector."""
    count = int(mask.sum())
    if count == 0:
        return np.zeros(x.shape[1]), {"mask": mask, "count": 0}
    return x[mask].mean(axis=0), {"mask": mask, "count": count}


def masked_mean_pool_backward(dy: np.ndarray, cache: dict, n: int) -> np.ndarray:
    dx = np.zeros((n, dy.shape[0]))
    if cache["count"]:
        dx[cache["mask"]] = dy / cache["count"]
    return dx


def mean_pool(rows: np.ndarray) -> np.ndarray:
    """Mean over the first axis (inter-subgraph pooling)."""
    return rows.mean(axis=0)


def mean_pool_backward(dy: np.ndarray, m: int) -> np.ndarray:
    return np.tile(dy / m, (m, 1))
