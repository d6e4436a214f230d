"""Central-difference verification of every backward pass.

Each check builds a small random instance, projects the output onto a fixed
random direction to get a scalar, and compares analytic gradients (parameters,
inputs, and adjacency entries where applicable) against central finite
differences. Relative error uses |analytic - numeric| / max(1, |numeric|).
"""
from __future__ import annotations

import numpy as np

from ..errors import GuardError
from ..graphs import build_graph
from ..sampling import PolicyMasks
from .layers import (
    GCNLayer,
    GINLayer,
    LayerSpec,
    Linear,
    ReadoutMLP,
    ReLU,
    masked_mean_pool,
    masked_mean_pool_backward,
    mean_pool,
    mean_pool_backward,
    normalized_adjacency,
)
from .models import DownstreamModel, SubgraphBatch, UpstreamModel
from .params import ParamStore

CHECK_KINDS = (
    "linear",
    "relu",
    "gin",
    "gcn",
    "pool-intra",
    "pool-inter",
    "readout-mlp",
    "upstream-model",
    "downstream-model",
)

_EPS = 1e-6


def relative_error(analytic: float, numeric: float) -> float:
    return abs(analytic - numeric) / max(1.0, abs(numeric))


def _numeric_grad(scalar_fn, arr: np.ndarray) -> np.ndarray:
    """Central differences of scalar_fn with respect to arr, in place."""
    grad = np.zeros_like(arr)
    flat, gflat = arr.ravel(), grad.ravel()
    for i in range(flat.size):
        saved = flat[i]
        flat[i] = saved + _EPS
        up = scalar_fn()
        flat[i] = saved - _EPS
        down = scalar_fn()
        flat[i] = saved
        gflat[i] = (up - down) / (2 * _EPS)
    return grad


def _max_err(analytic: np.ndarray, numeric: np.ndarray) -> float:
    pairs = zip(analytic.ravel(), numeric.ravel())
    return max((relative_error(a, n) for a, n in pairs), default=0.0)


def _random_graph(rng: np.random.Generator, n: int = 5):
    edges = [
        (a, b) for a in range(n) for b in range(a + 1, n) if rng.random() < 0.6
    ]
    labels = [int(rng.integers(0, 2)) for _ in range(n)]
    return build_graph(n, edges, labels)


def _randomize(store: ParamStore, rng: np.random.Generator) -> None:
    """Move every parameter to a generic point.

    Zero-initialized biases can park narrow ReLU stacks exactly on the kink
    (dead layer, output identically zero), where central differences do not
    equal the one-sided analytic gradient.
    """
    for name in store.names():
        arr = store.params[name]
        arr[...] = rng.normal(size=arr.shape) * 0.5


def _check_param_and_input(store, forward, backward, x, proj, extra_arrays=()):
    """Generic driver: analytic vs numeric for params, x, and extras."""

    def scalar():
        return float((forward() * proj).sum())

    scalar()  # populate layer caches before walking backward
    store.zero_grads()
    value_grads = backward(proj)
    if not isinstance(value_grads, tuple):
        value_grads = (value_grads,)
    errs = []
    for name in store.names():
        errs.append(
            _max_err(store.grads[name], _numeric_grad(scalar, store.params[name]))
        )
    for analytic, arr in zip(value_grads, (x, *extra_arrays)):
        errs.append(_max_err(analytic, _numeric_grad(scalar, arr)))
    return max(errs)


def _check_linear(rng):
    store = ParamStore()
    layer = Linear(store, "t", LayerSpec("linear", 3, 4), "downstream", rng)
    _randomize(store, rng)
    x = rng.normal(size=(5, 3))
    proj = rng.normal(size=(5, 4))
    return _check_param_and_input(
        store, lambda: layer.forward(x), layer.backward, x, proj
    )


def _check_relu(rng):
    # keep inputs away from the kink at zero
    x = rng.normal(size=(4, 3))
    x[np.abs(x) < 0.1] += 0.2
    layer = ReLU()
    proj = rng.normal(size=x.shape)

    def scalar():
        return float((layer.forward(x) * proj).sum())

    scalar()
    return _max_err(layer.backward(proj), _numeric_grad(scalar, x))


def _check_gcn(rng):
    store = ParamStore()
    layer = GCNLayer(store, "t", LayerSpec("gcn", 3, 4), "upstream", rng)
    _randomize(store, rng)
    graph = _random_graph(rng)
    a_norm = normalized_adjacency(graph)
    x = rng.normal(size=(graph.n, 3))
    proj = rng.normal(size=(graph.n, 4))
    return _check_param_and_input(
        store, lambda: layer.forward(a_norm, x), layer.backward, x, proj
    )


def _check_gin(rng):
    store = ParamStore()
    layer = GINLayer(store, "t", LayerSpec("gin", 3, 4), "downstream", rng)
    _randomize(store, rng)
    graph = _random_graph(rng)
    a = np.zeros((graph.n, graph.n))
    for u, v in graph.edges:
        a[u, v] = a[v, u] = 1.0
    x = rng.normal(size=(graph.n, 3))
    proj = rng.normal(size=(graph.n, 4))
    return _check_param_and_input(
        store, lambda: layer.forward(a, x), layer.backward, x, proj, extra_arrays=(a,)
    )


def _check_pool_intra(rng):
    x = rng.normal(size=(6, 4))
    mask = np.array([True, False, True, True, False, True])
    proj = rng.normal(size=4)

    def scalar():
        return float((masked_mean_pool(x, mask)[0] * proj).sum())

    _, cache = masked_mean_pool(x, mask)
    analytic = masked_mean_pool_backward(proj, cache, x.shape[0])
    return _max_err(analytic, _numeric_grad(scalar, x))


def _check_pool_inter(rng):
    rows = rng.normal(size=(3, 4))
    proj = rng.normal(size=4)

    def scalar():
        return float((mean_pool(rows) * proj).sum())

    analytic = mean_pool_backward(proj, rows.shape[0])
    return _max_err(analytic, _numeric_grad(scalar, rows))


def _check_readout(rng):
    store = ParamStore()
    layer = ReadoutMLP(store, "t", LayerSpec("readout-mlp", 4, 2), "downstream", rng)
    _randomize(store, rng)
    x = rng.normal(size=(3, 4))
    proj = rng.normal(size=(3, 2))
    return _check_param_and_input(
        store, lambda: layer.forward(x), layer.backward, x, proj
    )


def _check_upstream(rng):
    store = ParamStore()
    model = UpstreamModel(store, d_in=2, hidden=4, heads=2, rng=rng)
    _randomize(store, rng)
    graph = _random_graph(rng)
    x = rng.normal(size=(graph.n, 2))
    proj = rng.normal(size=(2, graph.n))

    def scalar():
        return float((model.forward(graph, x) * proj).sum())

    scalar()
    store.zero_grads()
    model.backward(proj)
    errs = [
        _max_err(store.grads[name], _numeric_grad(scalar, store.params[name]))
        for name in store.names()
    ]
    return max(errs)


def _check_downstream(rng):
    store = ParamStore()
    model = DownstreamModel(store, d_in=2, hidden=4, d_out=2, rng=rng, depth=2)
    _randomize(store, rng)
    model.standardizer = (rng.normal(size=4), 0.5 + rng.random(4))
    graph = _random_graph(rng)
    n = graph.n
    masks = []
    for _ in range(2):
        vmask = rng.random(n) < 0.8
        if not vmask.any():
            vmask[0] = True
        emask = np.array([vmask[u] and vmask[v] for u, v in graph.edges])
        masks.append(PolicyMasks(vmask, emask))
    features = rng.normal(size=(n, 2))
    batch = SubgraphBatch(graph, masks, features)
    adjacency = []
    for pm in masks:
        a = np.zeros((n, n))
        for (u, v), keep in zip(graph.edges, pm.edge_mask):
            if keep:
                a[u, v] = a[v, u] = 1.0
        adjacency.append(a)
    proj = rng.normal(size=2)

    def scalar():
        return float((model.forward(batch, adjacency_override=adjacency) * proj).sum())

    scalar()
    store.zero_grads()
    adjacency_grads = model.backward(proj)
    errs = [
        _max_err(store.grads[name], _numeric_grad(scalar, store.params[name]))
        for name in store.names()
    ]
    for analytic, arr in zip(adjacency_grads, adjacency):
        errs.append(_max_err(analytic, _numeric_grad(scalar, arr)))
    return max(errs)


_CHECKS = {
    "linear": _check_linear,
    "relu": _check_relu,
    "gin": _check_gin,
    "gcn": _check_gcn,
    "pool-intra": _check_pool_intra,
    "pool-inter": _check_pool_inter,
    "readout-mlp": _check_readout,
    "upstream-model": _check_upstream,
    "downstream-model": _check_downstream,
}


def run_gradcheck(seed: int = 0, points: int = 10) -> dict[str, float]:
    """Max relative error per layer kind over `points` random instances."""
    if points < 1:
        raise GuardError("need at least one check point")
    out = {}
    for pos, kind in enumerate(CHECK_KINDS):
        worst = 0.0
        for p in range(points):
            rng = np.random.default_rng([seed, pos, p])
            worst = max(worst, _CHECKS[kind](rng))
        out[kind] = worst
    return out
