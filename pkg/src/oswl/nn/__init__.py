"""Minimal explicit-backprop neural stack: layers, models, losses,
optimizers, gradient checks, and the training loop."""

from .gradcheck import CHECK_KINDS, relative_error, run_gradcheck
from .layers import (
    GCNLayer,
    GINLayer,
    LayerSpec,
    Linear,
    ReadoutMLP,
    ReLU,
    masked_mean_pool,
    mean_pool,
    normalized_adjacency,
)
from .losses import diversity_penalty, loss_and_backward, pointwise_loss
from .models import (
    DownstreamModel,
    SubgraphBatch,
    UpstreamModel,
    edge_grads_from_adjacency,
    full_masks,
    masked_dense_adjacency,
    one_hot_labels,
)
from .params import Adam, ParamStore
from .train import (
    Dataset,
    TrainConfig,
    TrainResult,
    build_dataset,
    cfi_pair_dataset,
    train,
    triangle_dataset,
)

__all__ = [
    "Adam",
    "CHECK_KINDS",
    "Dataset",
    "DownstreamModel",
    "GCNLayer",
    "GINLayer",
    "LayerSpec",
    "Linear",
    "ParamStore",
    "ReLU",
    "ReadoutMLP",
    "SubgraphBatch",
    "TrainConfig",
    "TrainResult",
    "UpstreamModel",
    "build_dataset",
    "cfi_pair_dataset",
    "diversity_penalty",
    "edge_grads_from_adjacency",
    "full_masks",
    "loss_and_backward",
    "masked_dense_adjacency",
    "masked_mean_pool",
    "mean_pool",
    "normalized_adjacency",
    "one_hot_labels",
    "pointwise_loss",
    "relative_error",
    "run_gradcheck",
    "train",
    "triangle_dataset",
]
