"""Pointwise losses with explicit gradients plus the subgraph-diversity
auxiliary term.

The auxiliary term is the mean pairwise cosine similarity among the m
vertex keep-masks; minimizing it pushes the sampler toward covering
different parts of the graph. Its gradient is reported per mask vector so
the caller can route it into the sampler's gradient estimator.
"""
from __future__ import annotations

import numpy as np

from ..errors import GuardError, TrainingDiverged

LOSS_KINDS = ("l1", "l2", "cross-entropy")


def pointwise_loss(kind: str, pred: np.ndarray, target: np.ndarray) -> tuple[float, np.ndarray]:
    """Scalar loss and its gradient with respect to the prediction vector.

    cross-entropy treats pred as class logits and target as a one-element
    array holding the class index.
    """
    pred = np.asarray(pred, dtype=np.float64)
    if kind == "l1":
        diff = pred - target
        return float(np.abs(diff).sum()), np.sign(diff)
    if kind == "l2":
        diff = pred - target
        return float((diff * diff).sum()), 2.0 * diff
    if kind == "cross-entropy":
        cls = int(target[0]) if np.ndim(target) else int(target)
        if not 0 <= cls < pred.shape[0]:
            raise GuardError(f"class {cls} outside logit range {pred.shape[0]}")
        shifted = pred - pred.max()
        log_z = np.log(np.exp(shifted).sum()) + pred.max()
        grad = np.exp(pred - log_z)
        grad[cls] -= 1.0
        return float(log_z - pred[cls]), grad
    raise GuardError(f"unknown loss kind {kind!r}")


def diversity_penalty(masks: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean pairwise cosine similarity of mask rows and its gradient.

    All-zero rows (fully masked subgraphs) contribute similarity 0 with a
    zero gradient. A single row yields penalty 0.
    """
    rows = np.asarray(masks, dtype=np.float64)
    m = rows.shape[0]
    grad = np.zeros_like(rows)
    if m < 2:
        return 0.0, grad
    norms = np.linalg.norm(rows, axis=1)
    total = 0.0
    pairs = m * (m - 1) // 2
    for i in range(m):
        for j in range(i + 1, m):
            if norms[i] == 0 or norms[j] == 0:
                continue
            cos = float(rows[i] @ rows[j]) / (norms[i] * norms[j])
            total += cos
            grad[i] += rows[j] / (norms[i] * norms[j]) - cos * rows[i] / norms[i] ** 2
            grad[j] += rows[i] / (norms[i] * norms[j]) - cos * rows[j] / norms[j] ** 2
    return total / pairs, grad / pairs


def loss_and_backward(
    kind: str,
    pred: np.ndarray,
    target: np.ndarray,
    aux_weight: float = 0.0,
    masks: np.ndarray | None = None,
) -> tuple[float, np.ndarray, np.ndarray | None]:
    """Total loss, gradient w.r.t. the prediction, gradient w.r.t. masks.

    total = pointwise(kind) + aux_weight * diversity_penalty(masks). The
    mask gradient is None when the auxiliary term is inactive.
    """
    value, dpred = pointwise_loss(kind, pred, target)
    dmasks = None
    if aux_weight != 0.0:
        if masks is None:
            raise GuardError("auxiliary weight set but no masks supplied")
        aux, daux = diversity_penalty(masks)
        value += aux_weight * aux
        dmasks = aux_weight * daux
    if not np.isfinite(value):
        raise TrainingDiverged(f"non-finite loss {value!r} for kind {kind!r}")
    return value, dpred, dmasks
