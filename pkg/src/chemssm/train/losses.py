"""Training objectives: next-token cross-entropy and task-head losses."""

from __future__ import annotations

import numpy as np

from ..numerics.tensor import (
    ShapeMismatchError,
    Tensor,
    add,
    matmul,
    mul,
    record,
    reduce_mean,
    reduce_sum,
    reshape,
    softplus,
    tensor,
)


class LabelOutOfDomainError(ValueError):
    pass


def shifted_targets(token_ids: np.ndarray, pad_id: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Next-token targets and their mask: target[t] = ids[t+1], pads masked."""
    targets = np.full_like(token_ids, pad_id)
    targets[:, :-1] = token_ids[:, 1:]
    mask = (targets != pad_id).astype(np.float64)
    return targets, mask


def cross_entropy_next_token(logits: Tensor, targets: np.ndarray, mask: np.ndarray) -> Tensor:
    """Mean negative log-likelihood of targets over unmasked positions.

    Fused log-softmax + gather as a single tape node: the backward pass is
    (softmax - onehot) * mask / count.
    """
    targets = np.asarray(targets)
    mask = np.asarray(mask, dtype=np.float64)
    if logits.ndim != 3 or targets.shape != logits.shape[:2] or mask.shape != targets.shape:
        raise ShapeMismatchError(
            f"cross entropy shapes: logits {logits.shape}, targets {targets.shape}, "
            f"mask {mask.shape}"
        )
    count = mask.sum()
    if count == 0:
        raise ShapeMismatchError("mask excludes every position")
    z = logits.data
    zmax = z.max(axis=-1, keepdims=True)
    logsumexp = zmax + np.log(np.exp(z - zmax).sum(axis=-1, keepdims=True))
    b_idx, l_idx = np.indices(targets.shape)
    picked = z[b_idx, l_idx, targets]
    nll = (logsumexp[..., 0] - picked) * mask
    out = Tensor(np.array(nll.sum() / count))

    def vjp(g):
        probs = np.exp(z - logsumexp)
        probs[b_idx, l_idx, targets] -= 1.0
        return (g * probs * (mask / count)[..., None],)

    return record(out, (logits,), vjp)


def binary_cross_entropy_with_logits(logits: Tensor, labels: np.ndarray) -> Tensor:
    """Mean of softplus(z) - y*z, the stable form of -log sigmoid likelihood."""
    labels = np.asarray(labels, dtype=np.float64)
    if labels.shape != logits.shape:
        raise ShapeMismatchError(f"labels {labels.shape} vs logits {logits.shape}")
    if not np.isfinite(labels).all() or not np.isin(labels, (0.0, 1.0)).all():
        raise LabelOutOfDomainError("binary labels must all be 0 or 1")
    return reduce_mean(add(softplus(logits), mul(tensor(-labels), logits)))


def mean_squared_error(preds: Tensor, labels: np.ndarray) -> Tensor:
    labels = np.asarray(labels, dtype=np.float64)
    if labels.shape != preds.shape:
        raise ShapeMismatchError(f"labels {labels.shape} vs preds {preds.shape}")
    if not np.isfinite(labels).all():
        raise LabelOutOfDomainError("labels must be finite")
    diff = add(preds, tensor(-labels))
    return reduce_mean(mul(diff, diff))
