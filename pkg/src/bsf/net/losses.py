"""Classification loss."""

import numpy as np

from ..core import as_tensor
from ..exceptions import DomainError, ShapeError


def softmax_cross_entropy(logits, labels, n_classes: int | None = None):
    """Mean cross-entropy over the batch and its gradient w.r.t. logits.

    Log-sum-exp stabilized. Gradient is (softmax - onehot) / batch, so it
    already carries the 1/n of the mean and rows sum to zero.
    """
    logits = as_tensor(logits)
    labels = np.asarray(labels, dtype=np.int64)
    if logits.ndim != 2:
        raise ShapeError(f"logits must be (batch, classes), got {logits.shape}")
    if labels.shape != (logits.shape[0],):
        raise ShapeError("labels must be one id per batch row")
    c = logits.shape[1] if n_classes is None else n_classes
    if c != logits.shape[1]:
        raise ShapeError(f"logits have {logits.shape[1]} classes, expected {c}")
    if labels.size and (labels.min() < 0 or labels.max() >= c):
        raise DomainError("label id outside [0, n_classes)")
    n = logits.shape[0]
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_z = np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    log_probs = shifted - log_z
    loss = -float(log_probs[np.arange(n), labels].mean())
    grad = np.exp(log_probs)
    grad[np.arange(n), labels] -= 1.0
    return loss, grad / n
