"""Cross-validation folds and classification metrics."""

import numpy as np

from ..core import RngStream
from ..exceptions import ConfigError, DataError, ShapeError

_FOLD_DOMAIN = 0xF01D


def stratified_kfold(y, k: int, seed: int) -> list[np.ndarray]:
    """Deterministic stratified folds: k sorted test-index arrays.

    Each class's rows are shuffled then dealt round-robin, continuing the
    deal across classes, so overall fold sizes differ by at most one and
    per-class counts by at most one.
    """
    y = np.asarray(y, dtype=np.int64)
    if k < 2:
        raise ConfigError("need at least 2 folds")
    gen = RngStream(seed, _FOLD_DOMAIN).generator()
    folds: list[list[int]] = [[] for _ in range(k)]
    offset = 0
    for label in np.unique(y):
        idx = np.flatnonzero(y == label)
        if len(idx) < k:
            raise DataError(
                f"class {label} has {len(idx)} rows, fewer than {k} folds"
            )
        perm = idx[gen.permutation(len(idx))]
        for i, row in enumerate(perm):
            folds[(offset + i) % k].append(int(row))
        offset = (offset + len(idx)) % k
    return [np.array(sorted(f), dtype=np.int64) for f in folds]


def macro_f1(y_true, y_pred, n_classes: int) -> float:
    """Unweighted mean F1 over classes.

    A class absent from both the truth and the predictions is excluded from
    the average; a class with zero precision+recall contributes 0.
    """
    y_true = np.asarray(y_true, dtype=np.int64)
    y_pred = np.asarray(y_pred, dtype=np.int64)
    if y_true.shape != y_pred.shape or y_true.ndim != 1:
        raise ShapeError("y_true and y_pred must be equal-length vectors")
    if n_classes < 1:
        raise ConfigError("n_classes must be positive")
    for name, arr in (("y_true", y_true), ("y_pred", y_pred)):
        if arr.size and (arr.min() < 0 or arr.max() >= n_classes):
            raise DataError(f"{name} contains ids outside [0, {n_classes})")
    scores = []
    for c in range(n_classes):
        tp = int(np.sum((y_true == c) & (y_pred == c)))
        fp = int(np.sum((y_true != c) & (y_pred == c)))
        fn = int(np.sum((y_true == c) & (y_pred != c)))
        if tp + fp + fn == 0:
            continue  # class never seen: excluded, not counted as failure
        denom = 2 * tp + fp + fn
        scores.append(2 * tp / denom if denom else 0.0)
    if not scores:
        raise DataError("no class present in either labels or predictions")
    return float(np.mean(scores))
