"""Label-permutation-invariant comparison metrics."""

from __future__ import annotations

import numpy as np
from scipy.optimize import linear_sum_assignment

__all__ = ["confusion_matrix", "matched_accuracy"]


def confusion_matrix(true_labels, estimated_labels, size: int | None = None):
    """Square confusion count matrix, padded to a common label range."""
    true_labels = np.asarray(true_labels, dtype=int)
    estimated_labels = np.asarray(estimated_labels, dtype=int)
    if true_labels.shape != estimated_labels.shape:
        raise ValueError("label arrays must have equal length")
    if size is None:
        size = int(max(true_labels.max(), estimated_labels.max())) + 1
    conf = np.zeros((size, size), dtype=int)
    for t, e in zip(true_labels, estimated_labels):
        if t >= 0 and e >= 0:
            conf[t, e] += 1
    return conf


def matched_accuracy(true_labels, estimated_labels, size: int | None = None) -> float:
    """Fraction of agreeing labels after the best one-to-one label matching.

    Outlier marks (negative labels) never count as agreement.
    """
    conf = confusion_matrix(true_labels, estimated_labels, size)
    rows, cols = linear_sum_assignment(-conf)
    return float(conf[rows, cols].sum() / len(np.asarray(true_labels)))
