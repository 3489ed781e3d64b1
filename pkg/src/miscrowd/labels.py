"""Label matrices, one-hot label tensors and the evaluation metrics.

A label matrix is an integer array of shape (workers, items). Entry ``c`` in
``1..n_classes`` means the worker gave class ``c``; ``0`` means unlabeled.
Ground truth is a length-``n_items`` integer array using the same coding,
with ``0`` for items whose truth is unknown.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class AggregationResult:
    labels: np.ndarray      # (n_items,), classes 1..n_classes
    posterior: np.ndarray   # (n_items, n_classes), rows sum to one
    n_iter: int = 0

    @property
    def n_classes(self) -> int:
        return self.posterior.shape[1]

    @classmethod
    def from_posterior(cls, posterior: np.ndarray, n_iter: int = 0) -> "AggregationResult":
        return cls(np.argmax(posterior, axis=1) + 1, posterior, n_iter)


def as_label_matrix(a, n_classes: int | None = None) -> tuple[np.ndarray, int]:
    """Validate a label matrix and resolve its class count.

    Without ``n_classes`` the count is the largest entry, as in the original
    algorithm; pass it explicitly when the top class may never be observed.
    """
    a = np.asarray(a)
    if a.ndim != 2:
        raise ValueError(f"label matrix must be 2-D, got shape {a.shape}")
    if a.size and not np.issubdtype(a.dtype, np.integer):
        if not np.all(np.mod(a, 1) == 0):
            raise ValueError("label matrix entries must be integers")
    a = a.astype(np.int64)
    top = int(a.max()) if a.size else 0
    if a.size and a.min() < 0:
        raise ValueError("label matrix entries must be non-negative")
    if n_classes is None:
        n_classes = top
    if n_classes < 1:
        raise ValueError("cannot infer the number of classes from an empty label matrix")
    if top > n_classes:
        raise ValueError(f"label {top} exceeds n_classes={n_classes}")
    return a, int(n_classes)


def binarize(a, n_classes: int | None = None) -> np.ndarray:
    """One-hot label tensor of shape (workers, items, n_classes).

    Unlabeled entries become all-zero fibers.
    """
    a, n_classes = as_label_matrix(a, n_classes)
    classes = np.arange(1, n_classes + 1)
    return (a[:, :, None] == classes).astype(np.float64)


def binarize_prediction(result: AggregationResult) -> np.ndarray:
    """One-hot (1, items, n_classes) slice of the hard labels in ``result``."""
    return binarize(np.asarray(result.labels)[None, :], result.n_classes)


def decode_argmax(t) -> np.ndarray:
    """Label matrix from the largest entry of every mode-3 fiber.

    Ties go to the lowest class, so an all-zero fiber decodes to class 1.
    """
    t = np.asarray(t, dtype=np.float64)
    if t.ndim != 3:
        raise ValueError(f"expected a 3-way tensor, got shape {t.shape}")
    return np.argmax(t, axis=2).astype(np.int64) + 1


def nonzero_rate(a) -> float:
    a = np.asarray(a)
    return float(np.count_nonzero(a)) / a.size


def _truth_mask(truth, n_items: int) -> np.ndarray:
    truth = np.asarray(truth)
    if truth.shape != (n_items,):
        raise ValueError(f"truth must have length {n_items}, got shape {truth.shape}")
    known = truth > 0
    if not known.any():
        raise ValueError("no items with ground truth; error rate is undefined")
    return known


def annotation_error_rate(a, truth) -> float:
    """Fraction of worker labels on truth-labeled items that disagree with the truth."""
    a = np.asarray(a)
    truth = np.asarray(truth)
    known = _truth_mask(truth, a.shape[1])
    sub = a[:, known]
    labeled = sub > 0
    n_labels = int(labeled.sum())
    if n_labels == 0:
        raise ValueError("no worker labels on truth-labeled items")
    wrong = labeled & (sub != truth[known][None, :])
    return float(wrong.sum()) / n_labels


def estimation_error(pred, truth) -> float:
    """Fraction of truth-labeled items whose predicted label is wrong."""
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    known = _truth_mask(truth, pred.shape[0])
    return float(np.count_nonzero(pred[known] != truth[known])) / int(known.sum())
