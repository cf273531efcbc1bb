"""Classification metrics: accuracy, precision/recall/F1, rank-based AUC.

Binary AUC follows the pairwise-ranking (Mann-Whitney) definition with
ties counted 0.5. Multiclass AUC is macro one-vs-rest; the per-class
spread (standard deviation) is reported alongside the mean. A label set
with a single class has no defined AUC and yields NaN.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import InputError


def binary_auc(scores: np.ndarray, labels: np.ndarray) -> float:
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=int)
    if scores.shape != labels.shape or scores.ndim != 1:
        raise InputError("scores and labels must be aligned 1D arrays")
    pos = scores[labels == 1]
    neg = scores[labels == 0]
    if len(pos) == 0 or len(neg) == 0:
        return math.nan
    greater = (pos[:, None] > neg[None, :]).sum()
    ties = (pos[:, None] == neg[None, :]).sum()
    return float((greater + 0.5 * ties) / (len(pos) * len(neg)))


def macro_ovr_auc(probabilities: np.ndarray, labels: np.ndarray) -> tuple[float, float]:
    """(mean, per-class standard deviation) of one-vs-rest AUCs."""
    probs = np.asarray(probabilities, dtype=np.float64)
    labels = np.asarray(labels, dtype=int)
    if probs.ndim != 2 or len(probs) != len(labels):
        raise InputError("probabilities must be (n, classes) aligned with labels")
    aucs = []
    for c in range(probs.shape[1]):
        auc = binary_auc(probs[:, c], (labels == c).astype(int))
        if not math.isnan(auc):
            aucs.append(auc)
    if not aucs:
        return math.nan, math.nan
    return float(np.mean(aucs)), float(np.std(aucs))


def classification_metrics(probabilities: np.ndarray, labels: np.ndarray) -> dict[str, float]:
    """Accuracy, macro precision/recall/F1, and AUC for one task."""
    probs = np.asarray(probabilities, dtype=np.float64)
    labels = np.asarray(labels, dtype=int)
    if probs.ndim != 2 or len(probs) != len(labels):
        raise InputError("probabilities must be (n, classes) aligned with labels")
    n_classes = probs.shape[1]
    pred = probs.argmax(axis=1)

    precisions, recalls, f1s = [], [], []
    for c in range(n_classes):
        tp = int(((pred == c) & (labels == c)).sum())
        fp = int(((pred == c) & (labels != c)).sum())
        fn = int(((pred != c) & (labels == c)).sum())
        prec = tp / (tp + fp) if tp + fp else 0.0
        rec = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * prec * rec / (prec + rec) if prec + rec else 0.0
        precisions.append(prec)
        recalls.append(rec)
        f1s.append(f1)

    if n_classes == 2:
        auc = binary_auc(probs[:, 1], (labels == 1).astype(int))
        auc_std = 0.0 if not math.isnan(auc) else math.nan
    else:
        auc, auc_std = macro_ovr_auc(probs, labels)

    return {
        "accuracy": float((pred == labels).mean()),
        "precision": float(np.mean(precisions)),
        "recall": float(np.mean(recalls)),
        "f1": float(np.mean(f1s)),
        "auc": auc,
        "auc_std": auc_std,
    }
