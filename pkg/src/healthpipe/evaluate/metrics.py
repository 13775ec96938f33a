"""Classification metrics with documented tie and zero-denominator rules.

Conventions that change third-decimal results, fixed here:
  - AUROC ties get half credit (Mann-Whitney / average-rank).
  - AUPRC ranks descending by score, ties broken by stable input order.
  - precision / recall / F1 with a zero denominator are 0, never NaN.
  - a label column with a single class is "degenerate".
"""

from __future__ import annotations

import numpy as np

from healthpipe.core import ErrorCode, TaskKind, ValidationError


class DegenerateLabels(Exception):
    """Raised when a metric is undefined for single-class labels."""


def _as_label_matrix(y) -> np.ndarray:
    y = np.asarray(y, dtype=np.float64)
    if y.ndim == 1:
        y = y.reshape(-1, 1)
    if y.ndim != 2:
        raise ValidationError(
            ErrorCode.TYPE_MISMATCH, f"labels must be a matrix, got shape {tuple(y.shape)}"
        )
    if y.shape[0] == 0 or y.shape[1] == 0:
        raise ValidationError(ErrorCode.EMPTY_INPUT, "label matrix 'y' is empty")
    if not np.all((y == 0.0) | (y == 1.0)):
        bad = y[(y != 0.0) & (y != 1.0)].flat[0]
        raise ValidationError(
            ErrorCode.RANGE_VIOLATION,
            f"label entries must be 0 or 1, found {bad!r}",
        )
    return y


def label_check(y) -> TaskKind:
    """Infer the task kind from the labels alone.

    One column is binary; one-hot rows are multiclass; anything else is
    multilabel. Row and column permutations cannot change the answer.
    """
    y = _as_label_matrix(y)
    if y.shape[1] == 1:
        return TaskKind.BINARY
    if np.all(y.sum(axis=1) == 1.0):
        return TaskKind.MULTICLASS
    return TaskKind.MULTILABEL


def is_degenerate(column: np.ndarray) -> bool:
    """True when every label in the column is the same class."""
    return bool(np.all(column == column.flat[0]))


def _average_ranks(scores: np.ndarray) -> np.ndarray:
    # 1-based ranks; tied runs share their mean rank
    order = np.argsort(scores, kind="stable")
    ranks = np.empty(scores.shape[0])
    i = 0
    n = scores.shape[0]
    while i < n:
        j = i
        while j + 1 < n and scores[order[j + 1]] == scores[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def auroc(scores, y) -> float:
    """Probability a random positive outranks a random negative; ties count half."""
    scores = np.asarray(scores, dtype=np.float64).reshape(-1)
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    n_pos = int(y.sum())
    n_neg = y.shape[0] - n_pos
    if n_pos == 0 or n_neg == 0:
        raise DegenerateLabels("auroc needs at least one positive and one negative")
    ranks = _average_ranks(scores)
    u = ranks[y == 1.0].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def auprc(scores, y) -> float:
    """Average precision: mean over positives of precision at that positive's rank."""
    scores = np.asarray(scores, dtype=np.float64).reshape(-1)
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    n_pos = int(y.sum())
    if n_pos == 0:
        raise DegenerateLabels("auprc needs at least one positive")
    order = np.argsort(-scores, kind="stable")
    hits = 0
    total = 0.0
    for rank, idx in enumerate(order, start=1):
        if y[idx] == 1.0:
            hits += 1
            total += hits / rank
    return total / n_pos


def _confusion(scores: np.ndarray, y: np.ndarray, threshold: float):
    pred = scores >= threshold
    actual = y == 1.0
    tp = int(np.sum(pred & actual))
    fp = int(np.sum(pred & ~actual))
    fn = int(np.sum(~pred & actual))
    tn = int(np.sum(~pred & ~actual))
    return tp, fp, fn, tn


def accuracy(scores, y, threshold: float = 0.5) -> float:
    scores = np.asarray(scores, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    return float(np.mean((scores >= threshold) == (y == 1.0)))


def precision(scores, y, threshold: float = 0.5) -> float:
    tp, fp, _, _ = _confusion(np.asarray(scores, float), np.asarray(y, float), threshold)
    return tp / (tp + fp) if tp + fp else 0.0


def recall(scores, y, threshold: float = 0.5) -> float:
    tp, _, fn, _ = _confusion(np.asarray(scores, float), np.asarray(y, float), threshold)
    return tp / (tp + fn) if tp + fn else 0.0


def f1(scores, y, threshold: float = 0.5) -> float:
    p = precision(scores, y, threshold)
    r = recall(scores, y, threshold)
    return 2.0 * p * r / (p + r) if p + r else 0.0


def micro_f1(scores, y, threshold: float = 0.5) -> float:
    """F1 over the pooled confusion counts of every label column."""
    return f1(np.asarray(scores, float).reshape(-1), np.asarray(y, float).reshape(-1), threshold)


def top1_accuracy(scores, y) -> float:
    """Fraction of rows whose argmax score hits the one-hot label."""
    scores = np.asarray(scores, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    return float(np.mean(scores.argmax(axis=1) == y.argmax(axis=1)))
