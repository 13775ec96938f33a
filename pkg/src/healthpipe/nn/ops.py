"""Matrix product, activations, and classification losses.

All float64. Losses are mean-reduced over the batch (axis 0) after summing
over the label axis; their gradients are taken with respect to
pre-activation logits, which keeps the backward pass a single subtraction.
"""

from __future__ import annotations

import numpy as np

from healthpipe.core import ErrorCode, ValidationError

EPSILON = 1e-12


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ValidationError(
            ErrorCode.TYPE_MISMATCH,
            f"matmul shape mismatch: {tuple(a.shape)} x {tuple(b.shape)}",
        )
    return a @ b


def sigmoid(x: np.ndarray) -> np.ndarray:
    # split by sign so exp never overflows
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def tanh(x: np.ndarray) -> np.ndarray:
    return np.tanh(np.asarray(x, dtype=np.float64))


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(np.asarray(x, dtype=np.float64), 0.0)


def softmax(x: np.ndarray) -> np.ndarray:
    """Row-wise softmax over the last axis, max-shifted for stability."""
    x = np.asarray(x, dtype=np.float64)
    shifted = x - x.max(axis=-1, keepdims=True)
    ex = np.exp(shifted)
    return ex / ex.sum(axis=-1, keepdims=True)


def _check_same_shape(p: np.ndarray, y: np.ndarray, op: str) -> None:
    if p.shape != y.shape:
        raise ValidationError(
            ErrorCode.TYPE_MISMATCH,
            f"{op} shape mismatch: predictions {tuple(p.shape)} vs targets {tuple(y.shape)}",
        )


def _batch_reduce(per_element: np.ndarray) -> float:
    if per_element.ndim > 1:
        per_element = per_element.sum(axis=tuple(range(1, per_element.ndim)))
    return float(per_element.mean())


def bce(p: np.ndarray, y: np.ndarray) -> float:
    """Binary cross-entropy; p are probabilities, clamped at EPSILON."""
    p = np.asarray(p, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    _check_same_shape(p, y, "bce")
    p = np.clip(p, EPSILON, 1.0 - EPSILON)
    return _batch_reduce(-(y * np.log(p) + (1.0 - y) * np.log(1.0 - p)))


def bce_grad_logits(p: np.ndarray, y: np.ndarray) -> np.ndarray:
    """d bce / d z where p = sigmoid(z): (p - y) / batch."""
    p = np.asarray(p, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    _check_same_shape(p, y, "bce")
    return (p - y) / p.shape[0]


def cce(p: np.ndarray, y: np.ndarray) -> float:
    """Categorical cross-entropy; p row-stochastic, y one-hot."""
    p = np.asarray(p, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    _check_same_shape(p, y, "cce")
    p = np.clip(p, EPSILON, 1.0)
    return _batch_reduce(-(y * np.log(p)))


def cce_grad_logits(p: np.ndarray, y: np.ndarray) -> np.ndarray:
    """d cce / d z where p = softmax(z): (p - y) / batch."""
    p = np.asarray(p, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    _check_same_shape(p, y, "cce")
    return (p - y) / p.shape[0]
