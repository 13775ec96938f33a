"""Optimizers and gradient clipping.

Optimizer state (Adam's m, v) lives on each Parameter, so saving and
restoring parameters never needs a separate optimizer object.
"""

from __future__ import annotations

import math
from typing import Iterable

import numpy as np

from healthpipe.core import check_parameter
from healthpipe.nn.params import Parameter


def clip_global_norm(params: Iterable[Parameter], max_norm: float) -> float:
    """Scale all grads so their joint L2 norm is at most max_norm.

    Returns the pre-clip norm (useful for logging exploding gradients).
    """
    params = list(params)
    total_sq = sum(float(np.sum(p.grad * p.grad)) for p in params)
    norm = math.sqrt(total_sq)
    if norm > max_norm > 0.0:
        scale = max_norm / norm
        for p in params:
            p.grad *= scale
    return norm


def sgd_step(params: Iterable[Parameter], lr: float) -> None:
    check_parameter(lr, 0.0, 1e6, "lr", inclusive_low=False)
    for p in params:
        p.value -= lr * p.grad


def adam_step(
    params: Iterable[Parameter],
    lr: float,
    t: int,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> None:
    """Bias-corrected Adam update; t is the 1-based step count."""
    check_parameter(lr, 0.0, 1e6, "lr", inclusive_low=False)
    check_parameter(t, 1, 2**62, "t")
    bc1 = 1.0 - beta1**t
    bc2 = 1.0 - beta2**t
    for p in params:
        p.m = beta1 * p.m + (1.0 - beta1) * p.grad
        p.v = beta2 * p.v + (1.0 - beta2) * (p.grad * p.grad)
        p.value -= lr * (p.m / bc1) / (np.sqrt(p.v / bc2) + eps)
