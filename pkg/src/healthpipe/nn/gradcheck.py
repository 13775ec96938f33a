"""Finite-difference verification of analytic gradients.

Every layer's backward pass is checked against central differences; this is
the oracle that keeps the hand-written backward code honest.
"""

from __future__ import annotations

from typing import Callable, Sequence

from healthpipe.nn.params import Parameter
from healthpipe.rng import SplitMix64


def gradient_check(
    closure: Callable[[], float],
    params: Sequence[Parameter],
    h: float = 1e-5,
    max_coords: int = 64,
    seed: int = 0,
) -> float:
    """Max relative error between analytic and central-difference gradients.

    `closure` must zero nothing itself: it computes the scalar loss and
    accumulates gradients into the given params. Checks every coordinate, or
    a seeded random subsample of max_coords when there are more. Relative
    error per coordinate is |a - n| / max(|a|, |n|, 1e-8).
    """
    params = list(params)
    for p in params:
        p.zero_grad()
    closure()
    analytic = [p.grad.copy() for p in params]

    coords = [(pi, fi) for pi, p in enumerate(params) for fi in range(p.value.size)]
    if len(coords) > max_coords:
        rng = SplitMix64(seed)
        rng.shuffle(coords)
        coords = coords[:max_coords]

    worst = 0.0
    for pi, fi in coords:
        p = params[pi]
        orig = p.value.flat[fi]
        p.value.flat[fi] = orig + h
        for q in params:
            q.zero_grad()
        loss_plus = closure()
        p.value.flat[fi] = orig - h
        for q in params:
            q.zero_grad()
        loss_minus = closure()
        p.value.flat[fi] = orig
        numeric = (loss_plus - loss_minus) / (2.0 * h)
        a = analytic[pi].flat[fi]
        rel = abs(a - numeric) / max(abs(a), abs(numeric), 1e-8)
        worst = max(worst, rel)

    # leave grads in the unperturbed analytic state
    for p, g in zip(params, analytic):
        p.grad[...] = g
    return worst
