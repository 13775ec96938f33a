"""Masked sequence execution: recurrent unrolling and temporal max-pooling.

Masks are prefix-of-ones per example. A masked step holds the previous state
unchanged (s_t = m * cell(x_t, s_prev) + (1 - m) * s_prev), so padded rows
contribute exactly nothing: loss and gradients are bit-identical under any
perturbation of padded input, and the final state IS the state at the last
unmasked step. The readout therefore just consumes the returned state.
"""

from __future__ import annotations

import numpy as np


def run_recurrent(cell, x: np.ndarray, mask: np.ndarray):
    """Unroll `cell` over x [B x T x V] with mask [B x T].

    Returns (h_last, steps) where h_last [B x H] is the hidden state at each
    example's last unmasked step and steps is the cache for the backward pass.
    """
    B, T, _ = x.shape
    state = tuple(np.zeros((B, cell.hidden_dim)) for _ in range(cell.n_state))
    steps = []
    for t in range(T):
        m = mask[:, t].reshape(B, 1)
        proposed, cache = cell.forward(x[:, t, :], state)
        state = tuple(m * p + (1.0 - m) * s for p, s in zip(proposed, state))
        steps.append((cache, m))
    return state[0], steps


def run_recurrent_backward(cell, steps, x_shape: tuple[int, ...], grad_h: np.ndarray):
    """Backward through time; accumulates cell parameter grads, returns dx."""
    T = x_shape[1]
    dstate = [grad_h] + [np.zeros_like(grad_h) for _ in range(cell.n_state - 1)]
    dx = np.zeros(x_shape)
    for t in range(T - 1, -1, -1):
        cache, m = steps[t]
        d_proposed = tuple(m * d for d in dstate)
        dx_t, d_prev = cell.backward(cache, d_proposed)
        dx[:, t, :] = dx_t
        dstate = [(1.0 - m) * d + p for d, p in zip(dstate, d_prev)]
    return dx


def masked_max_pool(x: np.ndarray, valid: np.ndarray):
    """Per-channel max over timesteps where valid == 1; x [B x T x K].

    Examples with no valid timestep pool to the zero vector. Backward routes
    each output coordinate's gradient to the FIRST maximal valid timestep, so
    the result never depends on invalid rows.
    """
    gated = np.where(valid[:, :, None] > 0.5, x, -np.inf)
    idx = gated.argmax(axis=1)
    has = valid.max(axis=1) > 0.5
    out = np.take_along_axis(x, idx[:, None, :], axis=1)[:, 0, :]
    out = np.where(has[:, None], out, 0.0)
    return out, (idx, has, x.shape)


def masked_max_pool_backward(cache, grad_out: np.ndarray) -> np.ndarray:
    idx, has, shape = cache
    B, _, K = shape
    dx = np.zeros(shape)
    routed = grad_out * has[:, None]
    b_idx = np.arange(B)[:, None]
    k_idx = np.arange(K)[None, :]
    np.add.at(dx, (b_idx, idx, k_idx), routed)
    return dx
