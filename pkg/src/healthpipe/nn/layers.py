"""Layers with explicit hand-written backward passes.

No autodiff graph: each layer caches its forward intermediates and exposes a
backward that accumulates parameter gradients (+=) and returns the input
gradient. Every backward here is covered by a central-difference check in the
test suite.

Cell convention (gate chunk order within the stacked weight matrices):
  GRUCell   (r, z, n)  reset, update, candidate
  LSTMCell  (i, f, g, o)  input, forget, candidate, output
with two bias vectors b_x, b_h applied to the input and hidden projections.
"""

from __future__ import annotations

import numpy as np

from healthpipe.core import ErrorCode, ValidationError
from healthpipe.nn.ops import sigmoid
from healthpipe.nn.params import Parameter, glorot_uniform
from healthpipe.rng import SplitMix64


class Dense:
    """Affine map [B x in] -> [B x out]."""

    def __init__(self, rng: SplitMix64, in_dim: int, out_dim: int, prefix: str = "dense"):
        self.in_dim = in_dim
        self.out_dim = out_dim
        self.w = Parameter(f"{prefix}.w", glorot_uniform(rng, (in_dim, out_dim), in_dim, out_dim))
        self.b = Parameter(f"{prefix}.b", np.zeros(out_dim))

    def params(self) -> list[Parameter]:
        return [self.w, self.b]

    def forward(self, x: np.ndarray):
        if x.ndim != 2 or x.shape[1] != self.in_dim:
            raise ValidationError(
                ErrorCode.TYPE_MISMATCH,
                f"dense input shape {tuple(x.shape)} incompatible with "
                f"({self.in_dim}, {self.out_dim}) weights",
            )
        return x @ self.w.value + self.b.value, x

    def backward(self, cache, grad_out: np.ndarray) -> np.ndarray:
        x = cache
        self.w.grad += x.T @ grad_out
        self.b.grad += grad_out.sum(axis=0)
        return grad_out @ self.w.value.T


class GRUCell:
    """Gated recurrent cell.

    r = sigmoid(x W_xr + b_xr + h W_hr + b_hr)
    z = sigmoid(x W_xz + b_xz + h W_hz + b_hz)
    n = tanh(x W_xn + b_xn + r * (h W_hn + b_hn))
    h' = (1 - z) * n + z * h
    """

    n_state = 1

    def __init__(self, rng: SplitMix64, input_dim: int, hidden_dim: int, prefix: str = "gru"):
        self.input_dim = input_dim
        self.hidden_dim = hidden_dim
        H = hidden_dim
        # fan computed per gate block, not for the stacked matrix
        self.w_x = Parameter(
            f"{prefix}.w_x", glorot_uniform(rng, (input_dim, 3 * H), input_dim, H)
        )
        self.w_h = Parameter(f"{prefix}.w_h", glorot_uniform(rng, (H, 3 * H), H, H))
        self.b_x = Parameter(f"{prefix}.b_x", np.zeros(3 * H))
        self.b_h = Parameter(f"{prefix}.b_h", np.zeros(3 * H))

    def params(self) -> list[Parameter]:
        return [self.w_x, self.w_h, self.b_x, self.b_h]

    def forward(self, x: np.ndarray, state: tuple[np.ndarray, ...]):
        (h_prev,) = state
        H = self.hidden_dim
        a_x = x @ self.w_x.value + self.b_x.value
        a_h = h_prev @ self.w_h.value + self.b_h.value
        r = sigmoid(a_x[:, :H] + a_h[:, :H])
        z = sigmoid(a_x[:, H : 2 * H] + a_h[:, H : 2 * H])
        a_hn = a_h[:, 2 * H :]
        n = np.tanh(a_x[:, 2 * H :] + r * a_hn)
        h = (1.0 - z) * n + z * h_prev
        return (h,), (x, h_prev, r, z, n, a_hn)

    def backward(self, cache, dstate: tuple[np.ndarray, ...]):
        (dh,) = dstate
        x, h_prev, r, z, n, a_hn = cache
        dn = dh * (1.0 - z)
        dz = dh * (h_prev - n)
        dh_prev = dh * z
        da_n = dn * (1.0 - n * n)
        dr = da_n * a_hn
        da_hn = da_n * r
        da_r = dr * r * (1.0 - r)
        da_z = dz * z * (1.0 - z)
        da_x = np.concatenate([da_r, da_z, da_n], axis=1)
        da_h = np.concatenate([da_r, da_z, da_hn], axis=1)
        self.w_x.grad += x.T @ da_x
        self.b_x.grad += da_x.sum(axis=0)
        self.w_h.grad += h_prev.T @ da_h
        self.b_h.grad += da_h.sum(axis=0)
        dx = da_x @ self.w_x.value.T
        dh_prev = dh_prev + da_h @ self.w_h.value.T
        return dx, (dh_prev,)


class LSTMCell:
    """Long short-term memory cell.

    i, f, o = sigmoid(gates), g = tanh(candidate)
    c' = f * c + i * g
    h' = o * tanh(c')
    """

    n_state = 2  # (h, c)

    def __init__(self, rng: SplitMix64, input_dim: int, hidden_dim: int, prefix: str = "lstm"):
        self.input_dim = input_dim
        self.hidden_dim = hidden_dim
        H = hidden_dim
        self.w_x = Parameter(
            f"{prefix}.w_x", glorot_uniform(rng, (input_dim, 4 * H), input_dim, H)
        )
        self.w_h = Parameter(f"{prefix}.w_h", glorot_uniform(rng, (H, 4 * H), H, H))
        self.b_x = Parameter(f"{prefix}.b_x", np.zeros(4 * H))
        self.b_h = Parameter(f"{prefix}.b_h", np.zeros(4 * H))

    def params(self) -> list[Parameter]:
        return [self.w_x, self.w_h, self.b_x, self.b_h]

    def forward(self, x: np.ndarray, state: tuple[np.ndarray, ...]):
        h_prev, c_prev = state
        H = self.hidden_dim
        a = x @ self.w_x.value + self.b_x.value + h_prev @ self.w_h.value + self.b_h.value
        i = sigmoid(a[:, :H])
        f = sigmoid(a[:, H : 2 * H])
        g = np.tanh(a[:, 2 * H : 3 * H])
        o = sigmoid(a[:, 3 * H :])
        c = f * c_prev + i * g
        tc = np.tanh(c)
        h = o * tc
        return (h, c), (x, h_prev, c_prev, i, f, g, o, tc)

    def backward(self, cache, dstate: tuple[np.ndarray, ...]):
        dh, dc_in = dstate
        x, h_prev, c_prev, i, f, g, o, tc = cache
        do = dh * tc
        dc = dc_in + dh * o * (1.0 - tc * tc)
        df = dc * c_prev
        di = dc * g
        dg = dc * i
        dc_prev = dc * f
        da = np.concatenate(
            [di * i * (1.0 - i), df * f * (1.0 - f), dg * (1.0 - g * g), do * o * (1.0 - o)],
            axis=1,
        )
        self.w_x.grad += x.T @ da
        self.b_x.grad += da.sum(axis=0)
        self.w_h.grad += h_prev.T @ da
        self.b_h.grad += da.sum(axis=0)
        dx = da @ self.w_x.value.T
        dh_prev = da @ self.w_h.value.T
        return dx, (dh_prev, dc_prev)


class Conv1d:
    """Valid (no padding) temporal cross-correlation.

    Input [T x V] or batched [B x T x V]; output [(T - w + 1) x K] per
    example, out[t, k] = sum_{j, v} x[t + j, v] * w[j, v, k] + b[k].
    """

    def __init__(
        self, rng: SplitMix64, width: int, in_dim: int, n_filters: int, prefix: str = "conv"
    ):
        self.width = width
        self.in_dim = in_dim
        self.n_filters = n_filters
        self.w = Parameter(
            f"{prefix}.w",
            glorot_uniform(
                rng, (width, in_dim, n_filters), width * in_dim, width * n_filters
            ),
        )
        self.b = Parameter(f"{prefix}.b", np.zeros(n_filters))

    def params(self) -> list[Parameter]:
        return [self.w, self.b]

    def forward(self, x: np.ndarray):
        squeezed = x.ndim == 2
        if squeezed:
            x = x[None]
        T = x.shape[1]
        if T < self.width:
            raise ValidationError(
                ErrorCode.RANGE_VIOLATION,
                f"sequence length {T} is shorter than the kernel width {self.width}",
            )
        windows = np.lib.stride_tricks.sliding_window_view(x, self.width, axis=1)
        # windows[b, t, v, j] = x[b, t + j, v]
        out = np.einsum("btvj,jvk->btk", windows, self.w.value) + self.b.value
        if squeezed:
            out = out[0]
        return out, (x, squeezed)

    def backward(self, cache, grad_out: np.ndarray) -> np.ndarray:
        x, squeezed = cache
        if squeezed:
            grad_out = grad_out[None]
        windows = np.lib.stride_tricks.sliding_window_view(x, self.width, axis=1)
        self.w.grad += np.einsum("btvj,btk->jvk", windows, grad_out)
        self.b.grad += grad_out.sum(axis=(0, 1))
        dx = np.zeros_like(x)
        t_out = grad_out.shape[1]
        for j in range(self.width):
            dx[:, j : j + t_out, :] += np.einsum("btk,vk->btv", grad_out, self.w.value[j])
        return dx[0] if squeezed else dx
