"""Minimal differentiable numerical core: layers, losses, optimizers.

Hand-written per-layer backward passes (no autodiff graph), float64
throughout, every gradient verified against central finite differences.
"""

from healthpipe.nn.gradcheck import gradient_check
from healthpipe.nn.layers import Conv1d, Dense, GRUCell, LSTMCell
from healthpipe.nn.ops import (
    EPSILON,
    bce,
    bce_grad_logits,
    cce,
    cce_grad_logits,
    matmul,
    relu,
    sigmoid,
    softmax,
    tanh,
)
from healthpipe.nn.optim import adam_step, clip_global_norm, sgd_step
from healthpipe.nn.params import Parameter, glorot_uniform
from healthpipe.nn.sequence import (
    masked_max_pool,
    masked_max_pool_backward,
    run_recurrent,
    run_recurrent_backward,
)

__all__ = [
    "EPSILON",
    "Conv1d",
    "Dense",
    "GRUCell",
    "LSTMCell",
    "Parameter",
    "adam_step",
    "bce",
    "bce_grad_logits",
    "cce",
    "cce_grad_logits",
    "clip_global_norm",
    "glorot_uniform",
    "gradient_check",
    "masked_max_pool",
    "masked_max_pool_backward",
    "matmul",
    "relu",
    "run_recurrent",
    "run_recurrent_backward",
    "sgd_step",
    "sigmoid",
    "softmax",
    "tanh",
]
