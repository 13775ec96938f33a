"""Trainable parameters and deterministic weight initialization."""

from __future__ import annotations

import math

import numpy as np

from healthpipe.rng import SplitMix64


class Parameter:
    """Named float64 array with its gradient and optimizer state attached."""

    __slots__ = ("name", "value", "grad", "m", "v")

    def __init__(self, name: str, value: np.ndarray):
        self.name = name
        self.value = np.asarray(value, dtype=np.float64)
        self.grad = np.zeros_like(self.value)
        self.m = np.zeros_like(self.value)
        self.v = np.zeros_like(self.value)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(self.value.shape)

    def zero_grad(self) -> None:
        self.grad[...] = 0.0

    def __repr__(self) -> str:
        return f"Parameter({self.name!r}, shape={self.shape})"


def glorot_uniform(
    rng: SplitMix64, shape: tuple[int, ...], fan_in: int, fan_out: int
) -> np.ndarray:
    """uniform(-a, a) with a = sqrt(6 / (fan_in + fan_out)).

    Values are drawn sequentially in row-major order, so the whole
    initialization is a pure function of the generator state.
    """
    a = math.sqrt(6.0 / (fan_in + fan_out))
    flat = np.empty(int(np.prod(shape)), dtype=np.float64)
    for i in range(flat.size):
        flat[i] = rng.uniform_range(-a, a)
    return flat.reshape(shape)
