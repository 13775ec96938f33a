"""Masked unrolling: padding independence, degenerate lengths, BPTT gradients."""

import numpy as np
import pytest

from healthpipe.nn import (
    Dense,
    GRUCell,
    LSTMCell,
    Parameter,
    bce,
    bce_grad_logits,
    gradient_check,
    masked_max_pool,
    masked_max_pool_backward,
    run_recurrent,
    run_recurrent_backward,
    sigmoid,
)
from healthpipe.rng import SplitMix64


def sequence_closure(cell, readout, xp, mask, y):
    """Full recurrent pipeline: unroll -> readout -> bce; backward in reverse."""

    def closure():
        h_last, steps = run_recurrent(cell, xp.value, mask)
        logits, dense_cache = readout.forward(h_last)
        p = sigmoid(logits)
        loss = bce(p, y)
        dh = readout.backward(dense_cache, bce_grad_logits(p, y))
        xp.grad += run_recurrent_backward(cell, steps, xp.value.shape, dh)
        return loss

    return closure


def run_loss_and_grads(cell, readout, x, mask, y):
    for p in [*cell.params(), *readout.params()]:
        p.zero_grad()
    xp = Parameter("x", x)
    loss = sequence_closure(cell, readout, xp, mask, y)()
    grads = {p.name: p.grad.copy() for p in [*cell.params(), *readout.params()]}
    return loss, grads, xp.grad.copy()


class TestMaskHold:
    def test_padded_rows_are_bit_inert(self):
        cell = GRUCell(SplitMix64(0), 3, 4)
        readout = Dense(SplitMix64(1), 4, 1)
        np_rng = np.random.default_rng(0)
        x = np_rng.normal(size=(2, 5, 3))
        mask = np.array([[1.0, 1.0, 1.0, 0.0, 0.0], [1.0, 1.0, 0.0, 0.0, 0.0]])
        y = np.array([[1.0], [0.0]])
        loss_a, grads_a, dx_a = run_loss_and_grads(cell, readout, x, mask, y)

        perturbed = x.copy()
        perturbed[0, 3:, :] = 1e6
        perturbed[1, 2:, :] = -1e6
        loss_b, grads_b, dx_b = run_loss_and_grads(cell, readout, perturbed, mask, y)

        assert loss_a == loss_b
        for name in grads_a:
            assert np.array_equal(grads_a[name], grads_b[name]), name
        # gradient w.r.t. padded rows is exactly zero
        assert np.array_equal(dx_b[0, 3:], np.zeros((2, 3)))
        assert np.array_equal(dx_a[:, :2], dx_b[:, :2])

    def test_appending_padded_steps_changes_nothing(self):
        cell = LSTMCell(SplitMix64(2), 2, 3)
        readout = Dense(SplitMix64(3), 3, 1)
        np_rng = np.random.default_rng(2)
        x = np_rng.normal(size=(2, 3, 2))
        y = np.array([[0.0], [1.0]])
        full_mask = np.ones((2, 3))
        loss_a, grads_a, dx_a = run_loss_and_grads(cell, readout, x, full_mask, y)

        x_padded = np.concatenate([x, np_rng.normal(size=(2, 2, 2))], axis=1)
        mask_padded = np.concatenate([full_mask, np.zeros((2, 2))], axis=1)
        loss_b, grads_b, dx_b = run_loss_and_grads(cell, readout, x_padded, mask_padded, y)

        assert loss_a == loss_b
        for name in grads_a:
            assert np.array_equal(grads_a[name], grads_b[name]), name
        assert np.array_equal(dx_a, dx_b[:, :3])

    def test_length_one_reduces_to_single_cell(self):
        cell = GRUCell(SplitMix64(4), 3, 4)
        x = np.random.default_rng(4).normal(size=(2, 1, 3))
        mask = np.ones((2, 1))
        h_last, _ = run_recurrent(cell, x, mask)
        (h_direct,), _ = cell.forward(x[:, 0, :], (np.zeros((2, 4)),))
        assert np.array_equal(h_last, h_direct)

    def test_final_state_is_last_unmasked(self):
        cell = GRUCell(SplitMix64(5), 2, 3)
        np_rng = np.random.default_rng(5)
        x = np_rng.normal(size=(1, 4, 2))
        h2, _ = run_recurrent(cell, x[:, :2, :], np.ones((1, 2)))
        mask = np.array([[1.0, 1.0, 0.0, 0.0]])
        h_held, _ = run_recurrent(cell, x, mask)
        assert np.array_equal(h2, h_held)


class TestBpttGradients:
    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_gru_three_step(self, seed):
        cell = GRUCell(SplitMix64(seed), 3, 4)
        readout = Dense(SplitMix64(seed + 100), 4, 1)
        np_rng = np.random.default_rng(seed)
        xp = Parameter("x", np_rng.normal(size=(2, 3, 3)))
        mask = np.array([[1.0, 1.0, 1.0], [1.0, 1.0, 0.0]])
        y = np.array([[1.0], [0.0]])
        closure = sequence_closure(cell, readout, xp, mask, y)
        err = gradient_check(closure, [*cell.params(), *readout.params(), xp])
        assert err < 1e-4

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_lstm_three_step(self, seed):
        cell = LSTMCell(SplitMix64(seed), 3, 4)
        readout = Dense(SplitMix64(seed + 100), 4, 1)
        np_rng = np.random.default_rng(seed + 50)
        xp = Parameter("x", np_rng.normal(size=(2, 3, 3)))
        mask = np.array([[1.0, 1.0, 1.0], [1.0, 0.0, 0.0]])
        y = np.array([[0.0], [1.0]])
        closure = sequence_closure(cell, readout, xp, mask, y)
        err = gradient_check(closure, [*cell.params(), *readout.params(), xp])
        assert err < 1e-4


class TestMaskedMaxPool:
    def test_picks_max_over_valid_rows(self):
        x = np.array([[[1.0, 5.0], [3.0, 2.0], [9.0, 9.0]]])
        valid = np.array([[1.0, 1.0, 0.0]])
        out, _ = masked_max_pool(x, valid)
        assert np.array_equal(out, [[3.0, 5.0]])

    def test_no_valid_rows_pools_to_zero(self):
        x = np.full((1, 3, 2), 7.0)
        valid = np.zeros((1, 3))
        out, cache = masked_max_pool(x, valid)
        assert np.array_equal(out, np.zeros((1, 2)))
        dx = masked_max_pool_backward(cache, np.ones((1, 2)))
        assert np.array_equal(dx, np.zeros((1, 3, 2)))

    def test_backward_routes_to_first_argmax(self):
        x = np.array([[[2.0], [5.0], [5.0]]])
        valid = np.ones((1, 3))
        _, cache = masked_max_pool(x, valid)
        dx = masked_max_pool_backward(cache, np.array([[1.0]]))
        assert np.array_equal(dx, [[[0.0], [1.0], [0.0]]])

    def test_invalid_max_is_ignored(self):
        # the global max sits on an invalid row and must not leak through
        x = np.array([[[1.0], [100.0], [2.0]]])
        valid = np.array([[1.0, 0.0, 1.0]])
        out, cache = masked_max_pool(x, valid)
        assert np.array_equal(out, [[2.0]])
        dx = masked_max_pool_backward(cache, np.array([[1.0]]))
        assert np.array_equal(dx, [[[0.0], [0.0], [1.0]]])

    def test_gradients(self):
        np_rng = np.random.default_rng(11)
        xp = Parameter("x", np_rng.normal(size=(3, 5, 2)))
        valid = (np_rng.random((3, 5)) < 0.7).astype(float)
        valid[0] = 0.0  # one example with no valid rows at all

        def closure():
            out, cache = masked_max_pool(xp.value, valid)
            loss = 0.5 * float(np.sum(out * out))
            xp.grad += masked_max_pool_backward(cache, out)
            return loss

        assert gradient_check(closure, [xp]) < 1e-4
