"""The four concrete architectures and their factories.

Each model object is just a forward/backward pair over (x [B x T x V],
mask [B x T]) plus its parameter list; the Predictor supplies training,
selection, and the call-order protocol.

  lr    masked mean over visits, then an affine head
  gru   recurrent encoder, last unmasked hidden state, affine head
  lstm  same with an LSTM cell
  tcnn  width-3 convolution over visits, relu, masked max-pool, affine head
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from healthpipe.core import ErrorCode, TaskKind, ValidationError, check_parameter
from healthpipe.models.checkpoint import read_header, select_best
from healthpipe.models.config import TrainConfig
from healthpipe.models.predictor import Predictor
from healthpipe.nn import (
    Conv1d,
    Dense,
    GRUCell,
    LSTMCell,
    masked_max_pool,
    masked_max_pool_backward,
    relu,
    run_recurrent,
    run_recurrent_backward,
)
from healthpipe.rng import SplitMix64

CONV_WIDTH = 3


class LRModel:
    kind = "lr"
    min_timesteps = 1

    def __init__(self, rng: SplitMix64, n_features: int, n_labels: int):
        self.n_features = n_features
        self.n_labels = n_labels
        self.head = Dense(rng, n_features, n_labels, prefix="head")

    def parameters(self):
        return self.head.params()

    def meta(self) -> dict:
        return {"kind": self.kind, "n_features": self.n_features, "n_labels": self.n_labels}

    def forward(self, x: np.ndarray, mask: np.ndarray):
        # visit-count can never be 0 (tensors always carry >= 1 real visit)
        denom = np.maximum(mask.sum(axis=1, keepdims=True), 1.0)
        pooled = (x * mask[:, :, None]).sum(axis=1) / denom
        logits, head_cache = self.head.forward(pooled)
        return logits, head_cache

    def backward(self, cache, dlogits: np.ndarray) -> None:
        self.head.backward(cache, dlogits)


class _RecurrentModel:
    min_timesteps = 1
    cell_cls: type

    def __init__(self, rng: SplitMix64, n_features: int, hidden_dim: int, n_labels: int):
        self.n_features = n_features
        self.hidden_dim = hidden_dim
        self.n_labels = n_labels
        self.cell = self.cell_cls(rng, n_features, hidden_dim, prefix="encoder")
        self.head = Dense(rng, hidden_dim, n_labels, prefix="head")

    def parameters(self):
        return [*self.cell.params(), *self.head.params()]

    def meta(self) -> dict:
        return {
            "kind": self.kind,
            "n_features": self.n_features,
            "hidden_dim": self.hidden_dim,
            "n_labels": self.n_labels,
        }

    def forward(self, x: np.ndarray, mask: np.ndarray):
        h_last, steps = run_recurrent(self.cell, x, mask)
        logits, head_cache = self.head.forward(h_last)
        return logits, (steps, head_cache, x.shape)

    def backward(self, cache, dlogits: np.ndarray) -> None:
        steps, head_cache, x_shape = cache
        dh = self.head.backward(head_cache, dlogits)
        run_recurrent_backward(self.cell, steps, x_shape, dh)


class GRUModel(_RecurrentModel):
    kind = "gru"
    cell_cls = GRUCell


class LSTMModel(_RecurrentModel):
    kind = "lstm"
    cell_cls = LSTMCell


class TCNNModel:
    kind = "tcnn"
    min_timesteps = CONV_WIDTH

    def __init__(
        self, rng: SplitMix64, max_visits: int, n_features: int, hidden_dim: int, n_labels: int
    ):
        if max_visits < CONV_WIDTH:
            raise ValidationError(
                ErrorCode.RANGE_VIOLATION,
                f"parameter 'max_visits' = {max_visits} is shorter than the "
                f"convolution width {CONV_WIDTH}",
            )
        self.max_visits = max_visits
        self.n_features = n_features
        self.hidden_dim = hidden_dim
        self.n_labels = n_labels
        self.conv = Conv1d(rng, CONV_WIDTH, n_features, hidden_dim, prefix="conv")
        self.head = Dense(rng, hidden_dim, n_labels, prefix="head")

    def parameters(self):
        return [*self.conv.params(), *self.head.params()]

    def meta(self) -> dict:
        return {
            "kind": self.kind,
            "max_visits": self.max_visits,
            "n_features": self.n_features,
            "hidden_dim": self.hidden_dim,
            "n_labels": self.n_labels,
        }

    def forward(self, x: np.ndarray, mask: np.ndarray):
        pre, conv_cache = self.conv.forward(x)
        act = relu(pre)
        # window t covers visits t..t+w-1 and is usable iff its last row is real
        valid = mask[:, CONV_WIDTH - 1 :]
        pooled, pool_cache = masked_max_pool(act, valid)
        logits, head_cache = self.head.forward(pooled)
        return logits, (conv_cache, pre, pool_cache, head_cache)

    def backward(self, cache, dlogits: np.ndarray) -> None:
        conv_cache, pre, pool_cache, head_cache = cache
        dpooled = self.head.backward(head_cache, dlogits)
        dact = masked_max_pool_backward(pool_cache, dpooled)
        self.conv.backward(conv_cache, dact * (pre > 0))


def _check_dims(max_visits: int, n_features: int, n_labels: int) -> None:
    check_parameter(max_visits, 1, 10**6, "max_visits")
    check_parameter(n_features, 1, 10**7, "n_features")
    check_parameter(n_labels, 1, 10**6, "n_labels")


def make_lr(max_visits, n_features, n_labels, task, config, expmodel_id, artifact_root="experiments"):
    _check_dims(max_visits, n_features, n_labels)
    config.validate()
    model = LRModel(SplitMix64(config.seed), n_features, n_labels)
    return Predictor(model, task, config, expmodel_id, artifact_root)


def make_gru(max_visits, n_features, n_labels, task, config, expmodel_id, artifact_root="experiments"):
    _check_dims(max_visits, n_features, n_labels)
    config.validate()
    model = GRUModel(SplitMix64(config.seed), n_features, config.hidden_dim, n_labels)
    return Predictor(model, task, config, expmodel_id, artifact_root)


def make_lstm(max_visits, n_features, n_labels, task, config, expmodel_id, artifact_root="experiments"):
    _check_dims(max_visits, n_features, n_labels)
    config.validate()
    model = LSTMModel(SplitMix64(config.seed), n_features, config.hidden_dim, n_labels)
    return Predictor(model, task, config, expmodel_id, artifact_root)


def make_tcnn(max_visits, n_features, n_labels, task, config, expmodel_id, artifact_root="experiments"):
    _check_dims(max_visits, n_features, n_labels)
    config.validate()
    model = TCNNModel(
        SplitMix64(config.seed), max_visits, n_features, config.hidden_dim, n_labels
    )
    return Predictor(model, task, config, expmodel_id, artifact_root)


MODEL_FACTORIES = {"lr": make_lr, "gru": make_gru, "lstm": make_lstm, "tcnn": make_tcnn}


def _model_from_meta(meta: dict, rng: SplitMix64):
    kind = meta.get("kind")
    try:
        if kind == "lr":
            return LRModel(rng, meta["n_features"], meta["n_labels"])
        if kind == "gru":
            return GRUModel(rng, meta["n_features"], meta["hidden_dim"], meta["n_labels"])
        if kind == "lstm":
            return LSTMModel(rng, meta["n_features"], meta["hidden_dim"], meta["n_labels"])
        if kind == "tcnn":
            return TCNNModel(
                rng, meta["max_visits"], meta["n_features"], meta["hidden_dim"], meta["n_labels"]
            )
    except KeyError as exc:
        raise ValidationError(
            ErrorCode.SCHEMA_VIOLATION,
            f"checkpoint model metadata missing key {exc}",
        ) from exc
    raise ValidationError(
        ErrorCode.SCHEMA_VIOLATION,
        f"unknown model kind {kind!r}; allowed: {sorted(MODEL_FACTORIES)}",
        context=str(kind),
    )


def load_predictor(
    artifact_root: Path | str, expmodel_id: str, config: TrainConfig | None = None
) -> Predictor:
    """Rebuild a predictor purely from its checkpoint directory.

    Selects the best epoch, reconstructs the architecture from the stored
    metadata, and restores that epoch's parameters.
    """
    directory = Path(artifact_root) / "checkpoints" / expmodel_id
    _, path = select_best(directory)
    header = read_header(path)
    meta = header["model"]
    task = TaskKind.from_string(meta["task"])
    config = config or TrainConfig()
    model = _model_from_meta(meta, SplitMix64(config.seed))
    predictor = Predictor(model, task, config, expmodel_id, artifact_root)
    predictor.load_model()
    return predictor
